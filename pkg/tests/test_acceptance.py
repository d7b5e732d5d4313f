"""Acceptance criteria 1-10, one PASS/FAIL line per clause in the terminal summary.

Clauses that contradict an exact computation or a converged simulation are
kept at their stated values and marked strict xfail; the rederived values
are asserted next to them.
"""

import csv
import math
from fractions import Fraction
from functools import cache
from pathlib import Path

import numpy as np
import pytest
from conftest import finding, record

from rsc import cli
from rsc.analytic import cumulant_series, dimer_min_cover_asymptotic, fano_factors, mandel_q, u_of_ell
from rsc.balls import EXPONENTIAL, POWER, TorusSpec, ball_volume, fit_decay, simulate_balls
from rsc.cover import CENTRAL, OVERLAP, RING, ProcessSpec
from rsc.exact import (
    count_distribution,
    enumerate_oracle,
    fibonacci,
    max_cover_prob,
    mean_deposits,
    min_cover_probs,
    overhang_probs,
)
from rsc.kinetics import analytic_M, analytic_pi, pi1_maximum_time, simulate_kinetics
from rsc.line import REDERIVED, STATED, analytic_line, geometric_guess, line_pi2_B, simulate_line

pytestmark = pytest.mark.slow


def check(criterion, clause, ok, detail=""):
    record(criterion, clause, ok, detail)
    assert ok, f"[{criterion}] {clause}: {detail}"


def worst_z(measured, se, expected):
    """Largest |z|; a zero s.e. (e.g. pi_0 = 0 in every jammed trial) counts as exact agreement or infinite z."""
    diff = np.abs(np.asarray(measured, float) - np.asarray(expected, float))
    se = np.broadcast_to(np.asarray(se, float), diff.shape)
    exact = diff <= 1e-12
    z = np.where(exact, 0.0, diff / np.where(se > 0, se, np.nan))
    z = np.where(~exact & ~(se > 0), np.inf, z)
    return float(np.max(z))


# ----------------------------------------------------------------------------
# run parameters, shared by the checks and by the manifest replays

SEED = 0
KIN_L, KIN_TRIALS = 100_000, 20
KIN_GRID = [0.25, 0.5, 1.0, 2.0, 4.0, math.inf]
PEAK_GRID = [round(0.3 + 0.05 * i, 10) for i in range(45)]  # 0.30 .. 2.50
LINE_LAM, LINE_TRIALS = 10_000.0, 20
LINE_A_GRID = [0.5, 1.0, 2.0, 5.0, 10.0, math.inf]
LINE_B_GRID = [0.5, 1.0, 2.0, 5.0, 10.0] + [float(round(x, 6)) for x in np.geomspace(20, 100, 9)] + [1e5]
MC_TRIALS = 100_000
BALLS = {
    "d2B": dict(spec=TorusSpec(2, 100.0, 1 / 32, "B", 1.0), grid=list(np.geomspace(1.0, 100.0, 25)), trials=4),
    "d2A": dict(spec=TorusSpec(2, 100.0, 1 / 32, "A", 1.0), grid=list(np.linspace(0.25, 2.5, 19)), trials=8),
    "d1A": dict(spec=TorusSpec(1, 20_000.0, 1 / 256, "A", 0.5), grid=list(np.linspace(0.25, 2.5, 19)), trials=4),
    "d1B": dict(spec=TorusSpec(1, 20_000.0, 1 / 256, "B", 0.5), grid=[0.5, 1.0, 2.0, 5.0, 10.0] + list(np.geomspace(20, 100, 9)), trials=8),
}


def _grid_arg(grid):
    return ",".join(cli.format_value(float(x)) for x in grid)


def kinetics_argv(ell, model, rule=OVERLAP, grid=KIN_GRID):
    return [
        "kinetics", "--ell", str(ell), "--model", model, "--rule", rule, "--L", str(KIN_L),
        "--trials", str(KIN_TRIALS), "--seed", str(SEED), "--t-grid", _grid_arg(grid),
    ]  # fmt: skip


def balls_argv(key):
    b = BALLS[key]
    sp = b["spec"]
    return [
        "balls", "--d", str(sp.d), "--side", cli.format_value(sp.side), "--h", cli.format_value(sp.h),
        "--model", sp.model, "--radius", cli.format_value(sp.radius), "--trials", str(b["trials"]),
        "--seed", str(SEED), "--t-max", cli.format_value(float(b["grid"][-1])), "--t-grid", _grid_arg(b["grid"]),
    ]  # fmt: skip


def line_argv(model):
    grid = LINE_A_GRID if model == "A" else LINE_B_GRID
    return ["line", "--model", model, "--Lam", cli.format_value(LINE_LAM), "--trials", str(LINE_TRIALS),
            "--seed", str(SEED), "--t-grid", _grid_arg(grid)]  # fmt: skip


CRITERION_COMMANDS = {
    "1": [["exact", "--L", "10", "--ell", "2"], ["distribution", "--L", "60", "--ell", "5"]],
    "2": [["cumulants", "--order", "8"]],
    "3": [
        ["distribution", "--L", "10", "--ell", "2", "--mc-trials", str(MC_TRIALS), "--seed", str(SEED)],
        ["distribution", "--L", "9", "--ell", "3", "--mc-trials", str(MC_TRIALS), "--seed", str(SEED)],
    ],
    "4": [["extremal", "--ell", str(ell), "--n-max", "30"] for ell in (2, 3, 4, 5, 6, 7)],
    "5": [kinetics_argv(ell, "A") for ell in (2, 3, 4, 5)],
    "6": [kinetics_argv(3, "A")],
    "7": [kinetics_argv(ell, "B", CENTRAL) for ell in (3, 4, 5)]
    + [kinetics_argv(ell, "B", CENTRAL, PEAK_GRID) for ell in (3, 4, 5)],
    "8": [line_argv("A"), line_argv("B")],
    "9": [balls_argv(k) for k in BALLS],
}


@cache
def kinetics(ell, model, rule=OVERLAP, grid=tuple(KIN_GRID)):
    sp = ProcessSpec(ell, KIN_L, RING, model, rule)
    return simulate_kinetics(sp, list(grid), n_trials=KIN_TRIALS, seed=SEED, jobs=None)


@cache
def line(model):
    grid = LINE_A_GRID if model == "A" else LINE_B_GRID
    return simulate_line(model, LINE_LAM, grid, n_trials=LINE_TRIALS, seed=SEED, jobs=None)


@cache
def balls(key):
    b = BALLS[key]
    return simulate_balls(b["spec"], float(b["grid"][-1]), seed=SEED, t_grid=b["grid"], n_trials=b["trials"], jobs=None)


@cache
def cli_output(dirname, argv):
    d = Path(dirname)
    d.mkdir(parents=True, exist_ok=True)
    name = "_".join(a.lstrip("-").replace("/", "") for a in argv[:8])[:120]
    out = d / f"{name}.csv"
    code = cli.run(list(argv) + ["--out", str(out)])
    assert code == 0, f"rsc {' '.join(argv)} exited with {code}"
    return out


@pytest.fixture(scope="session")
def outdir(tmp_path_factory):
    return str(tmp_path_factory.mktemp("acceptance"))


def read_csv(path):
    lines = [ln for ln in Path(path).read_text().splitlines() if not ln.startswith("#")]
    rows = list(csv.DictReader(lines))
    return list(rows[0]), rows


# ----------------------------------------------------------------------------
# 1. exact suite


def test_c1_mean_deposits():
    bad = [(L, ell) for ell in (2, 3, 4, 5) for L in range(1, 61) if count_distribution(L, ell).mean() != Fraction(2 * L + ell - 1, ell + 1)]
    check("1", "D_L = (2L+l-1)/(l+1) = <N> for L <= 60, l in 2..5", not bad, f"mismatches {bad[:5]}")
    assert all(mean_deposits(L, 3) == Fraction(2 * L + 2, 4) for L in range(1, 61))


def test_c1_overhang():
    bad = [L for L in range(3, 61) if overhang_probs(L) != (Fraction(1, 2), Fraction(1, 4))]
    check("1", "p_L = 1/2 and q_L = 1/4 exactly for 3 <= L <= 60", not bad, f"mismatches at {bad[:5]}")


@pytest.mark.xfail(strict=True, reason="oracle counts F_{L+3}-1 distinct congested position sets, not 2 F_{L+1}")
def test_c1_config_count_stated():
    got = [enumerate_oracle(L, 2).distinct_configs for L in range(1, 11)]
    want = [2 * fibonacci(L + 1) for L in range(1, 11)]
    check("1", "C_L = 2 F_{L+1} via the enumeration oracle, L <= 10", got == want, f"oracle {got} vs {want}")


def test_c1_config_count_rederived():
    got = [enumerate_oracle(L, 2).distinct_configs for L in range(1, 11)]
    check("1", "C_L = F_{L+3} - 1 (rederived) via the enumeration oracle, L <= 10", got == [fibonacci(L + 3) - 1 for L in range(1, 11)], f"{got}")


# ----------------------------------------------------------------------------
# 2. full counting statistics

LISTED_FANO = [
    Fraction(1, 15), Fraction(2, 315), Fraction(-11, 1575), Fraction(-1, 1485),
    Fraction(47221, 14189175), Fraction(811, 2027025), Fraction(-1790851, 516891375),
]  # fmt: skip


@pytest.mark.xfail(strict=True, reason="third Fano factor is 1/315 from U_3/U_1 = (2/945)/(2/3)")
def test_c2_all_seven_fano():
    got = fano_factors(8)
    check("2", "cumulant_series(8) reproduces all seven listed Fano factors", got == LISTED_FANO, f"n=3: {got[1]} vs listed {LISTED_FANO[1]}")


def test_c2_fano_except_typo_and_Q():
    got = fano_factors(8)
    U = cumulant_series(8)
    ok = [got[i] == LISTED_FANO[i] for i in (0, 2, 3, 4, 5, 6)]
    check("2", "six of seven Fano factors exact; n=3 equals U_3/U_1 = 1/315", all(ok) and got[1] == U[2] / U[0] == Fraction(1, 315))
    check("2", "Mandel Q = -14/15 exactly", mandel_q() == Fraction(-14, 15), str(mandel_q()))


# ----------------------------------------------------------------------------
# 3. oracle equivalence


def test_c3_oracle_exact():
    cases = [(L, 2) for L in range(1, 11)] + [(L, 3) for L in range(1, 10)]
    bad = [c for c in cases if enumerate_oracle(*c).distribution != count_distribution(*c).as_dict()]
    check("3", "count_distribution = enumerate_oracle for L <= 10 (l=2), L <= 9 (l=3)", not bad, f"mismatches {bad}")


@pytest.mark.parametrize("argv", CRITERION_COMMANDS["3"], ids=["L10-l2", "L9-l3"])
def test_c3_monte_carlo(outdir, argv):
    _, rows = read_csv(cli_output(outdir, tuple(argv)))
    z = max(abs(float(Fraction(r["P"])) - float(r["P_mc"])) / float(r["P_mc_se"]) for r in rows)
    check("3", f"MC histogram ({MC_TRIALS} trials, L={argv[2]}, l={argv[4]}) within 4 s.e. per bin", z <= 4, f"max |z| = {z:.2f}")


# ----------------------------------------------------------------------------
# 4. extremal tails

LISTED_U = {2: 1.57079632679, 3: 1.57656918868, 4: 1.52206284731, 5: 1.46785551917, 6: 1.42179975053, 7: 1.38361356892}


def test_c4_u_values():
    err = max(abs(u_of_ell(ell) - v) for ell, v in LISTED_U.items())
    check("4", "u(l) for l = 2..7 matches the six listed values to 1e-9", err <= 1e-9, f"max error {err:.2e}")


def test_c4_min_cover_ratio():
    r = float(min_cover_probs(2, 30)[30]) / dimer_min_cover_asymptotic(30)
    check("4", "m_30 / [2 (2/pi)^62] in [0.98, 1.02]", 0.98 <= r <= 1.02, f"ratio {r:.12f}")


def test_c4_max_cover_top_coefficient():
    bad = [(L, ell) for ell in (2, 3, 4, 5) for L in range(1, 31) if count_distribution(L, ell).coefficients[L] != max_cover_prob(L, ell)]
    check("4", "M_L equals the top distribution coefficient exactly (L <= 30, l = 2..5)", not bad, f"{bad[:5]}")


@pytest.mark.xfail(strict=True, reason="for l >= 3 the last uncovered site is reachable from all l positions")
def test_c4_max_cover_stated_expression():
    def stated(L, ell):
        return Fraction(2**L * math.factorial(ell - 1), math.factorial(L + ell - 1))

    bad = [(L, ell) for ell in (2, 3, 4) for L in range(2, 13) if count_distribution(L, ell).coefficients[L] != stated(L, ell)]
    check("4", "stated M_L = 2^L (l-1)!/(L+l-1)! equals the top coefficient", not bad, f"first mismatch {bad[:1]}")


# ----------------------------------------------------------------------------
# 5. lattice kinetics, model A

FINITE_T = [0.25, 0.5, 1.0, 2.0, 4.0]


def test_c5_dimer_fractions():
    run = kinetics(2, "A")
    idx = [run.time_index(t) for t in FINITE_T]
    ref = np.array([analytic_pi(2, "A", t).pi for t in FINITE_T])
    z = worst_z(run.pi_mean[idx], run.pi_se[idx], ref)
    check("5", "dimer pi_0, pi_1, pi_2 at t = 0.25..4 within 3 s.e. (L=1e5, 20 trials)", z <= 3, f"max |z| = {z:.2f}")


@pytest.mark.parametrize("ell", [3, 4, 5])
def test_c5_excess_general_ell(ell):
    run = kinetics(ell, "A")
    ref = [analytic_M(ell, t) for t in run.t_grid]
    z = worst_z(run.M_mean, run.M_se, ref)
    check("5", f"M(t) closed form for l={ell} within 3 s.e. (t = 0.25..4, jammed)", z <= 3, f"max |z| = {z:.2f}")


def test_c5_dimer_jammed():
    run = kinetics(2, "A")
    i = run.time_index(math.inf)
    z = worst_z(run.pi_mean[i, 1:], run.pi_se[i, 1:], [2 / 3, 1 / 3])
    check("5", "dimer jammed (pi_1, pi_2) = (2/3, 1/3) within 3 s.e.", z <= 3, f"measured {run.pi_mean[i, 1:].round(5)}, max |z| = {z:.2f}")


# ----------------------------------------------------------------------------
# 6. trimer conjecture


def _trimer_report():
    run = kinetics(3, "A")
    lines = []
    for t in (0.5, 1.0, 2.0, math.inf):
        i = run.time_index(t)
        ref = analytic_pi(3, "A", t).pi[1:]
        m, se = run.pi_mean[i, 1:], run.pi_se[i, 1:]
        lines.append((t, m, se, np.array(ref)))
    return lines


@pytest.mark.xfail(strict=True, reason="trimer conjecture contradicted by simulation")
def test_c6_trimer_conjecture_finite_t():
    ok_all = True
    for t, m, se, ref in _trimer_report()[:-1]:
        dz = np.abs(m - ref) / se
        ok = bool(np.all(dz <= 3) and np.all(np.abs(m - ref) <= 0.005))
        ok_all &= ok
        record("6", f"trimer conjecture pi_1..pi_3 at t={t:g} (3 s.e. and |delta| <= 0.005)", ok,
               f"measured {m.round(5)} vs conjectured {ref.round(5)}")  # fmt: skip
    if not ok_all:
        finding("trimer (l=3, model A) conjectured pi_1, pi_2, pi_3 disagree with simulation at t = 0.5, 1, 2 "
                "by tens to hundreds of standard errors")  # fmt: skip
    assert ok_all


@pytest.mark.xfail(strict=True, reason="trimer conjecture contradicted by simulation")
def test_c6_trimer_conjecture_jammed():
    _, m, se, ref = _trimer_report()[-1]
    z = float(np.max(np.abs(m - ref) / se))
    ok = z <= 3
    if not ok:
        finding(f"trimer jammed fractions are {m.round(4)} (s.e. {se.max():.1e}), not the conjectured (2/3, 1/6, 1/6); "
                "both satisfy sum k pi_k = 3/2")  # fmt: skip
    check("6", "trimer jammed (pi_1, pi_2, pi_3) = (2/3, 1/6, 1/6) within 3 s.e.", ok, f"measured {m.round(5)}, max |z| = {z:.0f}")


def test_c6_sum_rule_holds():
    run = kinetics(3, "A")
    k = np.arange(4)
    s = float((run.pi_trials[:, -1] * k).sum(axis=-1).mean())
    check("6", "(context) trimer jammed sum k pi_k = 3/2 exactly on average", abs(s - 1.5) < 1e-3, f"{s:.5f}")


# ----------------------------------------------------------------------------
# 7. model B lattice (central rule: the dynamics the closed forms solve)

JAMMED_B = {3: (1 - 3 * math.exp(-2)) / 2, 4: 3 * math.exp(-2), 5: 0.3727549}


@pytest.mark.parametrize("ell", [3, 4, 5])
def test_c7_model_b_fractions(ell):
    run = kinetics(ell, "B", CENTRAL)
    ref = np.array([[analytic_pi(ell, "B", t).pi0, analytic_pi(ell, "B", t).component(2)] for t in run.t_grid])
    z = worst_z(run.pi_mean[:, [0, 2]], run.pi_se[:, [0, 2]], ref)
    check("7", f"model B l={ell}: pi_0 and pi_2 closed forms within 3 s.e. (central rule)", z <= 3, f"max |z| = {z:.2f}")


@pytest.mark.parametrize("ell", [3, 4, 5])
def test_c7_model_b_jammed(ell):
    run = kinetics(ell, "B", CENTRAL)
    i = run.time_index(math.inf)
    assert analytic_pi(ell, "B", math.inf).component(2) == pytest.approx(JAMMED_B[ell], abs=5e-8)
    z = abs(run.pi_mean[i, 2] - JAMMED_B[ell]) / run.pi_se[i, 2]
    check("7", f"model B l={ell}: jammed pi_2 = {JAMMED_B[ell]:.7f} within 3 s.e.", z <= 3, f"measured {run.pi_mean[i, 2]:.5f}, |z| = {z:.2f}")


@pytest.mark.parametrize("ell,t_star", [(3, 1.38629), (4, math.log(2)), (5, math.log(2))])
def test_c7_pi1_maximum(ell, t_star):
    assert pi1_maximum_time(ell) == pytest.approx(t_star, abs=1e-5)
    run = kinetics(ell, "B", CENTRAL, tuple(PEAK_GRID))
    t, p1 = run.t_grid, run.pi_mean[:, 1]
    i = int(np.argmax(p1))
    near = np.abs(t - t[i]) <= 0.15 + 1e-9
    a, b, _ = np.polyfit(t[near], p1[near], 2)
    vertex = -b / (2 * a)
    step = PEAK_GRID[1] - PEAK_GRID[0]
    ok = abs(t[i] - t_star) <= step
    check("7", f"model B l={ell}: pi_1 maximum near t = {t_star:.5f} within grid resolution", ok,
          f"argmax {t[i]:.2f}, parabola vertex {vertex:.4f}, grid step {step:.2f}")  # fmt: skip


@pytest.mark.xfail(strict=True, reason="the overlap rule leaves voids shorter than the l-mer unfillable")
@pytest.mark.parametrize("ell", [3, 4, 5])
def test_c7_overlap_rule(ell):
    run = kinetics(ell, "B", OVERLAP)
    ref = np.array([[analytic_pi(ell, "B", t).pi0, analytic_pi(ell, "B", t).component(2)] for t in run.t_grid])
    z = worst_z(run.pi_mean[:, [0, 2]], run.pi_se[:, [0, 2]], ref)
    check("7", f"model B l={ell}: closed forms under the overlap rule (covered <= l//2)", z <= 3, f"max |z| = {z:.0f}")


# ----------------------------------------------------------------------------
# 8. continuum line


def test_c8_model_a_uncovered():
    run = line("A")
    fin = np.isfinite(run.t_grid)
    z = worst_z(run.pi_mean[fin, 0], run.pi_se[fin, 0], np.exp(-run.t_grid[fin]))
    check("8", "line model A pi_0 = e^{-t} within 3 s.e. (Lambda = 1e4)", z <= 3, f"max |z| = {z:.2f}")


@pytest.mark.xfail(strict=True, reason="excess coverage is 1 - (1+t) e^{-t}, half the stated form")
def test_c8_model_a_excess_stated():
    run = line("A")
    z = worst_z(run.M_mean, run.M_se, [analytic_line("A", t).M for t in run.t_grid])
    check("8", "line model A M(t) = 2 - 2(1+t) e^{-t} within 3 s.e.", z <= 3, f"max |z| = {z:.0f}")


def test_c8_model_a_excess_rederived():
    run = line("A")
    ref = [1 - (1 + t) * math.exp(-t) if math.isfinite(t) else 1.0 for t in run.t_grid]
    z = worst_z(run.M_mean, run.M_se, ref)
    check("8", "line model A M(t) = 1 - (1+t) e^{-t} (rederived) within 3 s.e.", z <= 3, f"max |z| = {z:.2f}")


def test_c8_model_a_jammed_sum():
    run = line("A")
    s = run.pi_trials[:, -1, :].sum(axis=-1)
    err = float(np.max(np.abs(s - 1)))
    check("8", "line model A jammed sum pi_k = 1 (exact)", err <= 1e-10, f"max |sum - 1| = {err:.1e}")


@pytest.mark.xfail(strict=True, reason="jammed excess is 1, not 2")
def test_c8_model_a_jammed_excess_stated():
    run = line("A")
    m, se = run.M_mean[-1], run.M_se[-1]
    check("8", "line model A jammed sum (k-1) pi_k = 2 within 3 s.e.", abs(m - 2) <= 3 * se, f"measured {m:.4f} +- {se:.4f}")


def test_c8_model_a_jammed_excess_rederived_and_guess():
    run = line("A")
    m, se = run.M_mean[-1], run.M_se[-1]
    check("8", "line model A jammed sum (k-1) pi_k = 1 (rederived) within 3 s.e.", abs(m - 1) <= 3 * se, f"measured {m:.4f} +- {se:.4f}")
    pi = run.pi_mean[-1, 1:7]
    guess = geometric_guess(6)
    record("8", "line model A jammed pi_k vs geometric guess 2^{k-1}/3^k (reported)", True,
           "k=1..6 measured " + " ".join(f"{x:.4f}" for x in pi) + " | guess " + " ".join(f"{x:.4f}" for x in guess))  # fmt: skip


@pytest.mark.xfail(strict=True, reason="the stated curve runs four times too fast; it is script_E(t/4)")
def test_c8_model_b_uncovered_stated():
    run = line("B")
    sel = run.t_grid <= 20
    ref = [analytic_line("B", t, STATED).pi0 for t in run.t_grid[sel]]
    z = worst_z(run.pi_mean[sel, 0], run.pi_se[sel, 0], ref)
    check("8", "line model B pi_0 = script_E(t) within 3 s.e. for t <= 20", z <= 3, f"max |z| = {z:.0f}")


def test_c8_model_b_uncovered_rederived():
    run = line("B")
    sel = run.t_grid <= 20
    ref = [analytic_line("B", t, REDERIVED).pi0 for t in run.t_grid[sel]]
    z = worst_z(run.pi_mean[sel, 0], run.pi_se[sel, 0], ref)
    check("8", "line model B pi_0 = script_E(t/4) (rederived) within 3 s.e. for t <= 20", z <= 3, f"max |z| = {z:.2f}")


def test_c8_model_b_slope():
    run = line("B")
    sel = (run.t_grid >= 20) & (run.t_grid <= 100)
    fit = fit_decay((run.t_grid[sel], run.pi_mean[sel, 0], run.pi_se[sel, 0]), (20, 100), POWER)
    check("8", "line model B log-log slope of pi_0 on [20, 100] = -2 +- 0.1", abs(fit.value + 2) <= 0.1, f"slope {fit.value:.3f} +- {fit.stderr:.3f}")


@pytest.mark.xfail(strict=True, reason="jammed values follow from the stated curve; the process parks at the Renyi density")
def test_c8_model_b_jammed_stated():
    run = line("B")
    m, se = run.pi_mean[-1, 1:3], run.pi_se[-1, 1:3]
    z = worst_z(m, se, [0.94553, 0.054469])
    check("8", "line model B jammed (pi_1, pi_2) = (0.94553, 0.054469) within 3 s.e.", z <= 3, f"measured {m.round(5)} at t = 1e5, max |z| = {z:.0f}")


def test_c8_model_b_jammed_rederived():
    run = line("B")
    m, se = run.pi_mean[-1, 1:3], run.pi_se[-1, 1:3]
    p2 = line_pi2_B(math.inf, REDERIVED)
    z = worst_z(m, se, [1 - p2, p2])
    check("8", f"line model B jammed (pi_1, pi_2) = ({1 - p2:.7f}, {p2:.7f}) (rederived, Renyi) within 3 s.e.", z <= 3,
          f"measured {m.round(5)} at t = 1e5, max |z| = {z:.2f}")  # fmt: skip
    assert run.max_multiplicity <= 2


# ----------------------------------------------------------------------------
# 9. balls


def test_c9_d1_model_a_rate():
    run = balls("d1A")
    fit = fit_decay(run, (0.5, 2.5), EXPONENTIAL)
    expected = ball_volume(1, 0.5)  # unit sticks: the line's e^{-t}
    check("9", "d=1 model A (unit length) fitted rate = 1, as on the line, within 5%", abs(fit.value / expected - 1) <= 0.05,
          f"rate {fit.value:.4f} +- {fit.stderr:.4f}")  # fmt: skip


def test_c9_d1_model_b_line_cross_check():
    run = balls("d1B")
    fit = fit_decay(run, (20, 100), POWER)
    check("9", "d=1 model B exponent on [20, 100] = -2 +- 0.1, as on the line", abs(fit.value + 2) <= 0.1, f"{fit.value:.3f} +- {fit.stderr:.3f}")
    sel = run.t_grid <= 20
    ref = [analytic_line("B", t, REDERIVED).pi0 for t in run.t_grid[sel]]
    z = worst_z(run.pi0_mean[sel], run.pi0_se[sel], ref)
    check("9", "d=1 model B pi_0 matches the line's rederived curve within 3 s.e. (t <= 20)", z <= 3, f"max |z| = {z:.2f}")


def test_c9_d2_model_b_exponent():
    fit = fit_decay(balls("d2B"), (10, 100), POWER)
    check("9", "d=2 model B fitted exponent = -1.5 +- 0.2 on [10, 100]", abs(fit.value + 1.5) <= 0.2, f"{fit.value:.3f} +- {fit.stderr:.3f}")


def test_c9_d2_model_a_rate():
    fit = fit_decay(balls("d2A"), (0.5, 2.5), EXPONENTIAL)
    check("9", "d=2 model A fitted rate = pi +- 10%", abs(fit.value / math.pi - 1) <= 0.10, f"{fit.value:.4f} +- {fit.stderr:.4f}")


# ----------------------------------------------------------------------------
# 10. determinism


@pytest.mark.parametrize("criterion", sorted(CRITERION_COMMANDS))
def test_c10_manifest_replay(outdir, criterion):
    same = []
    for argv in CRITERION_COMMANDS[criterion]:
        first = cli_output(outdir, tuple(argv))
        replay = first.with_name(first.stem + ".replay.csv")
        code = cli.run(["--manifest", str(first) + ".manifest.json", "--out", str(replay)])
        same.append(code == 0 and replay.read_bytes() == first.read_bytes())
    check("10", f"criterion {criterion}: {len(same)} output file(s) byte-identical on manifest replay", all(same))


def test_c10_serial_equals_parallel(outdir):
    argv = kinetics_argv(3, "B", CENTRAL)
    serial = cli_output(outdir, tuple(argv + ["--jobs", "1"]))
    parallel = cli_output(outdir, tuple(argv + ["--jobs", "2"]))
    check("10", "serial (--jobs 1) and parallel (--jobs 2) runs write identical files", serial.read_bytes() == parallel.read_bytes())
