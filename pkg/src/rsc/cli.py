"""Command-line front end: ``rsc <subcommand> [flags]``.

Every run produces a :class:`ResultTable`.  With ``--out FILE`` the table is
written as CSV (or JSON for ``.json`` paths / ``--json``) together with
``FILE.manifest.json``, which ``rsc --manifest FILE.manifest.json`` replays.
Numeric outputs depend only on the manifest, so replays are byte-identical.

Exit codes: 0 success, 2 unknown subcommand, 3 invalid flags or parameters,
4 unwritable output path.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import hashlib
import io
import json
import math
import os
import shlex
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from . import __version__
from .analytic import (
    cumulant_gen,
    cumulant_series,
    dimer_min_cover_asymptotic,
    fano_factors,
    mandel_q,
    min_cover_series,
    u_large_ell,
    u_of_ell,
)
from .balls import EXPONENTIAL, POWER, StatisticalFloorError, TorusSpec, ball_volume, fit_decay, simulate_balls
from .cover import B_RULES, OVERLAP, RING, ProcessSpec, run_to_congestion
from .exact import (
    config_count,
    count_distribution,
    max_cover_prob,
    mean_deposits,
    overhang_probs,
    ring_mean,
)
from .kinetics import NoClosedForm, analytic_empty_strings, analytic_pi, analytic_voids, simulate_kinetics
from .line import REDERIVED, STATED, analytic_line, simulate_line
from .mc import default_jobs, trial_seed

SCHEMA_VERSION = 1
EXIT_OK = 0
EXIT_UNKNOWN_SUBCOMMAND = 2
EXIT_BAD_FLAGS = 3
EXIT_UNWRITABLE = 4
SEED_ENV = "RSC_SEED"

FIGURES = {
    "fig-U": "cumulant generating function U(lambda) of dimer coverings",
    "fig-u28": "tail base u(l) of the minimal-cover probability, l in [2, 8]",
    "fig-p-dimer": "pi_0, pi_1, pi_2 for dimers",
    "fig-p0123-3": "pi_0..pi_3 for trimers, model A (pi_1..pi_3 conjectural)",
    "fig-p012-3": "pi_0, pi_1, pi_2 for trimers, model B",
    "fig-p012-4": "pi_0, pi_1, pi_2 for 4-mers, model B",
    "fig-p012-5": "pi_0, pi_1, pi_2 for 5-mers, model B",
    "fig-p12-cont": "pi_0, pi_1, pi_2 on the line, model B (stated and rederived curves)",
}


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


# ----------------------------------------------------------------------------
# tables and serialisation


def format_value(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, ".17g")
    return str(v)


def _json_value(v: Any):
    if v is None or isinstance(v, (bool, str)):
        return v
    if isinstance(v, Fraction):
        return format_value(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else format_value(v)
    return str(v)


@dataclass
class ResultTable:
    columns: list[str]
    rows: list[list[Any]]
    legend: dict[str, str] = field(default_factory=dict)
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        for r in self.rows:
            if len(r) != len(self.columns):
                raise ValueError(f"row has {len(r)} values for {len(self.columns)} columns")

    def column(self, name: str) -> list[Any]:
        i = self.columns.index(name)
        return [r[i] for r in self.rows]

    def to_csv(self, header: dict[str, str]) -> str:
        buf = io.StringIO()
        for k, v in header.items():
            buf.write(f"# {k}: {v}\n")
        for k, v in self.meta.items():
            buf.write(f"# {k}: {format_value(v)}\n")
        if self.legend:
            buf.write("# columns: " + "; ".join(f"{c} = {self.legend[c]}" for c in self.columns if c in self.legend) + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        w.writerows([format_value(v) for v in r] for r in self.rows)
        return buf.getvalue()

    def to_json(self, header: dict[str, str]) -> str:
        doc = {
            "schema_version": SCHEMA_VERSION,
            **{k: v for k, v in header.items() if k != "schema_version"},
            "meta": {k: _json_value(v) for k, v in self.meta.items()},
            "legend": self.legend,
            "columns": self.columns,
            "rows": [[_json_value(v) for v in r] for r in self.rows],
        }
        return json.dumps(doc, indent=1, sort_keys=False) + "\n"


# ----------------------------------------------------------------------------
# manifests


@dataclass
class ExperimentManifest:
    experiment_id: str
    module: str
    operation: str
    parameters: dict[str, Any]
    seeds: dict[str, Any]
    outputs: list[str]
    tool_version: str = __version__
    timestamp: str = ""
    schema_version: int = SCHEMA_VERSION

    def content_hash(self) -> str:
        """Hash over everything that determines the numbers (not paths or time)."""
        core = {
            "module": self.module,
            "operation": self.operation,
            "parameters": self.parameters,
            "seeds": self.seeds,
            "tool_version": self.tool_version,
        }
        blob = json.dumps(core, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def to_json(self) -> str:
        doc = dict(self.__dict__)
        doc["manifest_sha256"] = self.content_hash()
        return json.dumps(doc, indent=1, sort_keys=True) + "\n"

    @classmethod
    def from_file(cls, path: str | Path) -> "ExperimentManifest":
        doc = json.loads(Path(path).read_text())
        doc.pop("manifest_sha256", None)
        return cls(**doc)


# ----------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        code = EXIT_BAD_FLAGS
        if "invalid choice" in message and "argument command" in message:
            code = EXIT_UNKNOWN_SUBCOMMAND
        raise CliError(f"{self.prog}: error: {message}", code)


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _window(text: str) -> tuple[float, float]:
    vals = _float_list(text)
    if len(vals) != 2:
        raise argparse.ArgumentTypeError("window must be 'lo,hi'")
    return vals[0], vals[1]


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from exc
    if v < 1:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return v


def _add_common(p: argparse.ArgumentParser, seeded: bool = False) -> None:
    p.add_argument("--out", help="output file (CSV, or JSON for .json); a manifest is written alongside")
    p.add_argument("--json", action="store_true", help="emit JSON instead of CSV")
    if seeded:
        p.add_argument("--seed", type=int, default=0, help=f"master seed (overridden by ${SEED_ENV})")
        p.add_argument("--trials", type=_positive_int, default=20)
        p.add_argument("--jobs", type=_positive_int, default=None, help="worker threads (default: all cores)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rsc", description="Random sequential covering: exact results and simulations.")
    parser.add_argument("--version", action="version", version=f"rsc {__version__}")
    parser.add_argument("--manifest", help="replay a manifest written by an earlier run")
    parser.add_argument("--out", dest="out_override", help="with --manifest: write the replay here instead")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("exact", help="average deposit counts, boundary probabilities, configuration counts")
    p.add_argument("--L", type=_positive_int, required=True)
    p.add_argument("--ell", type=int, default=2)
    _add_common(p)

    p = sub.add_parser("distribution", help="exact distribution P(N, L), optionally against Monte Carlo")
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--ell", type=int, default=2)
    p.add_argument("--mc-trials", dest="mc_trials", type=int, default=0, help="simulated intervals (0: exact only)")
    p.add_argument("--seed", type=int, default=0, help=f"master seed (overridden by ${SEED_ENV})")
    _add_common(p)

    p = sub.add_parser("cumulants", help="dimer cumulants U_n, Fano factors and Mandel Q")
    p.add_argument("--order", type=_positive_int, default=8)
    _add_common(p)

    p = sub.add_parser("extremal", help="minimal and maximal cover probabilities, u(l)")
    p.add_argument("--ell", type=int, default=2)
    p.add_argument("--n-max", dest="n_max", type=_positive_int, default=10)
    _add_common(p)

    p = sub.add_parser("kinetics", help="lattice kinetics on a large ring against closed forms")
    p.add_argument("--ell", type=int, default=2)
    p.add_argument("--model", choices=("A", "B"), default="A")
    p.add_argument("--rule", choices=B_RULES, default=OVERLAP, help="model B acceptance rule")
    p.add_argument("--L", type=int, default=100_000)
    p.add_argument("--t-grid", dest="t_grid", type=_float_list, default=[0.25, 0.5, 1.0, 2.0, 4.0, math.inf])
    p.add_argument("--m-max", dest="m_max", type=_positive_int, default=3, help="E_m, V_m columns for m <= m_max")
    _add_common(p, seeded=True)

    p = sub.add_parser("line", help="continuum line covering against closed forms")
    p.add_argument("--model", choices=("A", "B"), default="A")
    p.add_argument("--Lam", type=float, default=1e4)
    p.add_argument("--t-grid", dest="t_grid", type=_float_list, default=None)
    p.add_argument("--k-out", dest="k_out", type=_positive_int, default=4, help="pi_k columns for k < k_out")
    _add_common(p, seeded=True)

    p = sub.add_parser("balls", help="covering a torus by balls; pi_0(t) and a decay fit")
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--side", type=float, default=100.0)
    p.add_argument("--h", type=float, default=1 / 32, help="grid spacing")
    p.add_argument("--model", choices=("A", "B"), default="B")
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--t-max", dest="t_max", type=float, default=100.0)
    p.add_argument("--t-grid", dest="t_grid", type=_float_list, default=None)
    p.add_argument("--window", type=_window, default=None)
    p.add_argument("--law", choices=(POWER, EXPONENTIAL), default=None)
    _add_common(p, seeded=True)
    p.set_defaults(trials=4)

    p = sub.add_parser("reproduce", help="plot-ready data behind a figure")
    p.add_argument("figure", choices=sorted(FIGURES))
    p.add_argument("--points", type=_positive_int, default=201)
    _add_common(p)
    return parser


# ----------------------------------------------------------------------------
# subcommands


def _exact(a) -> ResultTable:
    L, ell = a.L, a.ell
    rows: list[list[Any]] = [["D_L", mean_deposits(L, ell), "mean deposits on an interval"]]
    if ell == 2:
        p, q = overhang_probs(L)
        rows += [
            ["p_L", p, "no overhang on the left"],
            ["q_L", q, "no overhang at either end"],
            ["C_L", config_count(L), "distinct congested configurations, 2 F_{L+1}"],
        ]
    if L >= ell + 1:
        rows.append(["N_ring", ring_mean(L, ell), "mean deposits on a ring of L sites"])
    return ResultTable(["quantity", "value", "description"], rows, meta={"L": L, "ell": ell})


def _distribution(a) -> ResultTable:
    poly = count_distribution(a.L, a.ell)
    if a.mc_trials < 0:
        raise ValueError("--mc-trials must be >= 0")
    legend = {"N": "deposits at congestion", "P": "exact probability"}
    meta: dict[str, Any] = {"L": a.L, "ell": a.ell, "mean": poly.mean()}
    if not a.mc_trials:
        rows = [[n, c] for n, c in enumerate(poly.coefficients) if c]
        return ResultTable(["N", "P"], rows, legend=legend, meta=meta)
    sp = ProcessSpec(a.ell, a.L)
    counts = np.bincount(
        [run_to_congestion(sp, trial_seed(a.seed, i)).n_deposits for i in range(a.mc_trials)],
        minlength=len(poly.coefficients),
    )
    n = a.mc_trials
    rows = []
    for k, c in enumerate(poly.coefficients):
        if c or counts[k]:
            f = counts[k] / n
            rows.append([k, c, f, math.sqrt(max(f * (1 - f), 1.0 / n) / n)])
    legend.update({"P_mc": "simulated frequency", "P_mc_se": "binomial s.e. (floored at one count)"})
    meta["mc_trials"] = n
    return ResultTable(["N", "P", "P_mc", "P_mc_se"], rows, legend=legend, meta=meta)


def _cumulants(a) -> ResultTable:
    U = cumulant_series(a.order)
    fano = [Fraction(1)] + (fano_factors(a.order) if a.order >= 2 else [])
    rows = [[n, U[n - 1], fano[n - 1]] for n in range(1, a.order + 1)]
    return ResultTable(
        ["n", "U_n", "fano_n"],
        rows,
        legend={"U_n": "lim <N^n>_c / L", "fano_n": "<N^n>_c / <N>"},
        meta={"Q": mandel_q()},
    )


def _extremal(a) -> ResultTable:
    ell = a.ell
    m = min_cover_series(ell, a.n_max)
    rows = []
    for n in range(1, a.n_max + 1):
        L = n * ell
        ratio = float(m[n]) / dimer_min_cover_asymptotic(n) if ell == 2 else None
        rows.append([n, L, m[n], max_cover_prob(L, ell), ratio])
    return ResultTable(
        ["n", "L", "m_n", "M_L", "m_n_over_asymptotic"],
        rows,
        legend={
            "m_n": "P(minimal cover) for L = n l",
            "M_L": "P(maximal cover)",
            "m_n_over_asymptotic": "m_n / [2 (2/pi)^(2n+2)] (dimers)",
        },
        meta={"ell": ell, "u": u_of_ell(ell), "u_large_ell_form": u_large_ell(ell)},
    )


def _opt_ref(fn: Callable[[], float]) -> float | None:
    try:
        return fn()
    except NoClosedForm:
        return None


def _kinetics(a) -> ResultTable:
    spec = ProcessSpec(a.ell, a.L, RING, a.model, a.rule)
    run = simulate_kinetics(spec, a.t_grid, n_trials=a.trials, seed=a.seed, m_max=max(a.m_max, 1), jobs=a.jobs)
    cols, legend = ["t"], {"t": "time"}
    for k in range(a.ell + 1):
        cols += [f"pi{k}", f"pi{k}_se", f"pi{k}_ref"]
        legend[f"pi{k}"] = f"fraction covered {k} times"
    cols += ["M", "M_se", "M_ref"]
    legend["M"] = "sum (k-1) pi_k"
    for m in range(1, a.m_max + 1):
        cols += [f"E{m}", f"E{m}_se", f"E{m}_ref", f"V{m}", f"V{m}_se", f"V{m}_ref"]
    legend["E1"] = "empty strings of length m"
    legend["V1"] = "voids of length m"
    legend["pi0_ref"] = "closed form (blank when none exists)"
    # references follow the closed forms, which describe model B under the central rule
    rows = []
    for i, t in enumerate(run.t_grid):
        ref = _opt_ref(lambda: analytic_pi(a.ell, a.model, t))
        row: list[Any] = [t]
        for k in range(a.ell + 1):
            r = _opt_ref(lambda: ref.component(k)) if ref is not None else None
            row += [run.pi_mean[i, k], run.pi_se[i, k], r]
        row += [run.M_mean[i], run.M_se[i], ref.M if ref is not None else None]
        for m in range(1, a.m_max + 1):
            e_ref = _opt_ref(lambda: analytic_empty_strings(a.ell, a.model, m, t))
            v_ref = _opt_ref(lambda: analytic_voids(a.ell, a.model, m, t))
            row += [run.E_mean[i, m - 1], run.E_se[i, m - 1], e_ref, run.V_mean[i, m - 1], run.V_se[i, m - 1], v_ref]
        rows.append(row)
    meta = {
        "ell": a.ell,
        "model": a.model,
        "model_b_rule": a.rule if a.model == "B" else "n/a",
        "L": a.L,
        "trials": a.trials,
        "conjectural_columns": ",".join(f"{c}_ref" for c in ("pi1", "pi2", "pi3")) if run.conjectural else "none",
        "max_multiplicity": run.max_multiplicity,
    }
    return ResultTable(cols, rows, legend=legend, meta=meta)


def _line(a) -> ResultTable:
    grid = a.t_grid
    if grid is None:
        grid = [0.5, 1.0, 2.0, 5.0, 10.0, 20.0] + ([math.inf] if a.model == "A" else [50.0, 100.0, 1e4])
    run = simulate_line(a.model, a.Lam, grid, n_trials=a.trials, seed=a.seed, jobs=a.jobs)
    cols = ["t"]
    for k in range(a.k_out):
        cols += [f"pi{k}", f"pi{k}_se"]
    cols += ["M", "M_se"]
    if a.model == "A":
        cols += ["pi0_ref", "M_ref_stated", "M_ref_rederived"]
    else:
        cols += ["pi0_ref_stated", "pi2_ref_stated", "pi0_ref_rederived", "pi2_ref_rederived"]
    rows = []
    for i, t in enumerate(run.t_grid):
        row: list[Any] = [t]
        for k in range(a.k_out):
            row += [run.pi_mean[i, k], run.pi_se[i, k]]
        row += [run.M_mean[i], run.M_se[i]]
        if a.model == "A":
            ref = analytic_line("A", t)
            rederived = 1.0 - (1.0 + t) * math.exp(-t) if math.isfinite(t) else 1.0
            row += [ref.pi0, ref.M, rederived]
        else:
            s_ref, r_ref = analytic_line("B", t, STATED), analytic_line("B", t, REDERIVED)
            row += [s_ref.pi0, s_ref.pi2, r_ref.pi0, r_ref.pi2]
        rows.append(row)
    legend = {
        "pi0": "uncovered fraction",
        "M": "sum (k-1) pi_k = total stick length / Lambda - covered fraction",
    }
    meta = {"model": a.model, "Lambda": a.Lam, "trials": a.trials, "max_multiplicity": run.max_multiplicity}
    return ResultTable(cols, rows, legend=legend, meta=meta)


def _balls(a) -> ResultTable:
    spec = TorusSpec(a.d, a.side, a.h, a.model, a.radius)
    run = simulate_balls(spec, a.t_max, seed=a.seed, t_grid=a.t_grid, n_trials=a.trials, jobs=a.jobs)
    vol = ball_volume(spec.d, spec.radius)
    rows = []
    for i, t in enumerate(run.t_grid):
        ref = math.exp(-vol * t) if spec.model == "A" else None
        rows.append([t, run.pi0_mean[i], run.pi0_se[i], run.grid_bias_bound[i], ref])
    meta: dict[str, Any] = {
        "d": spec.d,
        "side": spec.side,
        "h": spec.h,
        "model": spec.model,
        "radius": spec.radius,
        "trials": a.trials,
        "grid_points": spec.n_points,
    }
    law = a.law or (EXPONENTIAL if spec.model == "A" else POWER)
    window = a.window
    if window is None:
        window = (0.5, min(2.5, a.t_max)) if law == EXPONENTIAL else (min(10.0, a.t_max / 2), a.t_max)
    try:
        fit = fit_decay(run, window, law)
        meta.update(
            {
                "fit_law": fit.law,
                "fit_window": f"{fit.window[0]:.17g}..{fit.window[1]:.17g}",
                "fit_value": fit.value,
                "fit_stderr": fit.stderr,
                "fit_residual_rms": fit.residual_rms,
            }
        )
        if law == EXPONENTIAL:
            meta["expected_rate"] = vol
        else:
            meta["expected_exponent"] = -1.0 - 1.0 / spec.d
    except (StatisticalFloorError, ValueError) as exc:
        meta["fit_error"] = str(exc)
    return ResultTable(
        ["t", "pi0", "pi0_se", "grid_bias_bound", "pi0_ref"],
        rows,
        legend={"pi0": "uncovered grid fraction", "pi0_ref": "e^{-V_d t} (model A)"},
        meta=meta,
    )


def _reproduce(a) -> ResultTable:
    fig, n = a.figure, a.points
    meta = {"figure": fig, "description": FIGURES[fig]}
    if fig == "fig-U":
        lam = np.linspace(-5.0, 5.0, n)
        return ResultTable(["lambda", "U"], [[x, cumulant_gen(x)] for x in lam], meta=meta)
    if fig == "fig-u28":
        ells = np.linspace(2.0, 8.0, n)
        return ResultTable(["ell", "u"], [[x, u_of_ell(x)] for x in ells], meta=meta)
    t_max = 100.0 if fig == "fig-p12-cont" else 4.0
    ts = np.linspace(0.0, t_max, n)
    if fig == "fig-p12-cont":
        rows = []
        for t in ts:
            s, r = analytic_line("B", t, STATED), analytic_line("B", t, REDERIVED)
            rows.append([t, s.pi0, s.pi1, s.pi2, r.pi0, r.pi1, r.pi2])
        cols = ["t", "pi0_stated", "pi1_stated", "pi2_stated", "pi0_rederived", "pi1_rederived", "pi2_rederived"]
        return ResultTable(cols, rows, meta=meta)
    ell, model = {
        "fig-p-dimer": (2, "A"),
        "fig-p0123-3": (3, "A"),
        "fig-p012-3": (3, "B"),
        "fig-p012-4": (4, "B"),
        "fig-p012-5": (5, "B"),
    }[fig]
    kmax = 3 if fig == "fig-p0123-3" else 2
    rows = [[t, *analytic_pi(ell, model, t).pi[: kmax + 1]] for t in ts]
    if fig == "fig-p0123-3":
        meta["conjectural_columns"] = "pi1,pi2,pi3"
    return ResultTable(["t"] + [f"pi{k}" for k in range(kmax + 1)], rows, meta=meta)


COMMANDS: dict[str, tuple[str, str, Callable]] = {
    "exact": ("exact", "exact_summary", _exact),
    "distribution": ("exact", "count_distribution", _distribution),
    "cumulants": ("analytic", "cumulant_series", _cumulants),
    "extremal": ("analytic", "extremal_probs", _extremal),
    "kinetics": ("kinetics", "simulate_kinetics", _kinetics),
    "line": ("line", "simulate_line", _line),
    "balls": ("balls", "simulate_balls", _balls),
    "reproduce": ("cli", "reproduce", _reproduce),
}

_NON_PARAMS = {"command", "out", "json", "jobs", "manifest", "out_override"}


def _parameters(args) -> dict[str, Any]:
    params = {}
    for k, v in sorted(vars(args).items()):
        if k in _NON_PARAMS or k == "seed":
            continue
        if isinstance(v, float) and not math.isfinite(v):
            v = format_value(v)
        elif isinstance(v, (list, tuple)):
            v = [format_value(x) if isinstance(x, float) and not math.isfinite(x) else x for x in v]
        params[k] = v
    return params


def _argv_from_manifest(m: ExperimentManifest) -> list[str]:
    argv = [m.parameters["command"]]
    positional = {"figure"}
    for k, v in m.parameters.items():
        if k in ("command", "as_json") or v is None or k in positional:
            continue
        flag = "--" + k.replace("_", "-") if k not in ("L", "Lam") else "--" + k
        if k in ("t_grid",):
            argv += [flag, ",".join(str(x) for x in v)]
        elif k == "window":
            argv += [flag, f"{v[0]},{v[1]}"]
        else:
            argv += [flag, str(v)]
    if "figure" in m.parameters:
        argv.insert(1, m.parameters["figure"])
    if "master" in m.seeds:
        argv += ["--seed", str(m.seeds["master"])]
    if m.parameters.get("as_json"):
        argv.append("--json")
    return argv


def _write(path: str, text: str) -> None:
    try:
        p = Path(path)
        with open(p, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc}", EXIT_UNWRITABLE) from exc


def _check_writable(path: str) -> None:
    parent = Path(path).resolve().parent
    if not parent.is_dir() or not os.access(parent, os.W_OK) or (Path(path).exists() and not os.access(path, os.W_OK)):
        raise CliError(f"cannot write {path}", EXIT_UNWRITABLE)


def run(argv: Sequence[str] | None = None, stdout=None) -> int:
    """Entry point returning the exit code instead of exiting."""
    stdout = sys.stdout if stdout is None else stdout
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.manifest:
            try:
                manifest = ExperimentManifest.from_file(args.manifest)
            except (OSError, ValueError, TypeError) as exc:
                raise CliError(f"cannot read manifest {args.manifest}: {exc}", EXIT_BAD_FLAGS) from exc
            replay = _argv_from_manifest(manifest)
            out = args.out_override or (manifest.outputs[0] if manifest.outputs else None)
            if out:
                replay += ["--out", out]
            args = parser.parse_args(replay)
        if not args.command:
            raise CliError("rsc: error: a subcommand is required", EXIT_UNKNOWN_SUBCOMMAND)
        module, operation, fn = COMMANDS[args.command]
        seeds: dict[str, Any] = {}
        if hasattr(args, "seed"):
            n_trials = getattr(args, "trials", getattr(args, "mc_trials", 0))
            env = os.environ.get(SEED_ENV)
            if env is not None:
                try:
                    args.seed = int(env)
                except ValueError as exc:
                    raise CliError(f"{SEED_ENV} must be an integer", EXIT_BAD_FLAGS) from exc
            if getattr(args, "jobs", 1) is None:
                args.jobs = default_jobs()
            seeds = {"master": args.seed, "trials": n_trials, "derivation": "SeedSequence(master, spawn_key=(trial,))"}
        if args.out:
            _check_writable(args.out)
            _check_writable(args.out + ".manifest.json")
        as_json = bool(args.json or (args.out and args.out.endswith(".json")))
        try:
            table = fn(args)
        except (ValueError, NoClosedForm) as exc:
            raise CliError(f"rsc {args.command}: {exc}", EXIT_BAD_FLAGS) from exc
        params = _parameters(args)
        params["command"] = args.command
        params["as_json"] = as_json
        manifest = ExperimentManifest(
            experiment_id=f"{args.command}-{{}}",
            module=module,
            operation=operation,
            parameters=params,
            seeds=seeds,
            outputs=[args.out] if args.out else [],
        )
        digest = manifest.content_hash()
        manifest.experiment_id = f"{args.command}-{digest[:12]}"
        header = {
            "tool": f"rsc {__version__}",
            "experiment": manifest.experiment_id,
            "manifest_sha256": digest,
            "schema_version": str(SCHEMA_VERSION),
            "command": "rsc " + " ".join(shlex.quote(x) for x in _argv_from_manifest(manifest)),
        }
        if seeds:
            header["seeds"] = f"master={seeds['master']} trials={seeds['trials']} ({seeds['derivation']})"
        text = table.to_json(header) if as_json else table.to_csv(header)
        if args.out:
            _write(args.out, text)
            manifest.timestamp = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
            _write(args.out + ".manifest.json", manifest.to_json())
        else:
            stdout.write(text)
        return EXIT_OK
    except CliError as exc:
        print(str(exc), file=sys.stderr)
        return exc.code


def main(argv: Sequence[str] | None = None) -> None:
    sys.exit(run(argv))
