import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rsc.mc import check_seed, kernel_seed, mean_se, run_trials, trial_seed, z_score


@given(st.integers(0, 2**63), st.integers(0, 1000))
def test_seeds_are_stable_and_distinct(seed, trial):
    assert trial_seed(seed, trial) == trial_seed(seed, trial)
    assert trial_seed(seed, trial) != trial_seed(seed, trial + 1)
    assert 0 <= kernel_seed(seed, trial) < 2**32


def test_check_seed():
    with pytest.raises(ValueError):
        check_seed(-1)
    assert check_seed(5) == 5


def test_run_trials_order_independent():
    fn = lambda i: (i, kernel_seed(7, i))  # noqa: E731
    assert run_trials(fn, 9, jobs=1) == run_trials(fn, 9, jobs=3)


def test_mean_se():
    m, se = mean_se([[1.0, 2.0], [3.0, 6.0]], axis=0)
    assert np.allclose(m, [2.0, 4.0])
    assert np.allclose(se, [1.0, 2.0])
    assert np.isnan(mean_se([[1.0, 2.0]])[1]).all()


def test_z_score():
    assert np.allclose(z_score([1.0, 2.0], [0.5, 0.0], [0.0, 2.0]), [2.0, 0.0])
    assert np.isinf(z_score([1.0], [0.0], [0.0])).all()
