import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from domlearn.errors import EmptyTrueDomain, ZeroNorm
from domlearn.lsq import LsSystem
from domlearn.metrics import (
    AggregateRow,
    LevelRecord,
    RunRecord,
    aggregate,
    inv_alpha,
    inv_beta,
    mismatch_volume,
    reciprocal,
    rejection_rate,
    relative_error,
)


def test_error_zero_for_identical_values():
    f = np.array([1.0, -2.0, 3.0])
    w = np.full(3, 1 / 3)
    assert relative_error(f, f, w) == 0.0


def test_error_one_for_zero_approximant():
    f = np.array([1.0, -2.0, 3.0])
    w = np.full(3, 1 / 3)
    assert relative_error(f, np.zeros(3), w) == pytest.approx(1.0, abs=1e-15)


def test_error_hand_computed_case():
    f = np.array([1.0, 2.0])
    g = np.array([1.0, 0.0])
    w = np.array([0.5, 0.5])
    assert relative_error(f, g, w) == pytest.approx(math.sqrt(4 / 5), abs=1e-15)


def test_error_zero_norm_raises():
    with pytest.raises(ZeroNorm):
        relative_error(np.zeros(3), np.ones(3), np.full(3, 1 / 3))


@settings(max_examples=40, deadline=None)
@given(st.floats(min_value=1e-3, max_value=1e3, allow_nan=False))
def test_error_invariant_under_joint_scaling(s):
    rng = np.random.default_rng(5)
    f = rng.standard_normal(20) + 3.0
    g = rng.standard_normal(20)
    w = np.full(20, 1 / 20)
    base = relative_error(f, g, w)
    scaled = relative_error(s * f, s * g, w)
    assert scaled == pytest.approx(base, rel=1e-12)


def test_mismatch_perfect_estimate():
    assert mismatch_volume([1, 2, 3], [1, 2, 3]) == 0.0


def test_mismatch_disjoint_sets():
    assert mismatch_volume([1, 2, 3], [7, 8]) == pytest.approx(5 / 3)


def test_mismatch_hand_case():
    assert mismatch_volume([1, 2, 3, 4], [3, 4, 5]) == pytest.approx(0.75)


def test_mismatch_empty_true_domain():
    with pytest.raises(EmptyTrueDomain):
        mismatch_volume([], [1])


@settings(max_examples=60, deadline=None)
@given(
    st.sets(st.integers(min_value=0, max_value=40), min_size=1),
    st.sets(st.integers(min_value=0, max_value=40), min_size=1),
)
def test_mismatch_symmetric_difference_identity(a, b):
    a, b = sorted(a), sorted(b)
    lhs = mismatch_volume(a, b) * len(a)
    rhs = mismatch_volume(b, a) * len(b)
    assert lhs == pytest.approx(rhs, abs=1e-12)


def test_rejection_rate_basics():
    assert rejection_rate(10, 10) == 0.0
    assert rejection_rate(20, 10) == 0.5
    assert rejection_rate(0, 0) == 0.0
    with pytest.raises(ValueError):
        rejection_rate(5, 6)


def test_reciprocal_sentinel():
    assert reciprocal(0.0) == math.inf
    assert reciprocal(2.0) == 0.5


def test_inv_beta_matches_svd():
    rng = np.random.default_rng(1)
    A = rng.standard_normal((30, 5))
    system = LsSystem(A, np.zeros(30), np.arange(30), np.ones(30))
    sigma = np.linalg.svd(A, compute_uv=False)[-1]
    assert inv_beta(system) == pytest.approx(1 / sigma, rel=1e-12)


def test_inv_alpha_full_grid_unit_weights():
    rng = np.random.default_rng(2)
    q, _ = np.linalg.qr(rng.standard_normal((40, 6)))
    w = np.full(40, 1 / 40)
    phi = q / np.sqrt(w)[:, None]
    assert inv_alpha(phi, np.ones(40)) == pytest.approx(1.0, abs=1e-9)


def make_record(method, trial, values):
    levels = tuple(
        LevelRecord(
            level=i + 1, n_basis=3 * (i + 1), m_samples=6 * (i + 1),
            f_evals=10 * (i + 1) + trial, n_accepted=6 * (i + 1),
            n_rejected=4 * (i + 1) + trial, n_accepted_outside=0,
            err_rel=v, mismatch=v / 2, rejection=v / 4, inv_alpha=v * 2, inv_beta=v * 3,
        )
        for i, v in enumerate(values)
    )
    return RunRecord(method, trial, levels)


def test_aggregate_arithmetic_means():
    recs = [make_record("MC-LS", t, [1.0 + t, 2.0 + t]) for t in range(4)]
    rows = aggregate(recs)
    assert len(rows) == 2
    assert rows[0].err_rel == pytest.approx(np.mean([1, 2, 3, 4]))
    assert rows[1].err_rel == pytest.approx(np.mean([2, 3, 4, 5]))
    assert rows[0].f_evals == pytest.approx(np.mean([10, 11, 12, 13]))
    assert rows[0].trials_ok == 4
    assert isinstance(rows[0], AggregateRow)


def test_aggregate_geometric_option():
    recs = [make_record("MC-LS", t, [2.0 ** t]) for t in range(3)]
    rows = aggregate(recs, geometric=True)
    assert rows[0].err_rel == pytest.approx(2.0)  # gmean of 1, 2, 4


def test_aggregate_empty_and_mismatched():
    assert aggregate([]) == []
    a = make_record("MC-LS", 0, [1.0, 2.0])
    b = make_record("MC-LS", 1, [1.0])
    with pytest.raises(ValueError):
        aggregate([a, b])
