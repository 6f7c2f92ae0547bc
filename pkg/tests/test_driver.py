import math

import numpy as np
import pytest

from domlearn.blackbox import Indicator, Problem, indicator_for, make_problem, eval_test_function_batch
from domlearn.driver import (
    METHODS,
    MethodConfig,
    SamplingState,
    SimulationTruth,
    rejection_sample,
    run,
    truth_from_values,
    update_domain,
)
from domlearn.errors import EmptyEstimate, RankDeficient, RedrawLimit
from domlearn.grid import Grid, build_grid
from domlearn.measures import build_schedule, cumulative
from domlearn.polyspace import eval_basis, hyperbolic_cross


def synthetic_problem(fn, indicator, dim=1):
    return Problem(lambda y: fn(np.atleast_1d(y)), indicator, dim)


def line_grid(k):
    # Symmetric 1-D grid without zero: exactly half the points are >= 0.
    pts = np.linspace(-1, 1, k).reshape(-1, 1)
    return Grid(1, pts, np.full(k, 1.0 / k))


# --------------------------------------------------------- rejection_sample

def test_rejection_accepts_immediately_when_domain_is_everything():
    g = line_grid(10)
    p = synthetic_problem(lambda y: 2.0 + y[0], Indicator(0.0, math.inf))
    cum = cumulative(g.weights)
    res = rejection_sample(cum, np.arange(10), g, p, "standard", np.random.default_rng(0))
    assert res.evals == 1 and res.inside and not res.rejected
    assert p.evals == 1


def test_rejection_geometric_law_on_half_domain():
    g = line_grid(1000)  # even count, no zero point: exactly half accepted
    p = synthetic_problem(lambda y: y[0], Indicator(0.0, math.inf))
    cum = cumulative(g.weights)
    rng = np.random.default_rng(42)
    total = 0
    slots = 10_000
    for _ in range(slots):
        res = rejection_sample(cum, np.arange(1000), g, p, "standard", rng)
        total += res.evals
    mean = total / slots
    assert abs(mean - 2.0) / 2.0 < 0.05


def test_rejection_augmented_keeps_finite_outside_values():
    g = line_grid(10)
    p = synthetic_problem(lambda y: y[0], Indicator(0.0, math.inf))
    rng = np.random.default_rng(3)
    seen_outside = False
    for _ in range(50):
        res = rejection_sample(cumulative(g.weights), np.arange(10), g, p, "augmented", rng)
        assert res.evals == 1  # finite everywhere, so never redraws
        assert not res.rejected
        seen_outside = seen_outside or not res.inside
    assert seen_outside


def test_rejection_augmented_redraws_only_on_undefined():
    g = line_grid(100)

    def oracle(y):
        return math.inf if y[0] < -0.5 else y[0]

    p = synthetic_problem(oracle, Indicator(0.0, math.inf))
    rng = np.random.default_rng(4)
    n_rejected = 0
    for _ in range(200):
        res = rejection_sample(cumulative(g.weights), np.arange(100), g, p, "augmented", rng)
        assert math.isfinite(res.value)
        for _, v in res.rejected:
            assert v == math.inf
        n_rejected += len(res.rejected)
    assert p.evals == 200 + n_rejected
    assert n_rejected > 0


def test_rejection_redraw_limit():
    g = line_grid(10)
    p = synthetic_problem(lambda y: -1.0, Indicator(0.0, math.inf))
    with pytest.raises(RedrawLimit):
        rejection_sample(
            cumulative(g.weights), np.arange(10), g, p, "standard",
            np.random.default_rng(5), max_redraws=25,
        )
    assert p.evals == 25


def test_rejection_known_mode_accepts_first_draw():
    g = line_grid(10)
    p = synthetic_problem(lambda y: -5.0, Indicator(0.0, math.inf))
    res = rejection_sample(
        cumulative(g.weights), np.arange(10), g, p, "known", np.random.default_rng(6)
    )
    assert res.evals == 1 and res.inside


# ------------------------------------------------------------ update_domain

def test_update_keeps_everything_when_surrogate_passes():
    g = line_grid(8)
    state = SamplingState()
    active = update_domain(g, np.ones(8), Indicator(0.0, math.inf), state, "standard")
    assert active.tolist() == list(range(8))


def test_update_keeps_sample_the_surrogate_misclassifies():
    g = line_grid(8)
    state = SamplingState(accepted=[(3, 1.0)])
    vals = -np.ones(8)  # surrogate says everything is outside
    active = update_domain(g, vals, Indicator(0.0, math.inf), state, "standard")
    assert active.tolist() == [3]


def test_update_removes_rejected_even_if_surrogate_accepts():
    g = line_grid(8)
    state = SamplingState(rejected=[(2, math.inf)])
    active = update_domain(g, np.ones(8), Indicator(0.0, math.inf), state, "standard")
    assert 2 not in active.tolist()


def test_update_augmented_removes_accepted_outside():
    g = line_grid(8)
    state = SamplingState(accepted=[(1, 1.0)], accepted_outside=[(5, -3.0)], rejected=[(6, math.inf)])
    active = update_domain(g, np.ones(8), Indicator(0.0, math.inf), state, "augmented")
    assert 5 not in active.tolist() and 6 not in active.tolist() and 1 in active.tolist()


def test_update_empty_estimate_raises():
    g = line_grid(4)
    state = SamplingState(accepted_outside=[(i, -1.0) for i in range(4)])
    with pytest.raises(EmptyEstimate):
        update_domain(g, -np.ones(4), Indicator(0.0, math.inf), state, "augmented")


# -------------------------------------------------------------------- run

def small_setup(fid=1, dim=2, k=500, orders=(2, 3, 4), seed=17):
    grid = build_grid(dim, k, seed)
    sizes = tuple(len(hyperbolic_cross(dim, o)) for o in orders)
    schedule = build_schedule(sizes)
    truth = truth_from_values(eval_test_function_batch(fid, grid.points), indicator_for(fid))
    return grid, schedule, orders, truth


def fresh_config(method, grid, schedule, orders, fid=1, dim=2, **kw):
    return MethodConfig(method, schedule, orders, make_problem(fid, dim), grid, **kw)


@pytest.mark.parametrize("method", METHODS)
def test_bookkeeping_conservation_and_monotonicity(method):
    grid, schedule, orders, truth = small_setup()
    rec = run(fresh_config(method, grid, schedule, orders), 123, truth=truth)
    assert len(rec.levels) == schedule.n_levels
    prev_f = prev_acc = 0
    for lev in rec.levels:
        assert lev.f_evals == lev.n_accepted + lev.n_rejected + lev.n_accepted_outside
        assert lev.f_evals >= prev_f
        assert lev.n_accepted >= prev_acc
        assert 0.0 <= lev.rejection < 1.0
        prev_f, prev_acc = lev.f_evals, lev.n_accepted
    if method == "ASGD-LS":
        for lev in rec.levels:
            assert lev.f_evals == lev.m_samples  # known domain never rejects
            assert lev.mismatch == 0.0
    if method in ("MC-LS", "ASUD-LS"):
        for lev in rec.levels:
            assert lev.n_accepted == lev.m_samples
    if method == "ASUD-ALS":
        for lev in rec.levels:
            assert lev.n_accepted + lev.n_accepted_outside == lev.m_samples


@pytest.mark.parametrize("method", METHODS)
def test_rerun_is_bit_identical(method):
    grid, schedule, orders, truth = small_setup()
    seed = np.random.SeedSequence(7, spawn_key=(1, 0))
    a = run(fresh_config(method, grid, schedule, orders), seed, truth=truth)
    b = run(fresh_config(method, grid, schedule, orders), seed, truth=truth)
    assert a == b
    c = run(fresh_config(method, grid, schedule, orders), np.random.SeedSequence(8), truth=truth)
    assert c != a


def test_known_domain_recovers_polynomial_exactly():
    # Oracle is an element of the first-level space; with the domain known,
    # the first fit already reproduces it to machine precision.
    grid, schedule, orders, truth = small_setup()
    iset = hyperbolic_cross(2, orders[0])
    rng = np.random.default_rng(11)
    coeffs = rng.standard_normal(len(iset))

    def poly(y):
        return float(eval_basis(iset, np.atleast_2d(y)).values[0] @ coeffs)

    problem = Problem(poly, indicator_for(1), 2)
    poly_truth = SimulationTruth(
        truth.omega_active,
        eval_basis(iset, grid.points[truth.omega_active]).values @ coeffs,
    )
    config = MethodConfig("ASGD-LS", schedule, orders, problem, grid)
    rec = run(config, 99, truth=poly_truth)
    assert rec.levels[0].err_rel <= 1e-10
    for lev in rec.levels:
        assert lev.f_evals == lev.m_samples


def test_adaptive_first_level_matches_known_domain_when_domain_is_everything():
    # With the domain of interest equal to the whole box, the adaptive method
    # and the known-domain method consume randomness identically at level 1.
    grid = build_grid(2, 300, 23)
    orders = (2,)
    schedule = build_schedule([len(hyperbolic_cross(2, 2))])

    def offset(y):
        return 2.0 + y[0]

    ind = Indicator(0.0, math.inf)
    vals = 2.0 + grid.points[:, 0]
    truth = truth_from_values(vals, ind)
    assert truth.omega_active.size == grid.size

    seed = np.random.SeedSequence(3)
    rec_known = run(
        MethodConfig("ASGD-LS", schedule, orders, Problem(offset, ind, 2), grid),
        seed, truth=truth,
    )
    rec_adapt = run(
        MethodConfig("ASUD-LS", schedule, orders, Problem(offset, ind, 2), grid),
        seed, truth=truth,
    )
    assert rec_known.levels[0].f_evals == rec_adapt.levels[0].f_evals
    assert rec_known.levels[0].err_rel == pytest.approx(rec_adapt.levels[0].err_rel, rel=1e-9)


def test_hierarchical_sampling_recycles_earlier_draws():
    grid, schedule, orders, truth = small_setup()
    seen = []

    def hook(ctx):
        seen.append(list(ctx.state.accepted))

    run(fresh_config("ASUD-LS", grid, schedule, orders), 5, truth=truth, level_hook=hook)
    for earlier, later in zip(seen, seen[1:]):
        assert later[: len(earlier)] == earlier  # strictly appended
    for lev_idx, acc in enumerate(seen):
        assert len(acc) == schedule.counts[lev_idx]


def test_augmented_run_on_smooth_function_rejects_nothing():
    grid, schedule, orders, truth = small_setup(fid=4)
    rec = run(fresh_config("ASUD-ALS", grid, schedule, orders, fid=4), 31, truth=truth)
    for lev in rec.levels:
        assert lev.n_rejected == 0  # the function is finite everywhere
        assert lev.rejection == 0.0


def test_rank_deficient_level_reports_partial_results():
    grid = build_grid(2, 6, 2)
    orders = (1, 2, 3)
    sizes = tuple(len(hyperbolic_cross(2, o)) for o in orders)  # (3, 5, 8)
    schedule = build_schedule(sizes)

    def positive(y):
        return 1.0

    config = MethodConfig("ASUD-LS", schedule, orders, Problem(positive, Indicator(0.0, math.inf), 2), grid)
    with pytest.raises(RankDeficient) as exc_info:
        run(config, 1)
    assert exc_info.value.level == 3
    assert len(exc_info.value.partial_record.levels) == 2


def test_redraw_limit_aborts_with_level_context():
    grid = build_grid(2, 50, 4)
    orders = (1,)
    schedule = build_schedule([3])

    def negative(y):
        return -1.0

    config = MethodConfig(
        "ASUD-LS", schedule, orders, Problem(negative, Indicator(0.0, math.inf), 2),
        grid, max_redraws=20,
    )
    with pytest.raises(RedrawLimit) as exc_info:
        run(config, 1)
    assert exc_info.value.level == 1
    assert exc_info.value.partial_record.levels == ()


def test_run_requires_fresh_problem():
    grid, schedule, orders, truth = small_setup()
    config = fresh_config("MC-LS", grid, schedule, orders)
    config.problem.evaluate(np.zeros(2))
    with pytest.raises(ValueError):
        run(config, 1, truth=truth)


def test_asgd_requires_truth():
    grid, schedule, orders, _ = small_setup()
    with pytest.raises(ValueError):
        run(fresh_config("ASGD-LS", grid, schedule, orders), 1)


def test_level_hook_sees_consistent_views():
    grid, schedule, orders, truth = small_setup()
    contexts = []
    run(fresh_config("ASUD-LS", grid, schedule, orders), 9, truth=truth,
        level_hook=contexts.append)
    assert [c.level for c in contexts] == [1, 2, 3]
    for c in contexts:
        assert c.qr.Q.shape == (c.estimate.size, c.n_basis)
        assert c.system.shape[0] == c.m_target
        assert c.record.n_basis == c.n_basis
        assert c.updated_active is not None
