import itertools

import numpy as np
import pytest

from gnnio.allocator import (
    AllocationPlan,
    CacheCostModel,
    PipelineProfile,
    evaluate_plan,
    fit_cache_cost,
    solve_allocation,
    stage_times,
)


def _profile(t1=0.0, t2=0.0, t3=0.0, t_net=0.0, t_gpu=0.0, d_subgraphs=0.0, d_features=0.0):
    return PipelineProfile(t1=t1, t2=t2, t3=t3, t_net=t_net, t_gpu=t_gpu,
                           d_subgraphs=d_subgraphs, d_features=d_features)


def exhaustive_optimum(profile, model, c_gs, c_wm, b_pcie):
    """Independent 6-variable oracle over all feasible integer splits."""
    best = np.inf
    for c1, c2 in itertools.product(range(1, c_gs + 1), repeat=2):
        if c1 + c2 > c_gs:
            continue
        for c3, c4 in itertools.product(range(1, c_wm + 1), repeat=2):
            if c3 + c4 > c_wm:
                continue
            for b_i in range(1, b_pcie):
                for b_ii in range(1, b_pcie + 1 - b_i):
                    t = max(stage_times(profile, model, c1, c2, c3, c4, b_i, b_ii).values())
                    best = min(best, t)
    return best


# -- fitting ---------------------------------------------------------------------


def test_fit_two_point_exact():
    m = fit_cache_cost([(1, 10.0), (2, 5.5)])
    assert m.a == pytest.approx(9.0)
    assert m.d == pytest.approx(1.0)


def test_fit_constant_times():
    m = fit_cache_cost([(1, 3.0), (2, 3.0), (4, 3.0)])
    assert m.a == pytest.approx(0.0)
    assert m.d == pytest.approx(3.0)


def test_fit_clamps_negative_a():
    # increasing time with cores would fit a < 0; clamp to mean
    m = fit_cache_cost([(1, 1.0), (2, 2.0), (4, 4.0)])
    assert m.a == 0.0
    assert m.d == pytest.approx(7.0 / 3.0)


def test_fit_recovers_known_model_under_noise():
    rng = np.random.default_rng(0)
    a_true, d_true = 40.0, 2.0
    cores = np.arange(1, 65)
    samples = [(int(c), a_true / c + d_true + rng.normal(0, 0.02)) for c in cores]
    m = fit_cache_cost(samples)
    assert abs(m.a - a_true) / a_true < 0.05
    assert abs(m.d - d_true) / d_true < 0.10


def test_fit_errors():
    with pytest.raises(ValueError):
        fit_cache_cost([(1, 2.0)])
    with pytest.raises(ValueError, match="distinct"):
        fit_cache_cost([(2, 1.0), (2, 1.1)])


def test_profile_validation_and_file_roundtrip(tmp_path):
    with pytest.raises(ValueError):
        _profile(t1=-1.0)
    path = tmp_path / "profile.txt"
    path.write_text(
        "t1=10\nt2=8\nt3=6\nt_net=0.5\nt_gpu=2\n"
        "d_subgraphs=100\nd_features=300\n"
        "cache_sample.1=10\ncache_sample.2=5.5\n"
    )
    p = PipelineProfile.from_file(path)
    assert p.t1 == 10 and p.d_features == 300
    assert p.cache_samples == [(1, 10.0), (2, 5.5)]
    bad = tmp_path / "bad.txt"
    bad.write_text("t1=10\n")
    with pytest.raises(ValueError, match="missing keys"):
        PipelineProfile.from_file(bad)


# -- evaluation -------------------------------------------------------------------


def test_stage_time_linearity():
    p = _profile(t1=12.0, d_subgraphs=1.0, d_features=1.0)
    m = CacheCostModel(a=0.0, d=0.0)
    t_one = stage_times(p, m, 1, 1, 1, 1, 1, 1)["sample_requests"]
    t_two = stage_times(p, m, 2, 1, 1, 1, 1, 1)["sample_requests"]
    assert t_one == 12.0
    assert t_two == 6.0


def test_cache_prediction_matches_fit_samples():
    samples = [(1, 10.0), (2, 5.5)]
    m = fit_cache_cost(samples)
    for c, t in samples:
        assert m.predict(c) == pytest.approx(t, abs=1e-9)


def test_evaluate_plan_reports_bottleneck():
    p = _profile(t1=10.0, t2=10.0, d_subgraphs=1.0, d_features=1.0)
    m = CacheCostModel(a=0.0, d=0.0)
    plan = AllocationPlan(c1=5, c2=5, c3=1, c4=1, b_i=1, b_ii=1,
                          bottleneck=0.0, bottleneck_stage="")
    times = evaluate_plan(p, m, plan)
    assert times["bottleneck"] == 2.0


# -- solving ----------------------------------------------------------------------


def test_symmetric_stages_split_evenly():
    p = _profile(t1=10.0, t2=10.0, d_subgraphs=1e-9, d_features=1e-9)
    m = CacheCostModel(a=0.0, d=0.0)
    plan = solve_allocation(p, m, 10, 2, 2)
    assert plan.c1 == 5 and plan.c2 == 5
    assert plan.bottleneck == pytest.approx(2.0)


def test_fixed_stage_floor_dominates():
    p = _profile(t1=1.0, t2=1.0, t3=1.0, t_gpu=100.0, d_subgraphs=1.0, d_features=1.0)
    m = CacheCostModel(a=1.0, d=0.0)
    plan = solve_allocation(p, m, 8, 8, 8)
    assert plan.bottleneck == 100.0
    assert plan.bottleneck_stage == "gpu_compute"
    # tie-break-minimal feasible plan
    assert (plan.c1, plan.c3, plan.b_i) == (1, 1, 1)


def test_plan_feasibility_and_unit_minimums():
    p = _profile(t1=3.0, t2=7.0, t3=2.0, t_net=0.1, t_gpu=0.2,
                 d_subgraphs=50.0, d_features=150.0)
    m = CacheCostModel(a=12.0, d=0.5)
    plan = solve_allocation(p, m, 12, 9, 10)
    assert plan.c1 >= 1 and plan.c2 >= 1 and plan.c1 + plan.c2 <= 12
    assert plan.c3 >= 1 and plan.c4 >= 1 and plan.c3 + plan.c4 <= 9
    assert plan.b_i >= 1 and plan.b_ii >= 1 and plan.b_i + plan.b_ii <= 10


def test_capacity_validation():
    p = _profile(d_subgraphs=1.0, d_features=1.0)
    m = CacheCostModel(a=1.0, d=0.0)
    with pytest.raises(ValueError):
        solve_allocation(p, m, 1, 4, 4)


def test_lower_bound_invariant():
    rng = np.random.default_rng(1)
    for _ in range(30):
        p = _profile(*(float(x) for x in rng.uniform(0.1, 20, size=7)))
        m = CacheCostModel(a=float(rng.uniform(0, 10)), d=float(rng.uniform(0, 2)))
        c_gs, c_wm, b_pcie = (int(x) for x in rng.integers(2, 13, size=3))
        plan = solve_allocation(p, m, c_gs, c_wm, b_pcie)
        lower = max(p.t_net, p.t_gpu, p.t1 / c_gs, p.t3 / c_wm,
                    p.d_subgraphs / b_pcie, m.predict(c_wm - 1))
        assert plan.bottleneck >= lower - 1e-12


def test_matches_exhaustive_oracle_small():
    rng = np.random.default_rng(2)
    for _ in range(10):
        p = _profile(*(float(x) for x in rng.uniform(0.0, 15, size=7)))
        m = CacheCostModel(a=float(rng.uniform(0, 8)), d=float(rng.uniform(0, 2)))
        c_gs, c_wm, b_pcie = (int(x) for x in rng.integers(2, 7, size=3))
        plan = solve_allocation(p, m, c_gs, c_wm, b_pcie)
        assert plan.bottleneck == pytest.approx(
            exhaustive_optimum(p, m, c_gs, c_wm, b_pcie), rel=1e-12)


def test_search_cost_ceiling():
    p = _profile(t1=1.0, t2=1.0, t3=1.0, d_subgraphs=1.0, d_features=1.0)
    m = CacheCostModel(a=1.0, d=0.1)
    plan = solve_allocation(p, m, 12, 9, 10)
    assert plan.candidates_evaluated <= 12 * 9 * 10
