import math

import pytest

from hurwitzcf import (
    DigitSet,
    DomainError,
    GrowthFunction,
    build_schedule,
    subexp_check,
    validate_schedule,
    verify_lower_bound_chain,
)
from hurwitzcf.dimension import _ShellTable


class TestGrowthFunction:
    def test_basic_expressions(self):
        assert GrowthFunction("n+3")(7) == 10.0
        assert GrowthFunction("2*n")(5) == 10.0
        assert GrowthFunction("n^2")(3) == 9.0
        assert GrowthFunction("n^1.5")(4) == 8.0
        assert GrowthFunction("max(10, n/2)")(4) == 10.0
        assert GrowthFunction("max(10, n/2)")(40) == 20.0
        assert GrowthFunction("log(n)+5")(1) == 5.0
        assert GrowthFunction("sqrt(n)")(49) == 7.0
        assert GrowthFunction("(n+1)*(n-1)")(5) == 24.0
        assert GrowthFunction("-1+n")(3) == 2.0

    def test_bad_expressions(self):
        for bad in ("", "n+", "2**n", "foo(n)", "n$", "max(n)"):
            with pytest.raises(DomainError):
                GrowthFunction(bad)


@pytest.fixture(scope="module")
def d2_schedule():
    growth = GrowthFunction("n+3")
    sched = build_schedule(
        DigitSet.d2(), growth, eps=0.5, horizon=10_000, ratio_tol=0.1
    )
    return sched, growth


class TestBuildSchedule:
    def test_validator_passes(self, d2_schedule):
        sched, growth = d2_schedule
        report = validate_schedule(sched, growth)
        failed = [c for c in report if c["status"] != "pass"]
        assert not failed, failed

    def test_first_block_is_min_norm_shell(self, d2_schedule):
        sched, _ = d2_schedule
        first = sched.blocks[0]
        assert sched.anchors[0].norm_sq() == 8
        assert first.norm_sq_lo == 8
        assert first.count == 4  # the four diagonal branches of norm_sq 8

    def test_annulus_weights_from_scratch(self, d2_schedule):
        # independent recomputation of every annulus weight at the built
        # exponent, straight from shell enumeration
        sched, _ = d2_schedule
        shells = _ShellTable(sched.digit_set)
        p = sched.tau_estimate - sched.eps
        for i in range(len(sched.anchors) - 1):
            lo = sched.anchors[i].norm_sq()
            hi = sched.anchors[i + 1].norm_sq()
            assert shells.weight(lo, hi, p) >= 1.0

    def test_blocks_partition_horizon(self, d2_schedule):
        sched, _ = d2_schedule
        assert sched.blocks[0].start == 1
        for a, b in zip(sched.blocks, sched.blocks[1:]):
            assert a.end + 1 == b.start
        assert sched.blocks[-1].end == sched.horizon

    def test_growth_clearance(self, d2_schedule):
        sched, growth = d2_schedule
        for blk in sched.blocks[1:]:
            if blk.index >= len(sched.anchors):
                continue
            level = math.sqrt(sched.anchors[blk.index].norm_sq())
            assert growth(blk.start) >= level

    def test_subexp_trajectory(self, d2_schedule):
        sched, _ = d2_schedule
        traj = subexp_check(sched)
        assert traj.ok
        assert traj.final_window_max < sched.ratio_tol
        assert len(traj.ratio) == sched.horizon
        # single-pool prefix decays like 1/n
        first = sched.blocks[0]
        expect = math.log(first.count) / first.t
        assert abs(traj.ratio[first.t - 1] - expect) < 1e-12

    def test_json_shape(self, d2_schedule):
        sched, _ = d2_schedule
        payload = sched.to_json()
        assert set(payload["blocks"][0]) == {"norm_lo", "norm_hi", "count", "t"}
        assert payload["horizon"] == 10_000


class TestScheduleEdges:
    def test_constant_growth_truncates_with_warning(self):
        sched = build_schedule(
            DigitSet.d2(),
            GrowthFunction("2"),
            eps=0.5,
            horizon=500,
            ratio_tol=0.1,
            tau=2.0,
        )
        assert sched.truncated
        assert sched.warning is not None
        assert sched.blocks[-1].end == 500

    def test_finite_set_rejected(self):
        with pytest.raises(DomainError):
            build_schedule(
                DigitSet.annulus(8, 100), GrowthFunction("n"), 0.5, 1000
            )

    def test_eps_range_enforced(self):
        with pytest.raises(DomainError):
            build_schedule(DigitSet.d2(), GrowthFunction("n"), 5.0, 1000, tau=2.0)
        with pytest.raises(DomainError):
            build_schedule(DigitSet.d2(), GrowthFunction("n"), -0.1, 1000, tau=2.0)


class TestLowerBoundChain:
    def test_n_independent_positive(self, d2_schedule):
        sched, _ = d2_schedule
        last = sched.blocks[-1]
        ns = [last.start, last.start + last.t // 2, last.end]
        results = [
            verify_lower_bound_chain(sched, eps=0.5, delta=0.1, n=n) for n in ns
        ]
        assert len({r.log_lower_bound for r in results}) == 1
        assert all(r.positive for r in results)
        assert all(math.isfinite(r.log_lower_bound) for r in results)

    def test_dimension_floor_formula(self, d2_schedule):
        sched, _ = d2_schedule
        result = verify_lower_bound_chain(sched, 0.5, 0.1, sched.horizon)
        expected = (sched.tau_estimate - 0.5) / 2.1
        assert abs(result.s_value - expected) < 1e-12
        # cutoff anchors must clear the decay floor (16/25)|i|^-2 >= |i|^-2.1
        threshold = (25.0 / 16.0) ** 20
        assert sched.anchors[result.block_cutoff].norm_sq() >= threshold

    def test_degenerate_small_eps(self, d2_schedule):
        # eps close to tau collapses the exponent toward zero
        sched, _ = d2_schedule
        result = verify_lower_bound_chain(
            sched, eps=sched.tau_estimate - 1e-6, delta=0.1, n=sched.horizon
        )
        assert result.s_value < 1e-6
        assert result.positive

    def test_n_out_of_range(self, d2_schedule):
        sched, _ = d2_schedule
        with pytest.raises(DomainError):
            verify_lower_bound_chain(sched, 0.5, 0.1, sched.horizon + 1)
        with pytest.raises(DomainError):
            verify_lower_bound_chain(sched, 0.5, 0.1, 5)

    def test_delta_positive_required(self, d2_schedule):
        sched, _ = d2_schedule
        with pytest.raises(DomainError):
            verify_lower_bound_chain(sched, 0.5, 0.0, sched.horizon)
