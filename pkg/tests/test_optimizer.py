import math
from dataclasses import replace

import pytest

from aumac.bounds import BoundReport, VARIANT_THM2, theorem2_bound
from aumac.model import SystemParams
from aumac.optimizer import (
    CSV_HEADER,
    STATUS_OK,
    STATUS_UNATTAINABLE,
    csv_text,
    min_bound_over_backoff,
    min_ebn0,
    sweep,
)


def stub_report(total, valid=True):
    return BoundReport(
        variant="stub",
        total=total if valid else math.inf,
        clamped=min(1.0, total) if valid else 1.0,
        p0_collision=0.0,
        p0_power=0.0,
        valid=valid,
        failure=None if valid else "stub",
        per_cardinality=(),
        max_root_residual=0.0,
    )


def base_params(**kw):
    kwargs = dict(n=100, log_m=2.0, ka=3, epsilon=1e-2, alpha=0.0, p=1.0, p_prime=2.0)
    kwargs.update(kw)
    return SystemParams(**kwargs)


class TestBackoffSearch:
    def test_constant_objective(self):
        result = min_bound_over_backoff(base_params(), 1.0, lambda p: stub_report(0.42))
        assert result is not None
        assert result.value == 0.42

    def test_unimodal_synthetic(self):
        def bound_fn(params):
            beta = params.p / params.p_prime
            return stub_report((beta - 0.3) ** 2)

        result = min_bound_over_backoff(base_params(), 2.0, bound_fn)
        assert result.p / 2.0 == pytest.approx(0.3, abs=1e-4)

    def test_all_invalid(self):
        result = min_bound_over_backoff(
            base_params(), 1.0, lambda p: stub_report(1.0, valid=False)
        )
        assert result is None

    def test_partial_validity(self):
        def bound_fn(params):
            beta = params.p / params.p_prime
            if beta > 0.5:
                return stub_report(1.0, valid=False)
            return stub_report(beta)  # decreasing toward small beta? no: increasing

        result = min_bound_over_backoff(base_params(), 1.0, bound_fn)
        assert result is not None
        assert result.p <= 0.5
        assert result.value == pytest.approx(0.01, rel=1e-6)  # grid floor beta=0.01

    def test_headline_scale_interior_optimum(self):
        """At the working scale the optimum backoff is interior: pushing the
        symbol power to the cap blows up the power-violation tail, starving
        it kills the exponent."""
        params = base_params(n=4000, log_m=100.0, ka=100, epsilon=1e-3, alpha=0.2)
        result = min_bound_over_backoff(params, 170.0, theorem2_bound)
        assert result is not None
        beta = result.p / 170.0
        assert 0.02 < beta < 0.9999
        edge_lo = theorem2_bound(replace(params, p=0.01 * 170.0, p_prime=170.0))
        edge_hi = theorem2_bound(replace(params, p=(1 - 1e-6) * 170.0, p_prime=170.0))
        hi_total = edge_hi.total if edge_hi.valid else math.inf
        lo_total = edge_lo.total if edge_lo.valid else math.inf
        assert result.value < min(lo_total, hi_total)


class TestMinEbn0:
    def test_synthetic_threshold(self):
        p_ref = 0.37

        def bound_fn(params):
            # feasible iff best backoff reaches p_ref; bound decreasing in p'
            return stub_report(1e-2 * p_ref / params.p_prime)

        point = min_ebn0(base_params(epsilon=1e-2), 1e-2, bound_fn, "stub")
        assert point.status == STATUS_OK
        assert point.p_prime == pytest.approx(p_ref, rel=2e-3)
        assert point.ebn0_linear == pytest.approx(point.p_prime * 100 / 2.0, rel=1e-12)

    def test_bisection_postcondition(self):
        def bound_fn(params):
            return stub_report(1e-2 * 0.37 / params.p_prime)

        point = min_ebn0(base_params(epsilon=1e-2), 1e-2, bound_fn, "stub")
        at_opt = min_bound_over_backoff(base_params(), point.p_prime, bound_fn)
        below = min_bound_over_backoff(
            base_params(), point.p_prime / (1 + 1e-3), bound_fn
        )
        assert at_opt.value <= 1e-2
        assert below is None or below.value > 1e-2

    def test_vacuous_epsilon_returns_floor(self):
        point = min_ebn0(base_params(), 1.0, lambda p: stub_report(0.9), "stub")
        assert point.status == STATUS_OK
        assert point.ebn0_db == pytest.approx(-40.0)

    def test_unattainable_cap(self):
        point = min_ebn0(
            base_params(), 1e-3, lambda p: stub_report(1.0), "stub", cap_db=10.0
        )
        assert point.status == STATUS_UNATTAINABLE
        assert math.isnan(point.ebn0_db)

    def test_bisection_postcondition_real_bound(self):
        base = base_params(n=50, log_m=6.0, epsilon=5e-2, ka=3, alpha=0.2)
        point = min_ebn0(base, 5e-2, theorem2_bound, "thm2")
        assert point.status == STATUS_OK
        at_opt = min_bound_over_backoff(base, point.p_prime, theorem2_bound)
        assert at_opt.value <= 5e-2
        below = min_bound_over_backoff(base, point.p_prime / (1 + 1e-3), theorem2_bound)
        assert below is None or below.value > 5e-2

    def test_nested_feasible_sets(self):
        def bound_fn(params):
            return stub_report(1e-2 * 0.37 / params.p_prime)

        loose = min_ebn0(base_params(), 1e-2, bound_fn, "stub")
        tight = min_ebn0(base_params(), 1e-3, bound_fn, "stub")
        assert tight.ebn0_db >= loose.ebn0_db


class TestSweep:
    def test_singleton_and_duplicates(self):
        base = base_params(n=50, log_m=6.0, epsilon=5e-2)
        single = sweep([(2, 0.0)], base, variant="thm2")
        assert len(single) == 1
        double = sweep([(2, 0.1), (2, 0.1)], base, variant="thm2")
        assert double[0] == double[1]

    def test_empty_grid_rejected(self):
        with pytest.raises(ValueError):
            sweep([], base_params(), variant="thm2")

    def test_parallel_matches_serial_bitwise(self):
        base = base_params(n=50, log_m=6.0, epsilon=5e-2)
        grid = [(2, 0.0), (2, 0.2), (3, 0.0), (3, 0.2)]
        serial = sweep(grid, base, variant="thm2", workers=1)
        parallel = sweep(grid, base, variant="thm2", workers=4)
        assert csv_text(serial) == csv_text(parallel)

    def test_csv_schema(self):
        base = base_params(n=50, log_m=6.0, epsilon=5e-2)
        text = csv_text(sweep([(2, 0.0)], base, variant="thm2"))
        lines = text.strip().split("\n")
        assert lines[0] == CSV_HEADER
        assert lines[0] == "ka,alpha,variant,ebn0_db,ebn0_linear,p_prime,p,bound,status"
        fields = lines[1].split(",")
        assert fields[0] == "2"
        assert fields[2] == VARIANT_THM2
        assert fields[8] == STATUS_OK
        # dB prints with exactly 4 decimals
        assert len(fields[3].split(".")[1]) == 4

    def test_auto_variant_selects_sync_at_zero_alpha(self):
        base = base_params(n=50, log_m=6.0, epsilon=5e-2)
        pts = sweep([(2, 0.0), (2, 0.2)], base, variant="auto")
        assert pts[0].variant == "thm1_sync"
        assert pts[1].variant == VARIANT_THM2
