import pytest
from hypothesis import given, strategies as st

from aumac.model import (
    DelayVector,
    OverlapProfile,
    SystemParams,
    overlap_profile,
    worst_case_profile,
)


class TestSystemParams:
    def test_d_max_floor(self):
        params = SystemParams(n=10, log_m=1.0, ka=2, epsilon=0.1, alpha=0.39, p=1.0, p_prime=2.0)
        assert params.d_max == 3

    def test_d_max_below_n(self):
        params = SystemParams(n=10, log_m=1.0, ka=2, epsilon=0.1, alpha=0.99, p=1.0, p_prime=2.0)
        assert params.d_max == 9

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(p=2.0, p_prime=1.0),
            dict(p=1.0, p_prime=1.0),
            dict(epsilon=0.0),
            dict(epsilon=1.0),
            dict(alpha=1.0),
            dict(alpha=-0.1),
            dict(ka=0),
            dict(log_m=0.0),
            dict(n=0),
        ],
    )
    def test_invariants_rejected(self, kwargs):
        base = dict(n=10, log_m=1.0, ka=2, epsilon=0.1, alpha=0.2, p=1.0, p_prime=2.0)
        base.update(kwargs)
        with pytest.raises(ValueError):
            SystemParams(**base)


class TestDelayVector:
    def test_first_delay_must_be_zero(self):
        with pytest.raises(ValueError):
            DelayVector((1, 2))

    def test_sorted_required(self):
        with pytest.raises(ValueError):
            DelayVector((0, 3, 2))

    def test_restrict_is_sorted(self):
        dv = DelayVector((0, 1, 3, 5, 5))
        assert dv.restrict({2, 3, 4}) == (1, 3, 5)
        assert dv.restrict({1, 2}) == (0, 1)

    def test_validate_against(self):
        params = SystemParams(n=8, log_m=1.0, ka=3, epsilon=0.1, alpha=0.5, p=1.0, p_prime=2.0)
        DelayVector((0, 1, 4)).validate_against(params)
        with pytest.raises(ValueError):
            DelayVector((0, 1, 5)).validate_against(params)  # beyond d_max=4
        with pytest.raises(ValueError):
            DelayVector((0, 1)).validate_against(params)  # wrong length


class TestOverlapProfile:
    def test_paper_example_first_set(self):
        # two fully overlapping-after-one-use codewords
        prof = overlap_profile((0, 1), 8)
        assert prof.values() == [1, 2, 2, 2, 2, 2, 2, 2]

    def test_paper_example_second_set(self):
        prof = overlap_profile((1, 3, 5), 8)
        assert prof.values() == [0, 1, 1, 2, 2, 3, 3, 3]

    def test_single_user_no_delay(self):
        assert overlap_profile((0,), 4).values() == [1, 1, 1, 1]

    def test_delay_at_or_beyond_n_rejected(self):
        with pytest.raises(ValueError):
            overlap_profile((0, 8), 8)

    def test_unsorted_rejected(self):
        with pytest.raises(ValueError):
            overlap_profile((3, 1), 8)

    def test_empty_set_gives_zero_profile(self):
        assert overlap_profile((), 5).values() == [0] * 5

    def test_serialize_roundtrip(self):
        prof = overlap_profile((1, 3, 5), 8)
        assert prof.serialize() == "1:0,2:1,2:2,3:3"
        assert OverlapProfile.parse(prof.serialize()) == prof

    @given(st.lists(st.integers(min_value=0, max_value=9), min_size=1, max_size=60))
    def test_rle_roundtrip_exact(self, values):
        prof = OverlapProfile.from_values(values)
        assert prof.values() == values
        assert OverlapProfile.parse(prof.serialize()) == prof

    @given(
        st.integers(min_value=1, max_value=6).flatmap(
            lambda k: st.tuples(
                st.just(k),
                st.lists(
                    st.integers(min_value=0, max_value=19), min_size=k, max_size=k
                ),
            )
        )
    )
    def test_profile_nondecreasing_ends_at_set_size(self, k_and_delays):
        k, raw = k_and_delays
        delays = tuple(sorted(raw))
        prof = overlap_profile(delays, 20)
        vals = prof.values()
        assert all(a <= b for a, b in zip(vals, vals[1:]))
        assert vals[-1] == k
        assert len(vals) == 20


class TestWorstCaseProfile:
    def test_two_run_instantiation(self):
        assert worst_case_profile(2, 1, 10, 4).values() == [1] * 4 + [2] * 6

    def test_zero_head(self):
        assert worst_case_profile(3, 0, 6, 2).values() == [0, 0, 3, 3, 3, 3]

    def test_synchronous_reduction(self):
        assert worst_case_profile(2, 1, 10, 0).values() == [2] * 10

    def test_k_zero_rejected(self):
        with pytest.raises(ValueError):
            worst_case_profile(0, 0, 10, 4)

    @given(
        st.integers(min_value=1, max_value=5),
        st.integers(min_value=0, max_value=9),
        st.data(),
    )
    def test_entrywise_below_true_profile(self, k, d_max, data):
        """Worst case is <= the true profile on the head and equal on the tail."""
        n = 24
        first = data.draw(st.sampled_from([0, None]))
        if first == 0:
            rest = data.draw(
                st.lists(st.integers(0, d_max), min_size=k - 1, max_size=k - 1)
            )
            delays = tuple(sorted([0, *rest]))
            iota = 1
        else:
            delays = tuple(sorted(data.draw(
                st.lists(st.integers(min(1, d_max), d_max), min_size=k, max_size=k)
            ))) if d_max > 0 else (0,) * k
            iota = 0 if (d_max > 0 and delays[0] > 0) else 1
        true_vals = overlap_profile(delays, n).values()
        wc_vals = worst_case_profile(k, iota, n, d_max).values()
        assert all(w <= v for w, v in zip(wc_vals[:d_max], true_vals[:d_max]))
        assert wc_vals[d_max:] == true_vals[d_max:]
