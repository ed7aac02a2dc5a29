import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import norm

from secureid.errors import ConfigurationError, DomainError, ResourceError
from secureid.quantizer import (
    InputDistribution,
    build_discrete_channel,
    clip_output,
    compute_spans,
    discretized_noise_row,
    lattices_csv,
    load_channels,
    quantize_input,
    regularity_lhs,
    save_channels,
    tail_probability_mc,
    tv_gap_estimate,
)

spec_params = st.tuples(
    st.floats(0.2, 5), st.floats(0.2, 5), st.integers(1, 50), st.floats(0.05, 1), st.floats(0.1, 3)
)


class TestSpans:
    def test_reference_values(self):
        s = compute_spans(1, 1, 100, 0.1, 1)
        assert s.delta_x == pytest.approx(0.01, rel=1e-12)
        assert s.z0 == pytest.approx(11.0, rel=1e-12)
        assert s.input_bound == pytest.approx(202.0)
        assert s.input_lattice.size <= 202

    def test_main_channel_dominates(self):
        assert compute_spans(1, 4, 10, 0.1, 1).k_max == 1.0
        assert compute_spans(4, 1, 10, 0.1, 1).k_max == 1.0

    def test_monotone_in_delta(self):
        a, b = compute_spans(1, 1, 10, 0.1, 1), compute_spans(1, 1, 10, 0.2, 1)
        assert b.delta_x > a.delta_x and b.z0 < a.z0

    @pytest.mark.parametrize("bad", range(5))
    def test_nonpositive(self, bad):
        args = [1.0, 1.0, 10, 0.1, 1.0]
        args[bad] = 0
        with pytest.raises(DomainError):
            compute_spans(*args)

    @given(spec_params)
    def test_cardinality_bounds_and_ordering(self, p):
        s = compute_spans(*p)
        assert s.input_lattice.size <= s.input_bound
        assert s.output_lattice.size <= s.output_bound
        assert np.all(np.diff(s.input_lattice) > 0) and np.all(np.diff(s.output_lattice) > 0)
        assert s.z0 > s.a
        assert np.all(np.abs(s.input_lattice) <= s.a + 1e-12)


class TestQuantizeInput:
    spec = compute_spans(1, 1, 100, 0.1, 1)

    def test_fixed_point_and_rounding_toward_zero(self):
        assert quantize_input(0.03, self.spec) == pytest.approx(0.03)
        assert quantize_input(0.0149, self.spec) == pytest.approx(0.01)
        assert quantize_input(-0.0149, self.spec) == pytest.approx(-0.01)

    def test_out_of_range(self):
        with pytest.raises(DomainError):
            quantize_input([0.5, 1.5], self.spec)

    @given(st.lists(st.floats(-1, 1), min_size=1, max_size=20))
    def test_magnitude_never_grows(self, xs):
        x = np.array(xs)
        xh = quantize_input(x, self.spec)
        assert np.all(np.abs(xh) <= np.abs(x) + 1e-15)
        assert np.all(np.abs(x - xh) < self.spec.delta_x * (1 + 1e-9))
        assert np.sum(xh**2) <= np.sum(x**2) + 1e-15


class TestClip:
    def test_examples(self):
        assert clip_output(0.0, 3.0) == 0.0
        assert clip_output(8.0, 3.0) == 3.0
        assert clip_output(-8.0, 3.0) == 3.0
        np.testing.assert_array_equal(clip_output(np.array([-1.0, 2.9, 3.1]), 3.0), [-1.0, 2.9, 3.0])


class TestRows:
    spec = compute_spans(1, 4, 1, 0.1, 1)

    def test_symmetric_at_zero(self):
        row = discretized_noise_row(0.0, self.spec)
        cells = row[:-1]
        np.testing.assert_allclose(cells, cells[::-1], atol=1e-15)

    def test_atom_mass_is_two_sided_tail(self):
        s = self.spec
        a = s.input_lattice[-1]
        row = discretized_noise_row(a, s, "eve")
        sd = 2.0
        tail = norm.sf((s.z0 - a) / sd) + norm.cdf((-s.z0 - a) / sd)
        assert row[-1] == pytest.approx(tail, abs=1e-12)

    def test_rows_sum_to_one(self):
        g = np.random.default_rng(0)
        for x in g.choice(self.spec.input_lattice, 100):
            for which in ("main", "eve"):
                assert discretized_noise_row(x, self.spec, which).sum() == pytest.approx(1.0, abs=1e-10)

    def test_off_lattice(self):
        with pytest.raises(DomainError):
            discretized_noise_row(0.05, self.spec)

    def test_density_term_variant_is_normalized(self):
        row = discretized_noise_row(0.5, self.spec, include_density_term=True)
        assert row.sum() == pytest.approx(1.0, abs=1e-12)
        assert row[-1] > discretized_noise_row(0.5, self.spec)[-1]


class TestChannel:
    def test_equal_variances_equal_matrices(self):
        s = compute_spans(1, 1, 2, 0.2, 1)
        assert np.array_equal(build_discrete_channel(s, "main").transition, build_discrete_channel(s, "eve").transition)

    def test_distinct_variances(self):
        s = compute_spans(1, 4, 2, 0.2, 1)
        assert not np.allclose(build_discrete_channel(s, "main").transition, build_discrete_channel(s, "eve").transition)

    @given(spec_params)
    def test_stochastic_and_bounded(self, p):
        s = compute_spans(*p)
        ch = build_discrete_channel(s, "eve")
        T = ch.transition
        assert T.shape[0] <= s.input_bound and T.shape[1] <= s.output_bound
        assert np.all(T >= 0)
        np.testing.assert_allclose(T.sum(1), 1.0, atol=1e-10)

    def test_budget(self):
        with pytest.raises(ResourceError):
            build_discrete_channel(compute_spans(1, 1, 100, 0.1, 1), max_entries=1000)

    def test_container_and_csv(self, tmp_path):
        s = compute_spans(1, 4, 1, 0.2, 1)
        chans = [build_discrete_channel(s, w) for w in ("main", "eve")]
        save_channels(tmp_path / "q.sidq", s, chans)
        header, back = load_channels(tmp_path / "q.sidq")
        assert header["spec"]["z0"] == s.z0
        for a, b in zip(chans, back):
            assert np.array_equal(a.transition, b.transition) and a.which == b.which
        text = lattices_csv(chans[0])
        assert text.splitlines()[0] == "lattice,index,value"
        assert len(text.splitlines()) == 1 + s.input_lattice.size + s.output_lattice.size


def uniform_inputs(n, k, a, seed=0):
    return InputDistribution.uniform(np.random.default_rng(seed).uniform(-a, a, size=(k, n)))


class TestTvGaps:
    def test_single_letter_guarantees(self):
        s = compute_spans(1, 1, 1, 0.1, 1)
        rep = tv_gap_estimate(InputDistribution.uniform(s.input_lattice[:, None] * 0.99), s)
        for name, g in rep.rows():
            assert g.passed, name
        assert rep.composed.value <= 0.6

    def test_dense_resolution(self):
        s = compute_spans(1, 4, 1, 0.1, 1)
        d = uniform_inputs(1, 5, 1)
        coarse = tv_gap_estimate(d, s, "eve", per_cell=10)
        fine = tv_gap_estimate(d, s, "eve", per_cell=40)
        for (_, a), (_, b) in zip(coarse.rows(), fine.rows()):
            assert a.value == pytest.approx(b.value, abs=1e-3)

    @pytest.mark.parametrize("n", [1, 2])
    def test_input_stage_bound(self, n):
        s = compute_spans(1, 1, n, 0.2, 1)
        rep = tv_gap_estimate(uniform_inputs(n, 3, 1, seed=n), s)
        assert rep.input_stage.value <= 2 * math.sqrt(s.k_max * n * s.delta_x**2) + 1e-12

    @given(st.integers(0, 1000), st.floats(0.1, 0.5), st.floats(0.5, 3))
    def test_triangle_inequality(self, seed, delta, eve):
        s = compute_spans(1, eve, 1, delta, 1)
        rep = tv_gap_estimate(uniform_inputs(1, 3, 1, seed), s, "eve")
        total = rep.input_stage.value + rep.clip_stage.value + rep.output_stage.value
        assert rep.composed.value <= total + 2e-3

    def test_refinement_shrinks_gap(self):
        d = uniform_inputs(1, 4, 1)
        gaps = [tv_gap_estimate(d, compute_spans(1, 1, 1, delta, 1)).composed.value for delta in (0.4, 0.1, 0.02)]
        assert gaps[0] > gaps[1] > gaps[2]

    def test_monte_carlo_matches_dense(self):
        s = compute_spans(1, 4, 2, 0.3, 1)
        d = uniform_inputs(2, 3, 1)
        dense = tv_gap_estimate(d, s, "eve", mode="dense")
        mc = tv_gap_estimate(d, s, "eve", mode="mc", trials=100000, seed=3)
        for (name, a), (_, b) in zip(dense.rows(), mc.rows()):
            if b.ci_lo is not None:
                assert b.lower_bound_only
                # the empirical likelihood-ratio region is optimal for the true laws
                assert b.ci_lo - 1e-3 <= a.value <= b.ci_hi + 1e-3, name

    def test_dense_refuses_large_n(self):
        s = compute_spans(1, 1, 5, 0.5, 1)
        with pytest.raises(ConfigurationError):
            tv_gap_estimate(uniform_inputs(5, 2, 1), s, mode="dense")

    def test_dimension_mismatch(self):
        with pytest.raises(ConfigurationError):
            tv_gap_estimate(uniform_inputs(2, 2, 1), compute_spans(1, 1, 1, 0.1, 1))

    def test_csv_schema(self):
        s = compute_spans(1, 1, 1, 0.2, 1)
        text = tv_gap_estimate(uniform_inputs(1, 2, 1), s).to_csv()
        assert text.splitlines()[0] == "stage,mode,tv,bound,ci_lo,ci_hi,pass"
        assert len(text.splitlines()) == 5


class TestTailAndRegularity:
    def test_union_bound_tail(self):
        s = compute_spans(1, 1, 3, 0.1, 1)
        est, lo, hi, bound = tail_probability_mc(s, np.full(3, 1.0), trials=200000, seed=1)
        assert bound == pytest.approx(0.1)
        assert lo <= bound

    @pytest.mark.parametrize("u", [0.1, 1.0])
    @pytest.mark.parametrize("var", [0.5, 1.0, 4.0])
    def test_square_root_modulus(self, u, var):
        # K u^gamma with K = 1/var, gamma = 2
        assert regularity_lhs(var, u) <= u**2 / var
