"""Welfare tables, curvature, coverage basis functions, and the two
decomposition constructions."""

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_concave_table
from poadesign.errors import (
    CurvatureExceededError,
    DegenerateCurvatureError,
    DegenerateEnvelopeError,
    DimensionMismatchError,
    EnvelopeConditionError,
    ValidationError,
)
from poadesign.welfare import (
    CandidateEnvelope,
    CoverageParams,
    Decomposition,
    WelfareTable,
    build_candidates,
    coverage_table,
    coverage_value,
    curvature,
    decompose_concave,
    decompose_general,
)

RECONSTRUCTION_TOL = 1e-9


@st.composite
def concave_tables(draw, max_n=12):
    n = draw(st.integers(min_value=1, max_value=max_n))
    marginals = draw(
        st.lists(
            st.floats(min_value=0.01, max_value=1.0, allow_nan=False),
            min_size=n,
            max_size=n,
        )
    )
    values = [0.0]
    for m in sorted(marginals, reverse=True):
        values.append(values[-1] + m)
    return WelfareTable(n, tuple(values))


@st.composite
def strictly_concave_tables(draw, max_n=12):
    """Tables whose marginals are separated well beyond rounding noise, so
    the stored float values are concave exactly, not merely within
    validation tolerance."""
    n = draw(st.integers(min_value=1, max_value=max_n))
    marginals = draw(
        st.lists(
            st.floats(min_value=0.01, max_value=1.0, allow_nan=False),
            min_size=n,
            max_size=n,
        )
    )
    separated = [
        m + (n - 1 - k) * 1e-3
        for k, m in enumerate(sorted(marginals, reverse=True))
    ]
    values = [0.0]
    for m in separated:
        values.append(values[-1] + m)
    return WelfareTable(n, tuple(values))


def linear_table(n, slope=1.0):
    return WelfareTable(n, tuple(slope * x for x in range(n + 1)))


class TestWelfareTable:
    def test_valid_table(self):
        w = WelfareTable(3, (0.0, 1.0, 1.5, 1.75))
        assert w.n == 3
        assert w.values == (0.0, 1.0, 1.5, 1.75)

    @pytest.mark.parametrize(
        "n, values",
        [
            (0, (0.0,)),
            (2, (0.0, 1.0)),
            (2, (0.1, 1.0, 1.5)),
            (2, (0.0, -1.0, 1.0)),
            (2, (0.0, 1.0, 0.5)),
            (3, (0.0, 1.0, 1.2, 1.5)),
        ],
    )
    def test_invalid_tables(self, n, values):
        with pytest.raises(ValidationError):
            WelfareTable(n, values)

    def test_zero_interior_value_rejected(self):
        with pytest.raises(ValidationError):
            WelfareTable(2, (0.0, 0.0, 1.0))

    def test_from_function_pins_origin(self):
        w = WelfareTable.from_function(3, lambda x: 0.5 * x)
        assert w.values == (0.0, 0.5, 1.0, 1.5)

    def test_scaled(self):
        w = WelfareTable(2, (0.0, 1.0, 1.5)).scaled(2.0)
        assert w.values == (0.0, 2.0, 3.0)
        with pytest.raises(ValidationError):
            w.scaled(0.0)

    def test_json_round_trip(self):
        w = WelfareTable(2, (0.0, 0.7, 1.05))
        again = WelfareTable.from_json(w.to_json())
        assert again == w

    def test_from_json_malformed(self):
        with pytest.raises(ValidationError):
            WelfareTable.from_json(json.dumps({"values": [0.0, 1.0]}))

    @given(concave_tables())
    def test_round_trip_property(self, w):
        assert WelfareTable.from_json(w.to_json()) == w


class TestCoverage:
    def test_params_validation(self):
        with pytest.raises(ValidationError):
            CoverageParams(1.2, 1)
        with pytest.raises(ValidationError):
            CoverageParams(0.5, 0)
        with pytest.raises(ValidationError):
            CoverageParams(0.5, 1.5)

    def test_coverage_value(self):
        params = CoverageParams(0.5, 2)
        assert [coverage_value(params, x) for x in range(5)] == [
            0.0,
            1.0,
            2.0,
            2.5,
            3.0,
        ]
        with pytest.raises(ValidationError):
            coverage_value(params, -1)

    def test_coverage_table(self):
        w = coverage_table(CoverageParams(1.0, 1), 3)
        assert w.values == (0.0, 1.0, 1.0, 1.0)

    def test_coverage_value_at_one_is_one(self):
        for alpha in (0.0, 0.3, 1.0):
            for beta in (1, 2, 5):
                assert coverage_value(CoverageParams(alpha, beta), 1) == 1.0


class TestCurvature:
    def test_linear_is_zero(self):
        assert curvature(linear_table(5)) == 0.0

    def test_saturating_is_one(self):
        assert curvature(coverage_table(CoverageParams(1.0, 1), 4)) == 1.0

    def test_single_player_is_zero(self):
        assert curvature(WelfareTable(1, (0.0, 3.0))) == 0.0

    def test_coverage_curvature_equals_alpha(self):
        # the last marginal of V is 1 - alpha once n exceeds beta
        for alpha in (0.25, 0.6, 1.0):
            w = coverage_table(CoverageParams(alpha, 2), 6)
            assert curvature(w) == pytest.approx(alpha, abs=1e-15)

    @given(concave_tables())
    def test_in_unit_interval(self, w):
        assert 0.0 <= curvature(w) <= 1.0


class TestDecomposeConcave:
    def test_zero_curvature_rejected(self):
        with pytest.raises(DegenerateCurvatureError):
            decompose_concave(linear_table(3), 0.0)

    def test_bad_bound_rejected(self):
        w = covering = coverage_table(CoverageParams(1.0, 1), 3)
        with pytest.raises(ValidationError):
            decompose_concave(w, 1.5)
        with pytest.raises(ValidationError):
            decompose_concave(covering, -0.2)

    def test_curvature_exceeding_bound_rejected(self):
        w = coverage_table(CoverageParams(1.0, 1), 4)
        with pytest.raises(CurvatureExceededError):
            decompose_concave(w, 0.5)

    def test_recovers_point_mass_on_basis_function(self):
        w = coverage_table(CoverageParams(0.6, 2), 5)
        d = decompose_concave(w, 0.6)
        assert d.coefficients == pytest.approx((0.0, 1.0, 0.0, 0.0, 0.0), abs=1e-12)
        assert d.basis == tuple(CoverageParams(0.6, k) for k in range(1, 6))

    def test_single_player(self):
        d = decompose_concave(WelfareTable(1, (0.0, 2.5)), 1.0)
        assert d.coefficients == (2.5,)
        assert d.reconstruct(1) == pytest.approx(2.5, abs=1e-15)

    def test_linear_mass_lands_on_last_coefficient(self):
        d = decompose_concave(linear_table(4, slope=2.0), 1.0)
        assert d.coefficients == pytest.approx((0.0, 0.0, 0.0, 2.0), abs=1e-12)

    @given(strictly_concave_tables(), st.floats(min_value=0.01, max_value=1.0))
    @settings(max_examples=200)
    def test_reconstruction_identity(self, w, slack):
        c = curvature(w) + slack * (1.0 - curvature(w))
        if c == 0.0:
            return
        d = decompose_concave(w, c)
        assert all(eta >= 0.0 for eta in d.coefficients)
        for x in range(w.n + 1):
            assert d.reconstruct(x) == pytest.approx(
                w.values[x], abs=RECONSTRUCTION_TOL
            )

    def test_rounding_noise_at_rounding_scale_curvature_rejected(self):
        # validation admits eps-level concavity violations; no nonnegative
        # combination reproduces such a table once c is at rounding scale,
        # and the construction refuses rather than returning one
        values = (0.0, 0.01, 0.02, 0.03, 0.04, 0.05, 0.05 + 0.01, 0.07, 0.08)
        w = WelfareTable(8, values)
        assert 0.0 < curvature(w) < 1e-12
        with pytest.raises(CurvatureExceededError):
            decompose_concave(w, curvature(w))

    def test_random_batch_reconstruction(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            n = int(rng.integers(2, 16))
            w = random_concave_table(rng, n)
            c = curvature(w) + (1.0 - curvature(w)) * rng.random()
            if c == 0.0:
                continue
            d = decompose_concave(w, c)
            worst = max(
                abs(d.reconstruct(x) - w.values[x]) for x in range(n + 1)
            )
            assert worst <= RECONSTRUCTION_TOL


class TestDecompositionType:
    def test_length_mismatch_rejected(self):
        with pytest.raises(ValidationError):
            Decomposition((1.0,), (CoverageParams(1.0, 1), CoverageParams(1.0, 2)))

    def test_reconstruct_mixes_params_and_tables(self):
        basis = (CoverageParams(1.0, 1), linear_table(3))
        d = Decomposition((2.0, 0.5), basis)
        assert d.reconstruct(2) == pytest.approx(2.0 * 1.0 + 0.5 * 2.0, abs=1e-15)


def strict_envelope(n, lb_alpha=0.6):
    """Linear upper envelope over a slower coverage-style lower envelope."""
    ub = linear_table(n)
    lb = coverage_table(CoverageParams(lb_alpha, 1), n)
    return CandidateEnvelope(ub, lb)


def curved_envelope(n):
    """A strictly concave upper envelope; candidates are not coverage shapes."""
    ub = WelfareTable.from_function(n, lambda x: float(x) ** 0.9)
    lb = coverage_table(CoverageParams(0.7, 1), n)
    return CandidateEnvelope(ub, lb)


class TestCandidateEnvelope:
    def test_valid_pair(self):
        env = strict_envelope(4)
        assert env.n == 4

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            CandidateEnvelope(linear_table(3), coverage_table(CoverageParams(0.5, 1), 4))

    def test_normalization_required(self):
        with pytest.raises(ValidationError):
            CandidateEnvelope(linear_table(3, slope=2.0), linear_table(3))

    def test_marginal_ordering_required(self):
        # lower envelope outgrowing the upper one is rejected
        with pytest.raises(EnvelopeConditionError):
            CandidateEnvelope(coverage_table(CoverageParams(1.0, 1), 3), linear_table(3))

    def test_second_difference_ordering_required(self):
        # upper must be at least as concave as lower at every interior point
        ub = WelfareTable(4, (0.0, 1.0, 1.9, 2.7, 3.4))
        lb = WelfareTable(4, (0.0, 1.0, 1.5, 1.6, 1.65))
        with pytest.raises(EnvelopeConditionError):
            CandidateEnvelope(ub, lb)

    def test_check_member_accepts_candidate_mix(self):
        env = strict_envelope(5)
        cands = build_candidates(env, 5)
        mixed = WelfareTable(
            5,
            tuple(
                1.3 * (0.5 * a + 0.5 * b)
                for a, b in zip(cands[0].values, cands[4].values)
            ),
        )
        env.check_member(mixed)

    def test_check_member_rejects_flat_table(self):
        env = strict_envelope(4)
        flat = coverage_table(CoverageParams(1.0, 1), 4)
        with pytest.raises(EnvelopeConditionError):
            env.check_member(flat)

    def test_check_member_dimension(self):
        with pytest.raises(DimensionMismatchError):
            strict_envelope(4).check_member(linear_table(3))


class TestBuildCandidates:
    def test_pinned_small_case(self):
        env = strict_envelope(3, lb_alpha=1.0)
        cands = build_candidates(env, 3)
        assert [c.values for c in cands] == [
            (0.0, 1.0, 1.0, 1.0),
            (0.0, 1.0, 2.0, 2.0),
            (0.0, 1.0, 2.0, 3.0),
        ]

    def test_candidates_are_valid_and_normalized(self):
        env = curved_envelope(6)
        for cand in build_candidates(env, 6):
            assert cand.values[1] == pytest.approx(1.0, abs=1e-12)

    def test_n_bounds(self):
        env = strict_envelope(4)
        with pytest.raises(DimensionMismatchError):
            build_candidates(env, 5)
        with pytest.raises(ValidationError):
            build_candidates(env, 0)


class TestDecomposeGeneral:
    def test_recovers_known_coefficients(self):
        rng = np.random.default_rng(11)
        env = curved_envelope(8)
        cands = build_candidates(env, 8)
        for _ in range(25):
            theta = rng.uniform(0.0, 1.0, size=8)
            theta[int(rng.integers(8))] += 0.5
            values = np.zeros(9)
            for t, cand in zip(theta, cands):
                values += t * np.asarray(cand.values)
            w = WelfareTable(8, tuple(values))
            d = decompose_general(w, env)
            scale = theta.sum()
            assert d.scale == pytest.approx(scale, abs=1e-12)
            assert np.max(np.abs(np.asarray(d.coefficients) - theta / scale)) <= 1e-8
            for x in range(9):
                assert d.reconstruct(x) == pytest.approx(values[x], abs=1e-9)

    def test_coefficients_sum_to_one(self):
        env = strict_envelope(6)
        w = random_concave_table(np.random.default_rng(3), 6, lo=0.45, hi=1.0)
        d = decompose_general(w, env)
        assert sum(d.coefficients) == pytest.approx(1.0, abs=1e-12)
        assert d.scale == pytest.approx(w.values[1], abs=1e-15)

    def test_shared_marginals_degenerate(self):
        env = CandidateEnvelope(linear_table(3), linear_table(3))
        with pytest.raises(DegenerateEnvelopeError):
            decompose_general(linear_table(3).scaled(2.0), env)

    def test_table_outside_envelope_surfaces_as_negative_coefficient(self):
        env = strict_envelope(3)
        flat = coverage_table(CoverageParams(1.0, 1), 3)
        with pytest.raises(EnvelopeConditionError, match="negative coefficient"):
            decompose_general(flat, env)

    def test_does_not_gate_on_membership(self, monkeypatch):
        env = strict_envelope(5)
        cands = build_candidates(env, 5)
        mixed = WelfareTable(
            5,
            tuple(
                0.4 * a + 0.6 * b
                for a, b in zip(cands[1].values, cands[3].values)
            ),
        )

        def boom(self, w):
            raise AssertionError("membership must not be consulted")

        monkeypatch.setattr(CandidateEnvelope, "check_member", boom)
        d = decompose_general(mixed, env)
        assert d.coefficients == pytest.approx((0.0, 0.4, 0.0, 0.6, 0.0), abs=1e-9)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            decompose_general(linear_table(4), strict_envelope(5))

    def test_concave_decomposition_agreement(self):
        # with a linear upper envelope and a fully saturating lower envelope,
        # the generalized construction reproduces the curvature construction
        rng = np.random.default_rng(19)
        n = 7
        env = strict_envelope(n, lb_alpha=1.0)
        w = random_concave_table(rng, n)
        d_general = decompose_general(w, env)
        d_curv = decompose_concave(w, 1.0)
        general = [d_general.scale * c for c in d_general.coefficients]
        assert general == pytest.approx(list(d_curv.coefficients), abs=1e-10)


def test_curvature_matches_decomposition_threshold():
    # the curvature value is exactly the least c admitting a decomposition
    rng = np.random.default_rng(23)
    w = random_concave_table(rng, 6)
    c = curvature(w)
    assert decompose_concave(w, c).coefficients[-1] >= 0.0
    with pytest.raises(CurvatureExceededError):
        decompose_concave(w, max(c - 1e-6, 1e-9))
