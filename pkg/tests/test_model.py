"""Tests for exponent signatures, problem instances and model sampling."""

import sys
from pathlib import Path
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pseudoellipse.errors import CodimensionError, SignatureError
from pseudoellipse.exactpoly import I, HermPoly
from pseudoellipse.model import (
    ExponentSignature, ProblemInstance, defining_polynomial, normalize, on_model,
    parse_exponents, reality_residual, sample_point, sample_points, source_signature,
)

exponent_lists = st.lists(st.integers(1, 6), min_size=1, max_size=6)


class TestNormalize:
    def test_ones_first_stable(self):
        sig = normalize([2, 1, 3, 1])
        assert sig.exps == (1, 1, 2, 3)
        assert sig.norm_perm == (1, 3, 0, 2)
        assert sig.s == 2
        assert list(sig.linear_indices) == [0, 1]
        assert list(sig.weak_indices) == [2, 3]
        assert not sig.is_normalized

    def test_user_order_round_trip(self):
        sig = normalize([2, 1, 3])
        assert sig.user_exps == (2, 1, 3)
        assert sig.denormalize(sig.normalize_values(["a", "b", "c"])) == ("a", "b", "c")
        assert sig.to_user_index(0) == 1
        assert sig.from_user_index(1) == 0

    def test_to_dict(self):
        assert normalize([2, 1]).to_dict() == {"exps": [2, 1], "normalized": [1, 2], "s": 1}

    def test_source_keeps_order(self):
        sig = source_signature([3, 1, 2])
        assert sig.exps == (3, 1, 2)
        assert sig.is_normalized

    @pytest.mark.parametrize("raw", [[], [0], [2, -1], ["x"]])
    def test_rejects_bad_exponents(self, raw):
        with pytest.raises(SignatureError):
            normalize(raw)

    def test_rejects_bad_permutation(self):
        with pytest.raises(SignatureError):
            ExponentSignature((1, 2), (0, 0))

    def test_index_out_of_range(self):
        with pytest.raises(SignatureError):
            normalize([1, 2]).from_user_index(5)

    def test_parse_exponents(self):
        assert parse_exponents("2, 4,6") == [2, 4, 6]
        with pytest.raises(SignatureError):
            parse_exponents("2,a")

    @given(exponent_lists)
    def test_normalization_properties(self, raw):
        sig = normalize(raw)
        assert sorted(sig.exps) == sorted(raw)
        assert all(e == 1 for e in sig.exps[:sig.s])
        assert all(e > 1 for e in sig.exps[sig.s:])
        assert list(sig.user_exps) == raw


class TestProblemInstance:
    def test_p246(self, p246_instance):
        inst = p246_instance
        assert (inst.n, inst.N, inst.s) == (3, 5, 3)
        assert inst.codimension_ok()
        assert inst.to_dict() == {"p": [2, 4, 6], "q": [1, 1, 1, 2, 2]}

    def test_target_below_source(self):
        with pytest.raises(CodimensionError):
            ProblemInstance.of([1, 1], [1])

    def test_codimension_too_large(self):
        inst = ProblemInstance.of([2], [1, 1])
        assert not inst.codimension_ok()
        with pytest.raises(CodimensionError):
            inst.require_classifiable()


class TestDefiningPolynomial:
    def test_shape(self):
        q = defining_polynomial(source_signature([2]))
        expected = HermPoly.tau(1) + HermPoly.monomial(1, z={0: 2}, chi={0: 2}, coeff=2 * I)
        assert q == expected

    @given(exponent_lists)
    def test_reality_condition(self, raw):
        assert reality_residual(normalize(raw)).is_zero()


class TestSampling:
    def test_points_lie_on_model(self):
        sig = source_signature([2, 4, 6])
        z, w = sample_points(sig, 200, np.random.default_rng(1), radius=1.5, u_range=2.0)
        assert z.shape == (200, 3) and w.shape == (200,)
        height = np.sum(np.abs(z) ** (2 * np.array([2, 4, 6])), axis=-1)
        assert np.allclose(w.imag, height)
        assert np.all(np.abs(z) <= 1.5)
        assert np.all(np.abs(w.real) <= 2.0)

    def test_sample_point_override(self):
        sig = source_signature([1, 2])
        z, w = sample_point(sig, seed=3, z=[1j, 1], u=0.5)
        assert w == pytest.approx(0.5 + 2j)
        assert np.allclose(z, [1j, 1])

    def test_sample_point_deterministic(self):
        sig = source_signature([3])
        assert sample_point(sig, seed=7)[1] == sample_point(sig, seed=7)[1]

    def test_on_model(self):
        w = on_model(source_signature([1, 1]), np.array([[1, 1j]]), np.array([0.25]))
        assert w[0] == pytest.approx(0.25 + 2j)
