"""Tests for classified maps in q-power form and their constructors."""

import random
import sys
from fractions import Fraction
from pathlib import Path
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

import numpy as np
import pytest

from pseudoellipse.errors import MatrixConditionError, ParameterError, PatternError
from pseudoellipse.exactpoly import (
    I, ONE, ZERO, GRat, HermPoly, conj_transpose, is_identity, matmul, matrix,
)
from pseudoellipse.existence import AdmissiblePattern, enumerate_patterns
from pseudoellipse.maps import (
    CandidateMap, apply_aut, build_monomial_map, condition_violations, default_witness_map,
    equidimensional_base, evaluate, factor_through_monomial, general_map, pattern_from_support,
    pythagorean_split, qpower_data,
)
from pseudoellipse.model import ProblemInstance, sample_points
from pseudoellipse.randexact import (
    random_coeff_matrix, random_general_map, random_grat, random_instance,
)
from pseudoellipse.verify import polarized_residual, verify_map

MAP_FIXTURES = [
    "p246_b.json", "p246_b_prime.json", "p246_a_1.json", "p246_a_2.json", "p246_a_3.json",
    "p246_a_4.json", "p246_b_moebius.json", "heisenberg.json", "unsorted_target.json",
]


class TestFamily:
    @pytest.mark.parametrize("name", MAP_FIXTURES)
    def test_fixture_maps_verify(self, load_map, name):
        H = load_map(name)
        report = verify_map(H)
        assert report.symbolic_zero, report.residual.to_text()
        assert report.numeric_ok
        assert report.transversal

    @pytest.mark.parametrize("name", MAP_FIXTURES)
    def test_w_coefficient_is_lambda_squared(self, load_map, name):
        H = load_map(name)
        assert H.last == HermPoly.w(H.inst.n).scale(H.lam * H.lam)

    def test_p246_b_numerators(self, load_map):
        H = load_map("p246_b.json")
        n = 3
        assert H.is_monomial()
        assert H.denom == HermPoly.one(n)
        assert H.numerators[0] == HermPoly.z(n, 2, 6)
        assert H.numerators[1].is_zero() and H.numerators[2].is_zero()
        assert H.numerators[3] == HermPoly.z(n, 0, 2)
        assert H.numerators[4] == HermPoly.z(n, 1, 4)

    def test_moebius_denominator(self, load_map):
        H = load_map("p246_b_moebius.json")
        n = 3
        assert H.beta == Fraction(5, 4)
        assert H.b_prime == (ZERO, ZERO, GRat("1/2"))
        expected = (HermPoly.one(n) - HermPoly.w(n).scale(GRat("1/3", "5/4"))
                    - HermPoly.z(n, 2, 6).scale(I))
        assert H.denom == expected

    def test_every_p246_pattern(self, p246_instance):
        for pattern in enumerate_patterns(p246_instance):
            for spread in (False, True):
                H = default_witness_map(p246_instance, pattern, spread=spread)
                assert polarized_residual(H).is_zero()
                if spread:
                    assert H.pattern == pattern

    def test_random_maps(self):
        rng = random.Random(11)
        for _ in range(40):
            inst = random_instance(rng, max_dim=4, max_exp=6)
            if not any(True for _ in enumerate_patterns(inst, limit=1)):
                continue
            H = random_general_map(inst, None, rng)
            assert polarized_residual(H).is_zero(), H.inst.to_dict()
            assert H.last.w_linear_coefficient() == H.lam * H.lam


class TestConditions:
    def test_not_orthonormal(self, p246_instance):
        W = [[0, 0, 0, 1, 0], [0, 0, 0, 0, 1], [1, 1, 0, 0, 0]]
        with pytest.raises(MatrixConditionError, match=r"\(a\)"):
            build_monomial_map(p246_instance, None, W)

    def test_weak_column_support(self, p246_instance):
        W = [[0, 0, 0, 1, 0], [0, 0, 0, 0, 1], [1, 0, 0, 0, 0]]
        wrong = AdmissiblePattern.from_mapping({3: 0, 4: 2})
        problems = condition_violations(p246_instance, wrong, W)
        assert any("(b)" in p for p in problems)
        with pytest.raises(MatrixConditionError):
            general_map(p246_instance, wrong, W)

    def test_row_orthonormality_both_directions(self):
        rng = random.Random(31)
        done = 0
        while done < 60:
            inst = random_instance(rng, max_dim=4, max_exp=4)
            patterns = list(enumerate_patterns(inst, limit=20))
            if not patterns:
                continue
            n, N = inst.n, inst.N
            kind = done % 3
            if kind == 2:
                W = [[random_grat(rng, 2, 3) for _ in range(N)] for _ in range(n)]
            else:
                W = [list(row) for row in random_coeff_matrix(inst, rng.choice(patterns), rng)]
            if kind == 1:
                i = rng.randrange(n)
                j = next(j for j, x in enumerate(W[i]) if x)
                W[i][j] = W[i][j] * 2
            W = matrix(W)
            unitary_rows = is_identity(matmul(W, conj_transpose(W)))
            lhs = sum((P * P.bar_swap() for P in qpower_data(inst, W).numerators),
                      HermPoly.zero(n))
            rhs = sum((HermPoly.monomial(n, z={i: inst.p[i]}, chi={i: inst.p[i]})
                       for i in range(n)), HermPoly.zero(n))
            assert (lhs == rhs) == unitary_rows
            if kind < 2:
                assert unitary_rows == (kind == 0)
            done += 1

    def test_raw_entries(self, p246_instance):
        W = [[0, 0, 0, "-1", 0], [0, 0, 0, 0, 1], [1, 0, 0, 0, 0]]
        pattern = pattern_from_support(p246_instance, W)
        assert pattern.mapping == {3: 0, 4: 1}
        assert condition_violations(p246_instance, pattern, W) == []
        scaled = [[0, 0, 0, 2, 0], [0, 0, 0, 0, 1], [1, 0, 0, 0, 0]]
        problems = condition_violations(p246_instance, pattern, scaled)
        assert problems == ["condition (a) fails: W W* != I"]

    def test_pattern_from_support(self, p246_instance):
        W = [[0, 0, 0, 1, 0], [0, 0, 0, 0, 1], [1, 0, 0, 0, 0]]
        assert pattern_from_support(p246_instance, W).mapping == {3: 0, 4: 1}
        doubled = [[0, 0, 0, "3/5", 0], [0, 0, 0, "4/5", 1], [1, 0, 0, 0, 0]]
        with pytest.raises(MatrixConditionError):
            pattern_from_support(p246_instance, doubled)

    def test_divisibility_violation(self):
        inst = ProblemInstance.of([3, 5], [1, 2, 2])
        W = [[0, 1, 0], [1, 0, 0]]
        with pytest.raises(PatternError):
            general_map(inst, AdmissiblePattern((1,), (0,)), W)

    def test_bad_parameters(self, p246_instance):
        W = [[0, 0, 0, 1, 0], [0, 0, 0, 0, 1], [1, 0, 0, 0, 0]]
        with pytest.raises(ParameterError):
            general_map(p246_instance, None, W, lam=0)
        with pytest.raises(ParameterError):
            general_map(p246_instance, None, W, r=I)
        with pytest.raises(ParameterError):
            general_map(p246_instance, None, W, c=[0, 0, 0, 1, 0])
        with pytest.raises(ParameterError):
            general_map(p246_instance, None, W, c=[1, 2])

    def test_no_linear_block_forbids_shift(self):
        inst = ProblemInstance.of([2, 2], [2, 2])
        W = [[1, 0], [0, 1]]
        assert polarized_residual(general_map(inst, None, W)).is_zero()
        with pytest.raises(ParameterError):
            general_map(inst, None, W, c=[1, 0])

    def test_with_pattern_from_support(self, p246_instance):
        pattern = AdmissiblePattern.from_mapping({3: 2, 4: 2})
        H = default_witness_map(p246_instance, pattern, spread=True)
        assert H.with_pattern_from_support().pattern == pattern
        sparse = default_witness_map(p246_instance, pattern)
        assert sparse.pattern == AdmissiblePattern((3,), (2,))


class TestConstructors:
    def test_pythagorean_split(self):
        for m in range(1, 6):
            parts = pythagorean_split(m)
            assert len(parts) == m
            assert all(x > 0 for x in parts)
            assert sum(x * x for x in parts) == 1
        with pytest.raises(ValueError):
            pythagorean_split(0)

    def test_default_witness_layout(self, p246_instance):
        pattern = AdmissiblePattern.from_mapping({3: 0, 4: 1})
        H = default_witness_map(p246_instance, pattern)
        assert H.W[2][0] == ONE
        assert H.W[0][3] == ONE and H.W[1][4] == ONE

    def test_equidimensional_base(self):
        inst = ProblemInstance.of([4, 3, 1], [1, 3, 2])
        H = equidimensional_base(inst, [2, 1, 0])
        assert polarized_residual(H).is_zero()
        assert H.numerators[2] == HermPoly.z(3, 0, 4)

    def test_equidimensional_base_errors(self, p246_instance):
        with pytest.raises(ParameterError):
            equidimensional_base(p246_instance, [0, 1, 2])
        inst = ProblemInstance.of([3, 2], [1, 2])
        with pytest.raises(PatternError):
            equidimensional_base(inst, [1, 0])
        with pytest.raises(ParameterError):
            equidimensional_base(inst, [0, 0])

    def test_factor_through_monomial(self, load_map):
        H = load_map("p246_b_moebius.json")
        T, base = factor_through_monomial(H)
        assert base.is_monomial()
        assert base.W == H.W
        assert apply_aut(T, base).same_qpower(H)

    def test_radical_components(self, load_map):
        comps = load_map("p246_a_1.json").radical_components()
        assert len(comps) == 6
        assert comps[0] == "z1^2"
        assert comps[3] == "(1/3)^(1/2)*z3^3"
        assert comps[-1] == "w"

    def test_radical_components_user_order(self, load_map):
        comps = load_map("unsorted_target.json").radical_components()
        # target q = (2, 1, 3): the first user coordinate is the weak one
        assert comps[0] == "z1"
        assert comps[1] == "z2^3"
        assert comps[2] == "0"


class TestEvaluate:
    def test_shape_and_values(self, load_map):
        H = load_map("p246_b.json")
        z = np.array([[0.5, 0.1j, 0.3], [0.2, 0.2, 0.2]])
        w = np.array([0.1 + 0.2j, 0.05j])
        values = evaluate(H, z, w)
        assert values.shape == (2, 6)
        assert values[0, 0] == pytest.approx(0.3 ** 6)
        assert values[0, 3] == pytest.approx(0.5)
        assert values[1, 5] == pytest.approx(0.05j)

    @pytest.mark.parametrize("name", MAP_FIXTURES)
    def test_values_stay_on_target(self, load_map, name):
        H = load_map(name)
        N = H.inst.N
        z, w = sample_points(H.inst.source, 100, np.random.default_rng(11), radius=0.2,
                             u_range=0.2)
        values = evaluate(H, z, w)
        height = np.sum(np.abs(values[:, :N]) ** (2 * np.asarray(H.inst.q)), axis=-1)
        assert np.max(np.abs(values[:, N].imag - height)) < 1e-9

    def test_random_values_stay_on_target(self):
        rng = random.Random(32)
        done = 0
        while done < 20:
            inst = random_instance(rng, max_dim=4, max_exp=4)
            if not any(True for _ in enumerate_patterns(inst, limit=1)):
                continue
            H = random_general_map(inst, None, rng)
            z, w = sample_points(inst.source, 100, np.random.default_rng(done), radius=0.3,
                                 u_range=0.3)
            keep = np.abs(H.denom.evaluate(z, w)) > 0.1
            values = evaluate(H, z[keep], w[keep])
            height = np.sum(np.abs(values[:, :inst.N]) ** (2 * np.asarray(inst.q)), axis=-1)
            gap = np.abs(values[:, inst.N].imag - height)
            assert np.all(gap <= 1e-9 * np.maximum(1.0, height))
            done += 1


class TestCandidate:
    def test_rejects_polar_terms(self):
        inst = ProblemInstance.of([1], [1])
        with pytest.raises(ParameterError):
            CandidateMap(inst, (HermPoly.chi(1, 0),), HermPoly.one(1), HermPoly.w(1))

    def test_rejects_wrong_count(self):
        inst = ProblemInstance.of([1], [1])
        with pytest.raises(ParameterError):
            CandidateMap(inst, (), HermPoly.one(1), HermPoly.w(1))

    def test_from_components_with_denominator(self):
        inst = ProblemInstance.of([1], [1])
        delta = HermPoly.one(1) - HermPoly.w(1).scale("1/2")
        H = CandidateMap.from_components(inst, [HermPoly.z(1, 0)], denom=delta)
        assert H.denom == delta
        assert polarized_residual(H).is_zero()

    def test_from_components_raises_to_q(self):
        inst = ProblemInstance.of([2, 4], [1, 2, 2])
        comps = [HermPoly.zero(2), HermPoly.z(2, 0), HermPoly.z(2, 1, 2)]
        H = CandidateMap.from_components(inst, comps)
        assert H.numerators[1] == HermPoly.z(2, 0, 2)
        assert polarized_residual(H).is_zero()

    def test_qpower_data_matches_classified(self, load_map):
        H = load_map("heisenberg.json")
        data = qpower_data(H.inst, H.W, H.lam, H.r, H.c)
        assert data.same(H.qpower)
        assert CandidateMap.from_classified(H).qpower.same(H.qpower)
