"""Tests for symbolic and numeric membership checks."""

import random
import sys
from pathlib import Path
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

import numpy as np
import pytest

from pseudoellipse.errors import DenominatorVanishes, ParameterError
from pseudoellipse.exactpoly import ZERO, HermPoly
from pseudoellipse.existence import enumerate_patterns
from pseudoellipse.maps import (
    CandidateMap, default_witness_map, evaluate, general_map, qpower_data,
)
from pseudoellipse.model import ProblemInstance, defining_polynomial
from pseudoellipse.randexact import (
    random_general_map, random_grat, random_instance, random_rational,
)
from pseudoellipse.serialize import candidate_from_json
from pseudoellipse.verify import (
    denominator_nonvanishing, is_transversal, membership_errors, numeric_membership,
    polarized_residual, residual_symmetry_holds, transversal_coefficient, verify_map,
)

MUTATION_TOLERANCE = 1e-4
MAP_FIXTURES = [
    "p246_b.json", "p246_b_prime.json", "p246_a_1.json", "p246_a_2.json", "p246_a_3.json",
    "p246_a_4.json", "p246_b_moebius.json", "heisenberg.json", "unsorted_target.json",
]


def feasible_instances(rng, count, **kwargs):
    found = 0
    while found < count:
        inst = random_instance(rng, **kwargs)
        patterns = list(enumerate_patterns(inst, limit=50))
        if patterns:
            found += 1
            yield inst, patterns


def perturb_exponent(H, rng):
    """Raise the z-exponent of one numerator term by one."""
    data = H.qpower
    n = H.inst.n
    terms = [(j, exps, coeff) for j, num in enumerate(data.numerators)
             for exps, coeff in sorted(num.terms.items()) if any(exps[:n])]
    j, exps, coeff = rng.choice(terms)
    i = next(v for v in range(n) if exps[v])
    bumped = exps[:i] + (exps[i] + 1,) + exps[i + 1:]
    num = data.numerators[j] - HermPoly(n, {exps: coeff}) + HermPoly(n, {bumped: coeff})
    nums = data.numerators[:j] + (num,) + data.numerators[j + 1:]
    return CandidateMap(H.inst, nums, data.denom, data.last)


def change_entry(H, rng, factor):
    """Scale one nonzero entry of W (factor 0 zeroes it) and rebuild the formula."""
    entries = [(i, j) for i, row in enumerate(H.W) for j, x in enumerate(row) if x]
    i, j = rng.choice(entries)
    W = [list(row) for row in H.W]
    W[i][j] = W[i][j] * factor if factor else ZERO
    return CandidateMap.from_qpower(H.inst, qpower_data(H.inst, W, H.lam, H.r, H.c))


class TestResidual:
    def test_identity_candidate(self, load_fixture):
        H = candidate_from_json(load_fixture("candidates/identity.json"))
        assert polarized_residual(H).is_zero()
        assert is_transversal(H)

    def test_quadratic_last_is_not_transversal(self, load_fixture):
        H = candidate_from_json(load_fixture("candidates/quadratic_last.json"))
        report = verify_map(H)
        assert not report.transversal
        assert not report.symbolic_zero

    def test_vanishing_denominator_at_origin(self):
        inst = ProblemInstance.of([1], [1])
        H = CandidateMap(inst, (HermPoly.z(1, 0),), HermPoly.w(1), HermPoly.w(1))
        assert transversal_coefficient(H) is None
        assert not is_transversal(H)

    def test_transversal_coefficient_is_lambda_squared(self, load_map):
        H = load_map("p246_b_moebius.json")
        assert transversal_coefficient(H) == H.lam * H.lam

    def test_symmetry_of_residual(self, load_map):
        rng = random.Random(9)
        H = load_map("p246_b_moebius.json")
        Q = defining_polynomial(H.inst.source)
        assert residual_symmetry_holds(polarized_residual(H), Q)
        for _ in range(5):
            broken = change_entry(H, rng, 2)
            R = polarized_residual(broken)
            assert not R.is_zero()
            assert residual_symmetry_holds(R, Q)

    def test_report_dict(self, load_map):
        out = verify_map(load_map("p246_b.json"), samples=10).to_dict()
        assert set(out) == {"symbolic_zero", "residual", "residual_terms", "numeric_max_error",
                            "transversal", "w_coefficient", "denom_min_modulus", "samples"}
        assert out["symbolic_zero"] is True
        assert out["residual"] == "0"
        assert out["w_coefficient"] == "1+0*i"
        assert out["samples"] == 10


class TestMutations:
    def test_mutations_are_caught(self):
        rng = random.Random(5)
        mutations = 0
        for inst, patterns in feasible_instances(rng, 1000, max_dim=4, max_exp=4):
            H = default_witness_map(inst, rng.choice(patterns), spread=rng.random() < 0.5)
            kind = mutations % 3
            if kind == 0:
                broken = perturb_exponent(H, rng)
            elif kind == 1:
                broken = change_entry(H, rng, 0)
            else:
                broken = change_entry(H, rng, 2)
            assert not polarized_residual(broken).is_zero()
            error = numeric_membership(broken, nsamples=100, seed=mutations, radius=1.5)
            assert error > MUTATION_TOLERANCE, (inst.to_dict(), kind, error)
            mutations += 1
        assert mutations == 1000

    @pytest.mark.parametrize("name", MAP_FIXTURES)
    def test_fixture_maps_and_their_mutations(self, name, load_map):
        H = load_map(name)
        assert polarized_residual(H).is_zero()
        assert numeric_membership(H, nsamples=1000, radius=0.2, u_range=0.2) < 1e-9
        rng = random.Random(name)
        for k in range(9):
            if k % 3 == 0:
                broken = perturb_exponent(H, rng)
            else:
                broken = change_entry(H, rng, 0 if k % 3 == 1 else 2)
            assert not polarized_residual(broken).is_zero(), (name, k)
            error = numeric_membership(broken, nsamples=100, seed=k, radius=1.5)
            assert error > MUTATION_TOLERANCE, (name, k, error)

    def test_moebius_map_mutations(self):
        rng = random.Random(7)
        mutations = 0
        for inst, patterns in feasible_instances(rng, 200, max_dim=4, max_exp=4):
            H = random_general_map(inst, rng.choice(patterns), rng)
            kind = mutations % 3
            if kind == 0:
                broken = perturb_exponent(H, rng)
            else:
                broken = change_entry(H, rng, 0 if kind == 1 else 2)
            assert not polarized_residual(broken).is_zero(), (inst.to_dict(), kind)
            mutations += 1
        assert mutations == 200


class TestNumeric:
    def test_random_maps_cross_check(self):
        rng = random.Random(21)
        for inst, patterns in feasible_instances(rng, 30, max_dim=4, max_exp=5):
            H = random_general_map(inst, rng.choice(patterns), rng)
            report = verify_map(H, samples=100, seed=3, tol=1e-6, radius=0.5, u_range=0.5)
            assert report.symbolic_zero
            assert report.numeric_ok, report.numeric_max_error
            assert report.consistent

    def test_denominator_never_vanishes(self, p246_instance):
        rng = random.Random(8)
        pattern = next(enumerate_patterns(p246_instance))
        W = default_witness_map(p246_instance, pattern).W
        for k in range(50):
            c = [random_grat(rng, 3, 3) for _ in range(p246_instance.s)]
            r = random_rational(rng)
            H = general_map(p246_instance, pattern, W, 1, r, c)
            assert denominator_nonvanishing(H, nsamples=10_000, seed=k) > 0

    def test_membership_errors_small_on_valid_map(self, load_map):
        H = load_map("heisenberg.json")
        z = np.array([[0.1, 0.2j], [0.3 - 0.1j, 0.05]])
        height = np.sum(np.abs(z) ** 2, axis=-1)
        w = np.array([0.2, -0.1]) + 1j * height
        assert np.all(membership_errors(H, z, w) < 1e-12)

    def test_bad_tolerance(self, load_map):
        with pytest.raises(ParameterError):
            numeric_membership(load_map("p246_b.json"), tol=0)

    def test_evaluate_at_pole(self):
        inst = ProblemInstance.of([1], [1])
        H = general_map(inst, None, [[1]], 1, 2)
        with pytest.raises(DenominatorVanishes):
            evaluate(H, np.zeros((1, 1)), np.array([0.5]))

    def test_origin_only(self, load_map):
        assert numeric_membership(load_map("p246_b.json"), nsamples=0) == 0.0
