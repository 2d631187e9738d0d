"""Seeded generators of exact parameters (maps, unitaries, automorphisms)."""

from __future__ import annotations

import random
from fractions import Fraction

from .autgroup import CanonicalAut, Dilation, LinearPhase, Mobius, Perm
from .exactpoly import (
    ONE, ZERO, GRat, Matrix, UnimodularGRat, hermitian_dot, identity, matmul, matrix,
)
from .existence import AdmissiblePattern, enumerate_patterns
from .maps import ClassifiedMap, general_map, pythagorean_split
from .model import ExponentSignature, ProblemInstance


def random_rational(rng: random.Random, max_num: int = 5, max_den: int = 4,
                    positive: bool = False) -> Fraction:
    num = rng.randint(1, max_num) if positive else rng.randint(-max_num, max_num)
    return Fraction(num, rng.randint(1, max_den))


def random_grat(rng: random.Random, max_num: int = 5, max_den: int = 4) -> GRat:
    return GRat(random_rational(rng, max_num, max_den), random_rational(rng, max_num, max_den))


def random_unimodular(rng: random.Random, bound: int = 4) -> UnimodularGRat:
    a = b = 0
    while a == 0 and b == 0:
        a, b = rng.randint(-bound, bound), rng.randint(-bound, bound)
    return UnimodularGRat.from_gaussian_integer(a, b)


def pythagorean_pair(rng: random.Random, bound: int = 4) -> tuple[Fraction, Fraction]:
    """(c, s) with c^2 + s^2 = 1, both nonzero."""
    while True:
        a, b = rng.randint(1, bound), rng.randint(1, bound)
        if a != b:
            d = a * a + b * b
            return Fraction(a * a - b * b, d), Fraction(2 * a * b, d)


def _rotation(k: int, i: int, j: int, c: Fraction, s: Fraction) -> Matrix:
    rows = [list(r) for r in identity(k)]
    rows[i][i], rows[i][j] = GRat.of(c), GRat.of(-s)
    rows[j][i], rows[j][j] = GRat.of(s), GRat.of(c)
    return matrix(rows)


def _householder(v: list[GRat]) -> Matrix:
    """I - 2 v v* / |v|^2, an exact unitary involution."""
    k = len(v)
    norm = hermitian_dot(v, v).re
    return tuple(tuple((ONE if a == b else ZERO) - v[a] * v[b].conj() * Fraction(2) / norm
                       for b in range(k)) for a in range(k))


def random_unitary(rng: random.Random, k: int, steps: int = 2) -> Matrix:
    """Product of a permutation, unimodular diagonal, rotations and reflections."""
    if k == 0:
        return ()
    perm = list(range(k))
    rng.shuffle(perm)
    U = tuple(tuple(ONE if perm[a] == b else ZERO for b in range(k)) for a in range(k))
    diag = tuple(tuple(random_unimodular(rng) if a == b else ZERO for b in range(k))
                 for a in range(k))
    U = matmul(U, diag)
    for _ in range(steps if k > 1 else 0):
        i, j = rng.sample(range(k), 2)
        U = matmul(U, _rotation(k, i, j, *pythagorean_pair(rng)))
        v = [GRat(rng.randint(-2, 2), rng.randint(-2, 2)) for _ in range(k)]
        if any(v):
            U = matmul(U, _householder(v))
    return U


def random_coeff_matrix(inst: ProblemInstance, pattern: AdmissiblePattern,
                        rng: random.Random) -> Matrix:
    """A W satisfying conditions (a) and (b) for the pattern.

    Rows of uncovered source indices live in the linear block. A covered row
    either puts all its weight on its weak columns or, while the linear block
    has room, splits it as t^2 + w^2 = 1. Weak phases are q-th powers of
    exact phases, so every random map is an exact orbit point of a monomial map.
    """
    n, N, s = inst.n, inst.N, inst.s
    U = random_unitary(rng, s)
    free_rows = list(range(s))
    rng.shuffle(free_rows)
    W = [[ZERO] * N for _ in range(n)]
    uncovered = [i for i in range(n) if i not in pattern.image]
    for i in uncovered:
        W[i][:s] = U[free_rows.pop()]
    for i in sorted(pattern.image):
        weight = Fraction(1)
        if free_rows and rng.random() < 0.5:
            t, weight = pythagorean_pair(rng)
            W[i][:s] = [x * t for x in U[free_rows.pop()]]
        pre = pattern.preimage(i)
        for k, part in zip(pre, pythagorean_split(len(pre))):
            W[i][k] = random_unimodular(rng) ** inst.q[k] * (part * weight)
    return matrix(W)


def random_general_map(inst: ProblemInstance, pattern: AdmissiblePattern | None,
                       rng: random.Random, with_moebius: bool = True) -> ClassifiedMap:
    if pattern is None:
        patterns = list(enumerate_patterns(inst, limit=50))
        pattern = rng.choice(patterns)
    W = random_coeff_matrix(inst, pattern, rng)
    if not with_moebius:
        return general_map(inst, pattern, W)
    lam = random_rational(rng, positive=True)
    r = random_rational(rng)
    c = [random_grat(rng, 3, 3) for _ in range(inst.s)]
    return general_map(inst, pattern, W, lam, r, c)


def random_q_permutation(target: ExponentSignature, rng: random.Random) -> tuple[int, ...]:
    s, N = target.s, len(target)
    groups: dict[int, list[int]] = {}
    for k in range(s, N):
        groups.setdefault(target.exps[k], []).append(k)
    sigma = [0] * (N - s)
    for members in groups.values():
        shuffled = members[:]
        rng.shuffle(shuffled)
        for k, image in zip(members, shuffled):
            sigma[k - s] = image
    return tuple(sigma)


def random_aut(target: ExponentSignature, rng: random.Random) -> CanonicalAut:
    s, N = target.s, len(target)
    return CanonicalAut(
        target,
        random_rational(rng, positive=True),
        random_unitary(rng, s),
        tuple(random_unimodular(rng) for _ in range(N - s)),
        tuple(random_grat(rng, 3, 3) for _ in range(s)),
        random_rational(rng),
        random_q_permutation(target, rng),
    )


def random_generator(target: ExponentSignature, rng: random.Random):
    s, N = target.s, len(target)
    kind = rng.choice(["perm", "dilation", "mobius", "linear"])
    if kind == "perm":
        return Perm(target, random_q_permutation(target, rng))
    if kind == "dilation":
        return Dilation(target, random_rational(rng, positive=True))
    if kind == "mobius":
        return Mobius(target, tuple(random_grat(rng, 3, 3) for _ in range(s)),
                      random_rational(rng))
    return LinearPhase(target, random_unitary(rng, s, steps=1),
                       tuple(random_unimodular(rng) for _ in range(N - s)))


def random_word(target: ExponentSignature, length: int, rng: random.Random) -> list:
    return [random_generator(target, rng) for _ in range(length)]


def random_instance(rng: random.Random, max_dim: int = 6, max_exp: int = 12,
                    equidimensional: bool = False) -> ProblemInstance:
    """Random instance with n <= N <= max_dim and N - n < n."""
    n = rng.randint(1, max_dim)
    N = n if equidimensional else rng.randint(n, min(max_dim, 2 * n - 1))
    p = [rng.randint(1, max_exp) for _ in range(n)]
    q = [rng.randint(1, max_exp) if rng.random() < 0.7 else 1 for _ in range(N)]
    return ProblemInstance.of(p, q)
