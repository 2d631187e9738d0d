"""
Stability group Aut(P^N_q, 0) with exact parameters.

Every element acts on classified maps through five parameters:

    lam    positive rational dilation
    U      s x s unitary on the linear block
    mu     unimodular phases of the weak coordinates (z-level)
    beta   Moebius shift (s entries), rho its real part
    sigma  q-preserving permutation of the weak indices

and the normal form is  Delta_lam o Lambda_{U,mu} o Psi_{beta,rho} o Sigma_sigma.
Words are read left to right: the first letter acts first.
"""

from __future__ import annotations

import itertools
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Sequence, Union

import numpy as np
import sympy
from sympy.solvers.diophantine.diophantine import cornacchia

from .errors import MatrixConditionError, ParameterError
from .exactpoly import (
    ONE, ZERO, GRat, Matrix, conj_transpose, hermitian_dot, identity as identity_matrix,
    inverse, is_identity, is_unitary, matmul, matrix, nullspace, rref, to_fraction,
    to_sympy, vecmat,
)
from .existence import AdmissiblePattern
from .maps import ClassifiedMap, apply_aut
from .model import ExponentSignature, ProblemInstance, source_signature

log = logging.getLogger(__name__)


def _check_sigma(target: ExponentSignature, sigma: Sequence[int]) -> tuple[int, ...]:
    s, N = target.s, len(target)
    sigma = tuple(int(k) for k in sigma)
    if sorted(sigma) != list(range(s, N)):
        raise ParameterError(f"sigma must permute the weak indices {s + 1}..{N}")
    for pos, k in enumerate(sigma):
        if target.exps[s + pos] != target.exps[k]:
            raise ParameterError(f"sigma does not preserve q at index {s + pos + 1}")
    return sigma


def _check_phases(target: ExponentSignature, mu: Sequence) -> tuple[GRat, ...]:
    mu = tuple(GRat.of(x) for x in mu)
    if len(mu) != len(target) - target.s:
        raise ParameterError(f"expected {len(target) - target.s} phases, got {len(mu)}")
    for x in mu:
        if x.norm2() != 1:
            raise ParameterError(f"phase {x} is not unimodular")
    return mu


@dataclass(frozen=True)
class CanonicalAut:
    """T = Delta_lam o Lambda_{U,mu} o Psi_{beta,rho} o Sigma_sigma.

    ``sigma[k - s]`` is the image of weak index k (absolute 0-based index).
    """
    target: ExponentSignature
    lam: Fraction
    U: Matrix
    mu: tuple[GRat, ...]
    beta: tuple[GRat, ...]
    rho: Fraction
    sigma: tuple[int, ...]

    def __post_init__(self):
        s = self.target.s
        lam = to_fraction(self.lam.re if isinstance(self.lam, GRat) else self.lam)
        if lam <= 0:
            raise ParameterError(f"lambda must be positive, got {lam}")
        U = matrix(self.U)
        if len(U) != s or any(len(row) != s for row in U):
            raise MatrixConditionError(f"U must be {s}x{s}")
        if s and not is_unitary(U):
            raise MatrixConditionError("U is not unitary")
        beta = tuple(GRat.of(x) for x in self.beta)
        if len(beta) != s:
            raise ParameterError(f"beta must have {s} entries, got {len(beta)}")
        rho = self.rho
        if isinstance(rho, GRat):
            if not rho.is_real():
                raise ParameterError("rho must be real")
            rho = rho.re
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "U", U)
        object.__setattr__(self, "mu", _check_phases(self.target, self.mu))
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "rho", to_fraction(rho))
        object.__setattr__(self, "sigma", _check_sigma(self.target, self.sigma))

    @property
    def nus(self) -> tuple[GRat, ...]:
        """Phases at q-power level: nu_k = mu_k^q_k."""
        s = self.target.s
        return tuple(m ** self.target.exps[s + t] for t, m in enumerate(self.mu))

    def to_canonical(self) -> "CanonicalAut":
        return self

    def is_identity(self) -> bool:
        s = self.target.s
        return (self.lam == 1 and is_identity(self.U) and all(m == ONE for m in self.mu)
                and not any(self.beta) and self.rho == 0
                and self.sigma == tuple(range(s, len(self.target))))

    def same_as(self, other: "CanonicalAut") -> bool:
        return self == other

    def qpower_matrix(self) -> Matrix:
        """N x N block matrix V with W' = W V."""
        s, N = self.target.s, len(self.target)
        rows = [[ZERO] * N for _ in range(N)]
        for i in range(s):
            for j in range(s):
                rows[i][j] = self.U[i][j]
        for k, nu in zip(range(s, N), self.nus):
            rows[self.sigma[k - s]][k] = nu
        return matrix(rows)

    def as_map(self) -> ClassifiedMap:
        """The automorphism as a self-map of P^N_q in normalized coordinates."""
        s, N = self.target.s, len(self.target)
        inst = ProblemInstance(source_signature(self.target.exps), self.target)
        pattern = AdmissiblePattern(tuple(range(s, N)), self.sigma)
        c = vecmat(self.beta, self.U) if s else ()
        return ClassifiedMap(inst, pattern, self.qpower_matrix(), self.lam, self.rho, c)

    def to_dict(self) -> dict:
        return {
            "lambda": str(self.lam),
            "U": [[x.to_text() for x in row] for row in self.U],
            "mu": [x.to_text() for x in self.mu],
            "beta": [x.to_text() for x in self.beta],
            "rho": str(self.rho),
            "sigma": [k + 1 for k in self.sigma],
        }


def identity(target: ExponentSignature) -> CanonicalAut:
    s, N = target.s, len(target)
    return CanonicalAut(target, Fraction(1), identity_matrix(s), (ONE,) * (N - s),
                        (ZERO,) * s, Fraction(0), tuple(range(s, N)))


# ---- generators ----

@dataclass(frozen=True)
class Perm:
    """Sigma_sigma: permutes weak coordinates with equal exponents."""
    target: ExponentSignature
    sigma: tuple[int, ...]

    def to_canonical(self) -> CanonicalAut:
        base = identity(self.target)
        return CanonicalAut(self.target, base.lam, base.U, base.mu, base.beta, base.rho,
                            tuple(self.sigma))


@dataclass(frozen=True)
class Dilation:
    target: ExponentSignature
    lam: Fraction

    def to_canonical(self) -> CanonicalAut:
        base = identity(self.target)
        return CanonicalAut(self.target, self.lam, base.U, base.mu, base.beta, base.rho,
                            base.sigma)


@dataclass(frozen=True)
class Mobius:
    """Psi_{b,r}; b lives on the linear block only."""
    target: ExponentSignature
    b: tuple[GRat, ...]
    r: Fraction

    def to_canonical(self) -> CanonicalAut:
        s = self.target.s
        b = tuple(GRat.of(x) for x in self.b)
        if any(b[s:]):
            raise ParameterError("b_k must vanish for weak indices k > s")
        b = b[:s] + (ZERO,) * (s - len(b[:s]))
        base = identity(self.target)
        return CanonicalAut(self.target, base.lam, base.U, base.mu, b, self.r, base.sigma)


@dataclass(frozen=True)
class LinearPhase:
    """Lambda_{U,mu}: unitary on the linear block, phases on the weak block."""
    target: ExponentSignature
    U: Matrix
    mu: tuple[GRat, ...] = field(default=())

    def to_canonical(self) -> CanonicalAut:
        base = identity(self.target)
        mu = self.mu or base.mu
        return CanonicalAut(self.target, base.lam, self.U, mu, base.beta, base.rho, base.sigma)


AutElement = Union[Perm, Dilation, Mobius, LinearPhase, CanonicalAut]


def _then(t1: CanonicalAut, t2: CanonicalAut) -> CanonicalAut:
    """t2 o t1 (t1 acts first)."""
    s = t1.target.s
    lam = t1.lam * t2.lam
    U = matmul(t1.U, t2.U) if s else ()
    sigma = tuple(t1.sigma[k - s] for k in t2.sigma)
    mu = tuple(m2 * t1.mu[k - s] for m2, k in zip(t2.mu, t2.sigma))
    lam1 = GRat.of(t1.lam)
    if s:
        moved = vecmat(t2.beta, conj_transpose(t1.U))
        beta = tuple(b1 + lam1 * b2 for b1, b2 in zip(t1.beta, moved))
        c1 = vecmat(t1.beta, t1.U)
        cross = hermitian_dot(c1, t2.beta).im
    else:
        beta, cross = (), Fraction(0)
    rho = t1.rho + t1.lam * t1.lam * t2.rho - 2 * t1.lam * cross
    return CanonicalAut(t1.target, lam, U, mu, beta, rho, sigma)


def compose(word: Iterable[AutElement], target: ExponentSignature | None = None) -> CanonicalAut:
    """Normal form of a word; the first element acts first."""
    result = identity(target) if target is not None else None
    for element in word:
        t = element.to_canonical()
        if result is None:
            result = t
            continue
        if t.target != result.target:
            raise ParameterError("word mixes automorphisms of different target signatures")
        result = _then(result, t)
    if result is None:
        raise ParameterError("empty word needs an explicit target signature")
    return result


def invert(T: CanonicalAut) -> CanonicalAut:
    s = T.target.s
    inv_sigma = [0] * len(T.sigma)
    for pos, k in enumerate(T.sigma):
        inv_sigma[k - s] = pos + s
    mu = tuple(T.mu[inv_sigma[t] - s].conj() for t in range(len(T.sigma)))
    lam_inv = Fraction(1) / T.lam
    U = conj_transpose(T.U) if s else ()
    beta = tuple(-x * lam_inv for x in vecmat(T.beta, T.U)) if s else ()
    return CanonicalAut(T.target, lam_inv, U, mu, beta, -T.rho * lam_inv * lam_inv,
                        tuple(inv_sigma))


def act(word: Iterable[AutElement], H: ClassifiedMap) -> ClassifiedMap:
    """Apply each letter in turn."""
    for element in word:
        H = apply_aut(element.to_canonical(), H)
    return H


def same_component(T1: CanonicalAut, T2: CanonicalAut) -> bool:
    if T1.target != T2.target:
        raise ParameterError("automorphisms of different target signatures")
    return T1.sigma == T2.sigma


def q_preserving_permutations(target: ExponentSignature) -> Iterator[tuple[int, ...]]:
    s, N = target.s, len(target)
    for perm in itertools.permutations(range(s, N)):
        if all(target.exps[k] == target.exps[s + pos] for pos, k in enumerate(perm)):
            yield perm


def component_count(target: ExponentSignature) -> int:
    counts: dict[int, int] = {}
    for e in target.exps[target.s:]:
        counts[e] = counts.get(e, 0) + 1
    return math.prod(math.factorial(m) for m in counts.values())


# ---- orbit equivalence ----

def _rounded_roots(nu: GRat, q: int) -> list[GRat]:
    """Numeric q-th roots of nu rounded onto denominator d, where d^q is nu's denominator."""
    d, exact = sympy.integer_nthroot(math.lcm(nu.re.denominator, nu.im.denominator), q)
    if not exact:
        return []
    d = int(d)
    try:
        approx = np.power(complex(nu), 1.0 / q) * np.exp(2j * np.pi * np.arange(q) / q)
        candidates = {GRat(Fraction(round(z.real * d), d), Fraction(round(z.imag * d), d))
                      for z in approx}
    except (OverflowError, ValueError):
        return []
    return [m for m in candidates if m ** q == nu]


def exact_root(nu: GRat, q: int) -> GRat | None:
    """A Gaussian-rational mu with mu^q = nu, or None."""
    if q == 1 or nu == ONE:
        return nu if q == 1 else ONE
    fast = _rounded_roots(nu, q)
    if fast:
        return max(fast, key=lambda m: (m.re, m.im))
    x = sympy.Symbol("x")
    _, factors = sympy.factor_list(x ** q - to_sympy(nu), x, gaussian=True)
    roots = []
    for f, _mult in factors:
        poly = sympy.Poly(f, x)
        if poly.degree() == 1:
            a, b = poly.all_coeffs()
            roots.append(GRat.of(sympy.nsimplify(-b / a)))
    roots = [m for m in roots if m ** q == nu]
    if not roots:
        return None
    return max(roots, key=lambda m: (m.re, m.im))


def _two_squares(n: int) -> tuple[int, int] | None:
    """Gaussian integer a + bi with a^2 + b^2 = n, built prime by prime."""
    a, b = 1, 0
    for p, e in sympy.factorint(n).items():
        if p % 4 == 3:
            if e % 2:
                return None
            a, b = a * p ** (e // 2), b * p ** (e // 2)
            continue
        x, y = (1, 1) if p == 2 else next(iter(cornacchia(1, 1, p)))
        for _ in range(e):
            a, b = a * x - b * y, a * y + b * x
    return a, b


def gaussian_with_norm(ratio: Fraction) -> GRat | None:
    """g in Q(i) with |g|^2 = ratio, or None when ratio is no sum of two squares."""
    if ratio <= 0:
        return None
    num, den = ratio.numerator, ratio.denominator
    rep = _two_squares(num * den)
    if rep is None:
        return None
    a, b = rep
    return GRat(Fraction(a, den), Fraction(b, den))


def _gram_schmidt(rows: Sequence[Sequence[GRat]]) -> list[tuple[GRat, ...]]:
    out: list[tuple[GRat, ...]] = []
    for v in rows:
        v = tuple(v)
        for e in out:
            coeff = hermitian_dot(v, e) / GRat.of(hermitian_dot(e, e).re)
            v = tuple(a - coeff * b for a, b in zip(v, e))
        out.append(v)
    return out


def _linear_witness(A1: Matrix, A2: Matrix, s: int) -> tuple[Matrix | None, str]:
    """Unitary U in Q(i) with A1 U = A2, plus a reason when none is found.

    A1 and A2 must already have equal Gram matrices.
    """
    if s == 0:
        return (), ""
    _, pivots = rref(tuple(zip(*A1)))
    B1 = tuple(A1[i] for i in pivots)
    B2 = tuple(A2[i] for i in pivots)
    F1 = _gram_schmidt(nullspace(tuple(tuple(x.conj() for x in row) for row in B1), s))
    F2 = _gram_schmidt(nullspace(tuple(tuple(x.conj() for x in row) for row in B2), s))
    scaled = []
    for e, f in zip(F1, F2):
        g = gaussian_with_norm(hermitian_dot(e, e).re / hermitian_dot(f, f).re)
        if g is None:
            return None, "complement basis cannot be matched inside Q(i)"
        scaled.append(tuple(g * x for x in f))
    M1 = B1 + tuple(F1)
    M2 = B2 + tuple(scaled)
    U = matmul(inverse(M1), M2)
    if not is_unitary(U) or matmul(A1, U) != A2:
        return None, "linear block witness failed exact check"
    return U, ""


@dataclass(frozen=True)
class OrbitVerdict:
    """``status`` is "equivalent", "inequivalent" or "no_exact_witness"."""
    status: str
    witness: CanonicalAut | None = None
    reason: str = ""

    @property
    def equivalent(self) -> bool | None:
        if self.status == "equivalent":
            return True
        if self.status == "inequivalent":
            return False
        return None

    def to_dict(self) -> dict:
        return {
            "equivalent": self.equivalent,
            "status": self.status,
            "reason": self.reason,
            "witness": self.witness.to_dict() if self.witness else None,
        }


def _column_key(inst: ProblemInstance, W: Matrix, k: int):
    rows = [i for i in range(inst.n) if W[i][k]]
    row = rows[0] if rows else None
    return inst.q[k], row, W[row][k].norm2() if rows else Fraction(0)


def _weak_pairings(H1: ClassifiedMap, H2: ClassifiedMap, keys1: dict, keys2: dict
                   ) -> Iterator[tuple[tuple[int, ...], tuple[GRat, ...]]]:
    """Every sigma pairing weak columns of equal key, with phases that have exact roots.

    Column k of H2 is matched with column sigma[k - s] of H1.
    """
    inst = H1.inst
    s, N = inst.s, inst.N
    roots: dict[tuple[int, int], GRat | None] = {}

    def root(k: int, m: int) -> GRat | None:
        if (k, m) not in roots:
            row = keys2[k][1]
            nu = ONE if row is None else H2.W[row][k] / H1.W[row][m]
            roots[k, m] = exact_root(nu, inst.q[k])
            if roots[k, m] is None:
                log.debug("phase %s has no exact %d-th root", nu, inst.q[k])
        return roots[k, m]

    def extend(k: int, sigma: tuple[int, ...], mu: tuple[GRat, ...]):
        if k == N:
            yield sigma, mu
            return
        for m in range(s, N):
            if m in sigma or keys1[m] != keys2[k]:
                continue
            mu_k = root(k, m)
            if mu_k is not None:
                yield from extend(k + 1, sigma + (m,), mu + (mu_k,))

    return extend(s, (), ())


def orbit_relation(H1: ClassifiedMap, H2: ClassifiedMap) -> OrbitVerdict:
    """Decide whether H2 = T o H1 for some T in the stability group."""
    if H1.inst != H2.inst:
        raise ParameterError("maps belong to different problem instances")
    inst = H1.inst
    s, N = inst.s, inst.N
    lam = H2.lam / H1.lam

    keys1 = {k: _column_key(inst, H1.W, k) for k in range(s, N)}
    keys2 = {k: _column_key(inst, H2.W, k) for k in range(s, N)}
    if Counter(keys1.values()) != Counter(keys2.values()):
        log.debug("weak column keys differ: %s vs %s", keys1, keys2)
        return OrbitVerdict("inequivalent", reason="weak column classes differ")

    A1 = tuple(row[:s] for row in H1.W)
    A2 = tuple(row[:s] for row in H2.W)
    if matmul(A1, conj_transpose(A1, s)) != matmul(A2, conj_transpose(A2, s)):
        return OrbitVerdict("inequivalent", reason="linear block Gram matrices differ")
    U, why = _linear_witness(A1, A2, s)
    if U is None:
        return OrbitVerdict("no_exact_witness", reason=why)

    lam1 = GRat.of(H1.lam)
    if s:
        moved = vecmat(H2.c, conj_transpose(U))
        beta = tuple((a - b) / lam1 for a, b in zip(moved, H1.c))
        cross = hermitian_dot(H1.c, beta).im
    else:
        beta, cross = (), Fraction(0)
    rho = (H2.r - H1.r + 2 * H1.lam * cross) / (H1.lam * H1.lam)

    tried = 0
    for sigma, mu in _weak_pairings(H1, H2, keys1, keys2):
        T = CanonicalAut(inst.target, lam, U, mu, beta, rho, sigma)
        if apply_aut(T, H1).same_qpower(H2):
            return OrbitVerdict("equivalent", witness=T)
        tried += 1
    if not tried:
        return OrbitVerdict("no_exact_witness",
                            reason="no pairing of weak columns has exact phase roots in Q(i)")
    return OrbitVerdict("no_exact_witness", reason="candidate witness failed exact check")


def orbit_equivalent(H1: ClassifiedMap, H2: ClassifiedMap) -> CanonicalAut | None:
    return orbit_relation(H1, H2).witness
