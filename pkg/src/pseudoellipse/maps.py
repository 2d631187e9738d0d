"""
Classified maps H = T o H_{sigma,W} in q-power form.

Problem:  components H_j with q_j >= 2 are radicals (lambda u z^p / delta)^(1/q_j)
          and cannot be compared or verified exactly.
Solution: store P_j = H_j^(q_j) instead. For the whole family

              P_j = lambda (sum_i u_ij z_i^p_i + c_j w) / delta      (c_j = 0 for j > s)
              G   = lambda^2 w / delta
              delta = 1 - 2i sum_i conj(b'_i) z_i^p_i - (r + i beta) w

          with b' = c W*, beta = sum |c_j|^2. Only (W, c) enter, so no
          unitary completion of W is ever needed.

Every index here is a normalized target index (ones first), 0-based.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .errors import DenominatorVanishes, MatrixConditionError, ParameterError, PatternError
from .exactpoly import (
    I, ONE, ZERO, GRat, HermPoly, Matrix, conj_transpose, hermitian_dot, identity,
    is_identity, matmul, matrix, to_fraction, vecmat,
)
from .existence import AdmissiblePattern
from .model import ProblemInstance

if TYPE_CHECKING:
    from .autgroup import CanonicalAut

log = logging.getLogger(__name__)

DELTA_EPS = 1e-12


@dataclass(frozen=True)
class QPowerData:
    """Numerators P~_j, shared denominator delta and numerator of G."""
    numerators: tuple[HermPoly, ...]
    denom: HermPoly
    last: HermPoly

    def same(self, other: "QPowerData") -> bool:
        return (self.numerators == other.numerators and self.denom == other.denom
                and self.last == other.last)


def qpower_data(inst: ProblemInstance, W: Matrix, lam=1, r=0, c: Sequence = ()) -> QPowerData:
    """Evaluate the family formula for raw parameters, without checking them."""
    n, N, s = inst.n, inst.N, inst.s
    lam = GRat.of(lam)
    r = GRat.of(r)
    c = [GRat.of(x) for x in c] + [ZERO] * (N - len(c))
    zp = [HermPoly.z(n, i, inst.p[i]) for i in range(n)]
    w = HermPoly.w(n)
    numerators = []
    for j in range(N):
        acc = HermPoly.zero(n)
        for i in range(n):
            if W[i][j]:
                acc = acc + zp[i].scale(W[i][j])
        if c[j]:
            acc = acc + w.scale(c[j])
        numerators.append(acc.scale(lam))
    beta = sum((x.norm2() for x in c[:s]), Fraction(0))
    denom = HermPoly.one(n) - w.scale(r + I * beta)
    for i in range(n):
        bbar = ZERO
        for j in range(N):
            if c[j] and W[i][j]:
                bbar = bbar + c[j].conj() * W[i][j]
        if bbar:
            denom = denom - zp[i].scale(2 * I * bbar)
    return QPowerData(tuple(numerators), denom, w.scale(lam * lam))


def condition_violations(inst: ProblemInstance, pattern: AdmissiblePattern, W: Matrix) -> list[str]:
    W = matrix(W)
    n, N = inst.n, inst.N
    if len(W) != n or any(len(row) != N for row in W):
        return [f"W must be {n}x{N}"]
    out = []
    if not is_identity(matmul(W, conj_transpose(W))):
        out.append("condition (a) fails: W W* != I")
    sigma = pattern.mapping
    for j in inst.target.weak_indices:
        for i in range(n):
            expected = sigma.get(j) == i
            if bool(W[i][j]) != expected:
                state = "zero" if expected else "nonzero"
                out.append(f"condition (b) fails: u_{i + 1},{j + 1} is {state}")
    return out


def check_conditions(inst: ProblemInstance, pattern: AdmissiblePattern, W: Matrix) -> None:
    problems = condition_violations(inst, pattern, W)
    if problems:
        raise MatrixConditionError("; ".join(problems))


def pattern_from_support(inst: ProblemInstance, W: Matrix) -> AdmissiblePattern:
    """Read (K, sigma) off the weak columns of W."""
    W = matrix(W)
    mapping = {}
    for j in inst.target.weak_indices:
        rows = [i for i in range(inst.n) if W[i][j]]
        if len(rows) > 1:
            raise MatrixConditionError(
                f"column {j + 1} has {len(rows)} nonzero entries; weak columns allow one")
        if rows:
            mapping[j] = rows[0]
    return AdmissiblePattern.from_mapping(mapping)


def _positive_rational(lam) -> Fraction:
    if isinstance(lam, GRat):
        if not lam.is_real():
            raise ParameterError(f"lambda must be real, got {lam}")
        lam = lam.re
    lam = to_fraction(lam)
    if lam <= 0:
        raise ParameterError(f"lambda must be positive, got {lam}")
    return lam


def _real_rational(r) -> Fraction:
    if isinstance(r, GRat):
        if not r.is_real():
            raise ParameterError(f"r must be real, got {r}")
        return r.re
    return to_fraction(r)


def _linear_part(inst: ProblemInstance, c: Sequence | None) -> tuple[GRat, ...]:
    s = inst.s
    c = [GRat.of(x) for x in (c or ())]
    if len(c) not in (0, s, inst.N):
        raise ParameterError(f"c must have {s} (or {inst.N}) entries, got {len(c)}")
    if any(c[s:]):
        raise ParameterError("c_k must vanish for weak indices k > s")
    if s == 0 and any(c):
        raise ParameterError("s = 0 forces c = 0")
    c = c[:s]
    return tuple(c) + (ZERO,) * (s - len(c))


@dataclass(frozen=True)
class ClassifiedMap:
    inst: ProblemInstance
    pattern: AdmissiblePattern
    W: Matrix
    lam: Fraction = Fraction(1)
    r: Fraction = Fraction(0)
    c: tuple[GRat, ...] = field(default=())

    def __post_init__(self):
        inst = self.inst
        inst.require_classifiable()
        object.__setattr__(self, "W", matrix(self.W))
        object.__setattr__(self, "lam", _positive_rational(self.lam))
        object.__setattr__(self, "r", _real_rational(self.r))
        object.__setattr__(self, "c", _linear_part(inst, self.c))
        problems = self.pattern.violations(inst)
        if problems:
            raise PatternError("; ".join(problems))
        check_conditions(inst, self.pattern, self.W)

    @cached_property
    def b_prime(self) -> tuple[GRat, ...]:
        """b' = c W* restricted to the linear block (n entries)."""
        s = self.inst.s
        return tuple(hermitian_dot(self.c, row[:s]) for row in self.W)

    @cached_property
    def beta(self) -> Fraction:
        return sum((x.norm2() for x in self.c), Fraction(0))

    @cached_property
    def qpower(self) -> QPowerData:
        return qpower_data(self.inst, self.W, self.lam, self.r, self.c)

    @property
    def numerators(self) -> tuple[HermPoly, ...]:
        return self.qpower.numerators

    @property
    def denom(self) -> HermPoly:
        return self.qpower.denom

    @property
    def last(self) -> HermPoly:
        return self.qpower.last

    def same_qpower(self, other: "ClassifiedMap") -> bool:
        return self.inst == other.inst and self.qpower.same(other.qpower)

    def with_pattern_from_support(self) -> "ClassifiedMap":
        """Same parameters, pattern re-read from the weak columns of W."""
        return ClassifiedMap(self.inst, pattern_from_support(self.inst, self.W),
                             self.W, self.lam, self.r, self.c)

    def is_monomial(self) -> bool:
        return self.lam == 1 and self.r == 0 and not any(self.c)

    def to_candidate(self) -> "CandidateMap":
        return CandidateMap.from_classified(self)

    def radical_components(self) -> list[str]:
        """Human-readable components in target user order, radicals as ^(1/q)."""
        inst = self.inst
        delta = self.denom
        unit_denom = delta == HermPoly.one(inst.n)
        dtext = "" if unit_denom else f"({delta.pretty()})"
        out = []
        for j, num in enumerate(self.numerators):
            q = inst.q[j]
            if num.is_zero():
                out.append("0")
            elif q == 1:
                out.append(num.pretty() if unit_denom else f"({num.pretty()})/{dtext}")
            else:
                i = self.pattern.mapping[j]
                coeff = self.lam * self.W[i][j]
                k = inst.p[i] // q
                base = f"z{i + 1}" if k == 1 else f"z{i + 1}^{k}"
                text = base if coeff == ONE else f"({coeff.pretty()})^(1/{q})*{base}"
                out.append(text if unit_denom else f"{text}/{dtext}^(1/{q})")
        last = self.last.pretty()
        out.append(last if unit_denom else f"({last})/{dtext}")
        return list(inst.target.denormalize(out[:-1])) + [out[-1]]


def build_monomial_map(inst: ProblemInstance, pattern: AdmissiblePattern | None, W) -> ClassifiedMap:
    """H_{sigma,W}: lambda = 1, r = 0, c = 0, delta = 1."""
    W = matrix(W)
    if pattern is None:
        pattern = pattern_from_support(inst, W)
    return ClassifiedMap(inst, pattern, W)


def general_map(inst: ProblemInstance, pattern: AdmissiblePattern | None, W,
                lam=1, r=0, c: Sequence | None = None) -> ClassifiedMap:
    W = matrix(W)
    if pattern is None:
        pattern = pattern_from_support(inst, W)
    return ClassifiedMap(inst, pattern, W, lam, r, tuple(c or ()))


def pythagorean_split(m: int) -> list[Fraction]:
    """m positive rationals whose squares sum to 1."""
    if m < 1:
        raise ValueError("need at least one part")
    parts = [Fraction(1)]
    for _ in range(m - 1):
        parts = [x * Fraction(3, 5) for x in parts] + [Fraction(4, 5)]
    return parts


def default_witness_map(inst: ProblemInstance, pattern: AdmissiblePattern,
                        spread: bool = False) -> ClassifiedMap:
    """The map built in the existence proof for an admissible pattern.

    Uncovered source indices fill the first linear slots. Each covered source
    index l gets coefficient 1 on its smallest preimage and the pattern is cut
    down to those representatives; with ``spread`` every preimage keeps a
    nonzero coefficient from ``pythagorean_split``.
    """
    inst.require_classifiable()
    pattern.check(inst)
    n, N = inst.n, inst.N
    W = [[ZERO] * N for _ in range(n)]
    uncovered = [i for i in range(n) if i not in pattern.image]
    for slot, t in enumerate(uncovered):
        W[t][slot] = ONE
    keep = []
    for l in sorted(pattern.image):
        pre = pattern.preimage(l)
        if spread:
            for k, x in zip(pre, pythagorean_split(len(pre))):
                W[l][k] = GRat.of(x)
            keep.extend(pre)
        else:
            W[l][min(pre)] = ONE
            keep.append(min(pre))
    return build_monomial_map(inst, pattern.restrict(keep), W)


def equidimensional_base(inst: ProblemInstance, perm: Sequence[int]) -> ClassifiedMap:
    """H_0 = (z_perm(k)^(p/q_k))_k for a bijection with q_k | p_perm(k), N = n."""
    if inst.N != inst.n:
        raise ParameterError("equidimensional base map needs N = n")
    if sorted(perm) != list(range(inst.n)):
        raise ParameterError(f"not a permutation: {[x + 1 for x in perm]}")
    for k, i in enumerate(perm):
        if inst.p[i] % inst.q[k]:
            raise PatternError(f"q_{k + 1}={inst.q[k]} does not divide p_{i + 1}={inst.p[i]}")
    W = [[ZERO] * inst.N for _ in range(inst.n)]
    for k, i in enumerate(perm):
        W[i][k] = ONE
    pattern = AdmissiblePattern(tuple(inst.target.weak_indices),
                                tuple(perm[k] for k in inst.target.weak_indices))
    return build_monomial_map(inst, pattern, W)


def apply_aut(T: "CanonicalAut", H: ClassifiedMap) -> ClassifiedMap:
    """T o H, recomputed exactly in the family's parameters."""
    inst = H.inst
    if T.target != inst.target:
        raise ParameterError("automorphism and map have different target signatures")
    s, N, n = inst.s, inst.N, inst.n
    q = inst.q
    lam_h = GRat.of(H.lam)
    if s:
        lin = matmul(tuple(row[:s] for row in H.W), T.U)
    else:
        lin = tuple(() for _ in range(n))
    W = []
    for i in range(n):
        row = list(lin[i])
        for k in range(s, N):
            nu = T.mu[k - s] ** q[k]
            row.append(H.W[i][T.sigma[k - s]] * nu)
        W.append(tuple(row))
    shifted = [cj + lam_h * bj for cj, bj in zip(H.c, T.beta)]
    c = vecmat(shifted, T.U) if s else ()
    cross = hermitian_dot(H.c, T.beta)
    r = H.r + H.lam * H.lam * T.rho - 2 * H.lam * cross.im
    mapping = H.pattern.mapping
    K = {k: mapping[T.sigma[k - s]] for k in range(s, N) if T.sigma[k - s] in mapping}
    return ClassifiedMap(inst, AdmissiblePattern.from_mapping(K), tuple(W),
                         T.lam * H.lam, r, tuple(c))


def factor_through_monomial(H: ClassifiedMap) -> tuple["CanonicalAut", ClassifiedMap]:
    """Split H = T o H_{sigma,W} with T = Delta_lambda o Psi_{c,r}."""
    from .autgroup import CanonicalAut

    base = build_monomial_map(H.inst, H.pattern, H.W)
    s = H.inst.s
    T = CanonicalAut(H.inst.target, H.lam, identity(s),
                     tuple(ONE for _ in range(H.inst.N - s)),
                     tuple(H.c), H.r, tuple(range(s, H.inst.N)))
    return T, base


def evaluate(H: "ClassifiedMap | CandidateMap", z, w, eps: float = DELTA_EPS) -> np.ndarray:
    """Principal-branch numeric value of H at (z, w), target in normalized order.

    ``z`` has shape (..., n) and ``w`` shape (...); the result has shape
    (..., N + 1).
    """
    data, q = H.qpower, H.inst.q
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    delta = data.denom.evaluate(z, w)
    if np.any(np.abs(delta) < eps):
        raise DenominatorVanishes("delta vanishes at the evaluation point")
    comps = []
    for j, num in enumerate(data.numerators):
        ratio = num.evaluate(z, w) / delta
        comps.append(ratio if q[j] == 1 else np.power(ratio, 1.0 / q[j]))
    comps.append(data.last.evaluate(z, w) / delta)
    return np.stack(comps, axis=-1)


@dataclass(frozen=True)
class CandidateMap:
    """Externally supplied map in common-denominator q-power form."""
    inst: ProblemInstance
    numerators: tuple[HermPoly, ...]
    denom: HermPoly
    last: HermPoly

    def __post_init__(self):
        n = self.inst.n
        if len(self.numerators) != self.inst.N:
            raise ParameterError(f"expected {self.inst.N} numerators, got {len(self.numerators)}")
        for poly in (*self.numerators, self.denom, self.last):
            if poly.n != n:
                raise ParameterError(f"polynomial block n={poly.n} does not match source n={n}")
            if poly.depends_on_polar():
                raise ParameterError("map components must be holomorphic (no chi or tau)")

    @property
    def qpower(self) -> QPowerData:
        return QPowerData(tuple(self.numerators), self.denom, self.last)

    @classmethod
    def from_classified(cls, H: ClassifiedMap) -> "CandidateMap":
        return cls(H.inst, H.numerators, H.denom, H.last)

    @classmethod
    def from_qpower(cls, inst: ProblemInstance, data: QPowerData) -> "CandidateMap":
        return cls(inst, data.numerators, data.denom, data.last)

    @classmethod
    def from_components(cls, inst: ProblemInstance, comps: Sequence[HermPoly],
                        denom: HermPoly | None = None,
                        last: HermPoly | None = None) -> "CandidateMap":
        """Map with z-level components h_j / d and G = last / d.

        With Q = max q_j the common denominator is d^Q, so the stored
        numerators are h_j^(q_j) d^(Q - q_j) and last d^(Q - 1).
        """
        if len(comps) != inst.N:
            raise ParameterError(f"expected {inst.N} components, got {len(comps)}")
        n = inst.n
        last = HermPoly.w(n) if last is None else last
        if denom is None or denom == HermPoly.one(n):
            nums = tuple(h ** q for h, q in zip(comps, inst.q))
            return cls(inst, nums, HermPoly.one(n), last)
        top = max(inst.q)
        nums = tuple(h ** q * denom ** (top - q) for h, q in zip(comps, inst.q))
        return cls(inst, nums, denom ** top, last * denom ** (top - 1))

    def replace(self, **changes) -> "CandidateMap":
        data = {"inst": self.inst, "numerators": self.numerators,
                "denom": self.denom, "last": self.last}
        data.update(changes)
        return CandidateMap(**data)
