"""
Essential type and multiplicity: codimensions of ideals in C{z}.

Monomial ideals are counted on their staircase. Pivoting on a variable x
splits the count as

    dim R/I = dim R/(I + x) + dim R/(I : x)

until every generator is a pure power, where the staircase is a box.

A map whose components at w = 0 are not all monomials is handled by linear
algebra in C[z]/m^(D+1). If every monomial of degree D lies in the span of
the ideal there, m^D is contained in the ideal and the codimension is read
off modulo m^D. D doubles until that certificate holds.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Sequence, Union

from sympy.polys.domains import QQ_I
from sympy.polys.matrices import DomainMatrix

from .errors import UncertifiedResult
from .exactpoly import GRat, HermPoly, to_qq_i
from .maps import ClassifiedMap
from .model import ExponentSignature, defining_polynomial

log = logging.getLogger(__name__)

INFINITE = "infinite"

Monomial = tuple[int, ...]


def _divides(a: Monomial, b: Monomial) -> bool:
    return all(x <= y for x, y in zip(a, b))


def minimalize(gens: Sequence[Monomial]) -> tuple[Monomial, ...]:
    """Drop generators divisible by another generator."""
    kept: list[Monomial] = []
    for m in sorted(set(gens), key=lambda g: (sum(g), g)):
        if not any(_divides(g, m) for g in kept):
            kept.append(m)
    return tuple(sorted(kept))


@dataclass(frozen=True)
class MonomialIdeal:
    nvars: int
    gens: tuple[Monomial, ...]

    def __post_init__(self):
        gens = tuple(tuple(int(e) for e in g) for g in self.gens)
        if any(len(g) != self.nvars for g in gens):
            raise ValueError(f"generators must have {self.nvars} exponents")
        object.__setattr__(self, "gens", minimalize(gens))

    def contains(self, m: Monomial) -> bool:
        return any(_divides(g, m) for g in self.gens)

    def pure_powers(self) -> dict[int, int]:
        """{variable: smallest exponent e with x_v^e in the ideal}."""
        out: dict[int, int] = {}
        for g in self.gens:
            support = [v for v, e in enumerate(g) if e]
            if len(support) == 1:
                v = support[0]
                out[v] = min(out.get(v, g[v]), g[v])
            elif not support:
                return {v: 0 for v in range(self.nvars)}
        return out

    def is_finite(self) -> bool:
        return len(self.pure_powers()) == self.nvars

    def to_dict(self) -> dict:
        return {"nvars": self.nvars, "gens": [list(g) for g in self.gens]}


@lru_cache(maxsize=4096)
def _codim(gens: tuple[Monomial, ...]) -> int:
    nvars = len(gens[0])
    if any(not any(g) for g in gens):
        return 0
    mixed = [g for g in gens if sum(1 for e in g if e) > 1]
    if not mixed:
        box = [0] * nvars
        for g in gens:
            v = next(i for i, e in enumerate(g) if e)
            box[v] = g[v] if not box[v] else min(box[v], g[v])
        return math.prod(box)
    v = max(range(nvars), key=lambda i: (sum(1 for g in mixed if g[i]), -i))
    x = tuple(1 if i == v else 0 for i in range(nvars))
    plus = minimalize([g for g in gens if not g[v]] + [x])
    colon = minimalize([tuple(e - 1 if i == v and e else e for i, e in enumerate(g)) for g in gens])
    return _codim(plus) + _codim(colon)


def monomial_codim(I: MonomialIdeal) -> Union[int, str]:
    """Number of standard monomials, or "infinite"."""
    if not I.gens:
        return INFINITE
    if not I.is_finite():
        return INFINITE
    return _codim(I.gens)


def staircase(I: MonomialIdeal) -> list[Monomial]:
    """Standard monomials of a finite monomial ideal, by explicit enumeration."""
    bounds = I.pure_powers()
    if len(bounds) != I.nvars:
        raise ValueError("staircase of an ideal with infinite codimension")
    box = itertools.product(*(range(bounds[v]) for v in range(I.nvars)))
    return [m for m in box if not I.contains(m)]


def defining_ideal(sig: ExponentSignature) -> MonomialIdeal:
    """Ideal of the chi-coefficients q_I(z) of Q(z, chi, 0)."""
    n = len(sig)
    q = defining_polynomial(sig)
    coefficients: dict[Monomial, dict[Monomial, GRat]] = {}
    for exps, c in q.terms.items():
        if exps[2 * n + 1]:
            continue
        chi = exps[n:2 * n]
        if any(chi):
            coefficients.setdefault(chi, {})[exps[:n]] = c
    gens = []
    for chi, poly in sorted(coefficients.items()):
        if len(poly) != 1:
            raise ValueError(f"coefficient of chi^{chi} is not a monomial")
        gens.append(next(iter(poly)))
    return MonomialIdeal(n, tuple(gens))


def essential_type(sig: ExponentSignature) -> int:
    value = monomial_codim(defining_ideal(sig))
    if value == INFINITE:
        raise ValueError("defining ideal has infinite codimension")
    return value


@dataclass(frozen=True)
class MultiplicityResult:
    value: Union[int, str]
    certified: bool
    truncation_degree: int
    method: str = "staircase"

    def to_dict(self) -> dict:
        return {"value": self.value, "certified": self.certified,
                "truncation_degree": self.truncation_degree, "method": self.method}


def component_generators(H: ClassifiedMap) -> list[dict[Monomial, GRat]]:
    """Generators of I(h), h = H(., 0), with unit factors dropped."""
    inst = H.inst
    n = inst.n
    gens = []
    for j in range(inst.s):
        poly = H.numerators[j].at_w_zero()
        if not poly.is_zero():
            gens.append(poly.z_terms())
    for k, i in H.pattern.mapping.items():
        e = [0] * n
        e[i] = inst.p[i] // inst.q[k]
        gens.append({tuple(e): GRat.of(1)})
    return gens


def _monomials_upto(n: int, D: int) -> Iterator[Monomial]:
    for d in range(D + 1):
        for combo in itertools.combinations_with_replacement(range(n), d):
            m = [0] * n
            for v in combo:
                m[v] += 1
            yield tuple(m)


def _truncated_ranks(gens: Sequence[dict[Monomial, GRat]], n: int, D: int) -> tuple[int, int, int, int]:
    """Ranks of the ideal in C[z]/m^D and C[z]/m^(D+1), with monomial counts."""
    monos = list(_monomials_upto(n, D))
    index = {m: t for t, m in enumerate(monos)}
    below = sum(1 for m in monos if sum(m) < D)
    rows_full: dict[int, dict[int, object]] = {}
    rows_low: dict[int, dict[int, object]] = {}
    r = 0
    for g in gens:
        order = min(sum(e) for e in g)
        for m in monos:
            if sum(m) + order > D:
                break
            full, low = {}, {}
            for e, c in g.items():
                prod = tuple(a + b for a, b in zip(m, e))
                if sum(prod) <= D:
                    col = index[prod]
                    full[col] = to_qq_i(c)
                    if sum(prod) < D:
                        low[col] = full[col]
            if full:
                rows_full[r] = full
                if low:
                    rows_low[r] = low
                r += 1
    cols = len(monos)
    rank_full = DomainMatrix(rows_full, (max(r, 1), cols), QQ_I).rank() if r else 0
    rank_low = DomainMatrix(rows_low, (max(r, 1), cols), QQ_I).rank() if rows_low else 0
    return rank_low, rank_full, below, cols - below


def multiplicity(H: ClassifiedMap) -> MultiplicityResult:
    n = H.inst.n
    gens = component_generators(H)
    if all(len(g) == 1 for g in gens):
        value = monomial_codim(MonomialIdeal(n, tuple(next(iter(g)) for g in gens)))
        return MultiplicityResult(value, True, 0, "staircase")
    top = max(sum(e) for g in gens for e in g)
    bound = math.prod(H.inst.p) + top
    D = top + 1
    while True:
        rank_low, rank_full, below, at_D = _truncated_ranks(gens, n, D)
        value = below - rank_low
        certified = rank_full - rank_low == at_D
        log.debug("truncation D=%d: quotient %d, certificate %s", D, value, certified)
        if certified:
            return MultiplicityResult(value, True, D, "truncated")
        if D >= bound:
            log.warning("multiplicity not certified up to degree %d", D)
            return MultiplicityResult(value, False, D, "truncated")
        D = min(2 * D, bound)


def check_mult_bound(H: ClassifiedMap) -> bool:
    """mult_0 H <= esstype_0 of the source."""
    res = multiplicity(H)
    if not res.certified:
        raise UncertifiedResult(f"multiplicity not certified up to degree {res.truncation_degree}")
    if res.value == INFINITE:
        return False
    return res.value <= essential_type(H.inst.source)
