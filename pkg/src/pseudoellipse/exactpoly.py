"""
Exact Gaussian-rational arithmetic and sparse Hermitian polynomials.

Every identity the package checks (membership of a map, group laws of the
stability group, row orthonormality) is decided here, in exact arithmetic.
Floating point only appears in ``HermPoly.evaluate``, which the numeric
cross-checks in ``verify`` use.

Variables of a HermPoly come in named blocks::

    z_1..z_n, chi_1..chi_n, w, tau

where chi and tau are the polarized stand-ins for conj(z) and conj(w).
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

import numpy as np
import sympy
from sympy.polys.domains import QQ, QQ_I
from sympy.polys.matrices import DomainMatrix
from sympy.polys.matrices.exceptions import DMNonInvertibleMatrixError

from .errors import ArityMismatch, InexactError, ParameterError, SubstitutionError

Rational = Union[int, Fraction]
Exps = tuple[int, ...]

_RAT = r"\d+(?:/\d+)?"
_GRAT_FULL = re.compile(rf"^\s*([+-]?{_RAT})\s*([+-])\s*({_RAT})\*i\s*$")
_GRAT_REAL = re.compile(rf"^\s*([+-]?{_RAT})\s*$")
_GRAT_IMAG = re.compile(rf"^\s*([+-]?{_RAT})\*i\s*$")


def to_fraction(x) -> Fraction:
    """Coerce an exact scalar (int, Fraction, "num/den") to Fraction.

    Floats are refused: every coefficient in this package is exact.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, sympy.Rational):
        return Fraction(int(x.p), int(x.q))
    if isinstance(x, sympy.Basic) and x.is_number:
        raise InexactError(f"{x} is not rational")
    raise TypeError(f"not an exact rational: {x!r}")


def fraction_text(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


class GRat:
    """Gaussian rational re + im*i with arbitrary-precision parts.

    Instances are immutable; Fraction keeps both parts in lowest terms.
    """
    __slots__ = ("re", "im")

    def __init__(self, re: Rational | str = 0, im: Rational | str = 0):
        object.__setattr__(self, "re", to_fraction(re))
        object.__setattr__(self, "im", to_fraction(im))

    def __setattr__(self, name, value):
        raise AttributeError("GRat is immutable")

    @classmethod
    def _make(cls, re: Fraction, im: Fraction) -> "GRat":
        obj = object.__new__(GRat)
        object.__setattr__(obj, "re", re)
        object.__setattr__(obj, "im", im)
        return obj

    @classmethod
    def of(cls, x) -> "GRat":
        """Coerce int, Fraction, str, GRat or a {"re","im"} mapping."""
        if isinstance(x, GRat):
            return x
        if isinstance(x, Mapping):
            return GRat(x.get("re", 0), x.get("im", 0))
        if isinstance(x, str):
            return GRat.parse(x)
        if isinstance(x, sympy.Basic):
            return from_sympy(x)
        return GRat._make(to_fraction(x), Fraction(0))

    @classmethod
    def parse(cls, text: str) -> "GRat":
        m = _GRAT_FULL.match(text)
        if m:
            im = Fraction(m.group(3))
            return GRat._make(Fraction(m.group(1)), im if m.group(2) == "+" else -im)
        m = _GRAT_REAL.match(text)
        if m:
            return GRat._make(Fraction(m.group(1)), Fraction(0))
        m = _GRAT_IMAG.match(text)
        if m:
            return GRat._make(Fraction(0), Fraction(m.group(1)))
        raise ValueError(f"cannot parse Gaussian rational: {text!r}")

    # ---- arithmetic ----

    def __add__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return GRat._make(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return GRat._make(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return GRat._make(o.re - self.re, o.im - self.im)

    def __mul__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return GRat._make(self.re * o.re - self.im * o.im,
                          self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __neg__(self) -> "GRat":
        return GRat._make(-self.re, -self.im)

    def __pow__(self, k: int) -> "GRat":
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        result, base = ONE, self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def conj(self) -> "GRat":
        return GRat._make(self.re, -self.im)

    def norm2(self) -> Fraction:
        """|x|^2 = re^2 + im^2, exactly."""
        return self.re * self.re + self.im * self.im

    def inverse(self) -> "GRat":
        n = self.norm2()
        if n == 0:
            raise ZeroDivisionError("inverse of zero Gaussian rational")
        return GRat._make(self.re / n, -self.im / n)

    # ---- predicates / conversions ----

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def is_real(self) -> bool:
        return self.im == 0

    def __bool__(self) -> bool:
        return not self.is_zero()

    def __eq__(self, other) -> bool:
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self) -> int:
        return hash(self.re) if self.im == 0 else hash((self.re, self.im))

    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))

    def to_text(self) -> str:
        sign = "+" if self.im >= 0 else "-"
        return f"{fraction_text(self.re)}{sign}{fraction_text(abs(self.im))}*i"

    def pretty(self) -> str:
        if self.im == 0:
            return fraction_text(self.re)
        if self.re == 0:
            return f"{fraction_text(self.im)}*i"
        return f"({self.to_text()})"

    def __str__(self) -> str:
        return self.to_text()

    def __repr__(self) -> str:
        return f"GRat('{self.to_text()}')"


class UnimodularGRat(GRat):
    """A Gaussian rational of modulus exactly one (exact stand-in for e^{i theta})."""
    __slots__ = ()

    def __init__(self, re: Rational | str | GRat = 1, im: Rational | str = 0):
        if isinstance(re, GRat):
            re, im = re.re, re.im
        super().__init__(re, im)
        if self.norm2() != 1:
            raise ParameterError(f"{self.to_text()} is not unimodular (|x|^2 = {self.norm2()})")

    @classmethod
    def from_gaussian_integer(cls, a: int, b: int) -> "UnimodularGRat":
        """(a+bi)/(a-bi): a unit-circle point for every nonzero Gaussian integer."""
        if a == 0 and b == 0:
            raise ParameterError("Gaussian integer must be nonzero")
        g = GRat(a, b)
        return cls(g / g.conj())


ZERO = GRat._make(Fraction(0), Fraction(0))
ONE = GRat._make(Fraction(1), Fraction(0))
I = GRat._make(Fraction(0), Fraction(1))


def _coerce(x) -> GRat | None:
    if isinstance(x, GRat):
        return x
    if isinstance(x, (int, Fraction)) and not isinstance(x, bool):
        return GRat._make(Fraction(x), Fraction(0))
    return None


def is_unimodular(x: GRat) -> bool:
    return x.norm2() == 1


# ---- sympy bridge (exact linear algebra lives in sympy) ----

def to_sympy(x: GRat) -> sympy.Expr:
    return (sympy.Rational(x.re.numerator, x.re.denominator)
            + sympy.I * sympy.Rational(x.im.numerator, x.im.denominator))


def from_sympy(expr) -> GRat:
    re_part, im_part = sympy.expand(expr).as_real_imag()
    re_part, im_part = sympy.nsimplify(re_part), sympy.nsimplify(im_part)
    if not (re_part.is_Rational and im_part.is_Rational):
        raise InexactError(f"{expr} is not a Gaussian rational")
    return GRat._make(to_fraction(re_part), to_fraction(im_part))


def to_qq_i(x: GRat):
    """Convert to an element of sympy's Gaussian rational domain QQ_I."""
    return QQ_I(QQ(x.re.numerator, x.re.denominator), QQ(x.im.numerator, x.im.denominator))


# ---- exact matrices (tuples of GRat rows) ----

Matrix = tuple[tuple[GRat, ...], ...]


def matrix(rows: Iterable[Iterable]) -> Matrix:
    return tuple(tuple(GRat.of(x) for x in row) for row in rows)


def identity(k: int) -> Matrix:
    return tuple(tuple(ONE if i == j else ZERO for j in range(k)) for i in range(k))


def zeros(m: int, k: int) -> Matrix:
    return tuple(tuple(ZERO for _ in range(k)) for _ in range(m))


def matmul(a: Matrix, b: Matrix) -> Matrix:
    if a and b and len(a[0]) != len(b):
        raise ArityMismatch(f"cannot multiply {len(a)}x{len(a[0])} by {len(b)}x{len(b[0])}")
    cols = len(b[0]) if b else 0
    out = []
    for row in a:
        new_row = []
        for j in range(cols):
            acc = ZERO
            for k, x in enumerate(row):
                if x:
                    y = b[k][j]
                    if y:
                        acc = acc + x * y
            new_row.append(acc)
        out.append(tuple(new_row))
    return tuple(out)


def vecmat(v: Sequence[GRat], b: Matrix) -> tuple[GRat, ...]:
    return matmul((tuple(v),), b)[0] if b else ()


def conj_transpose(a: Matrix, ncols: int | None = None) -> Matrix:
    if not a:
        return tuple(() for _ in range(ncols or 0))
    return tuple(tuple(a[i][j].conj() for i in range(len(a))) for j in range(len(a[0])))


def is_identity(a: Matrix) -> bool:
    return all(a[i][j] == (ONE if i == j else ZERO)
               for i in range(len(a)) for j in range(len(a[i])))


def is_row_orthonormal(a: Matrix) -> bool:
    """A A* = I exactly."""
    return is_identity(matmul(a, conj_transpose(a))) if a else True


def is_unitary(a: Matrix) -> bool:
    return len(a) == (len(a[0]) if a else 0) and is_row_orthonormal(a)


def hermitian_dot(x: Sequence[GRat], y: Sequence[GRat]) -> GRat:
    """sum_j x_j conj(y_j)."""
    acc = ZERO
    for a, b in zip(x, y):
        if a and b:
            acc = acc + a * b.conj()
    return acc


def sympy_matrix(a: Matrix, ncols: int = 0) -> sympy.Matrix:
    if not a:
        return sympy.zeros(0, ncols)
    return sympy.Matrix([[to_sympy(x) for x in row] for row in a])


def from_sympy_matrix(m: sympy.Matrix) -> Matrix:
    return tuple(tuple(from_sympy(m[i, j]) for j in range(m.cols)) for i in range(m.rows))


def from_qq_i(e) -> GRat:
    return GRat._make(Fraction(int(e.x.numerator), int(e.x.denominator)),
                      Fraction(int(e.y.numerator), int(e.y.denominator)))


def domain_matrix(a: Matrix, ncols: int | None = None) -> DomainMatrix:
    """Dense DomainMatrix over QQ_I; row echelon work stays in Q(i)."""
    cols = len(a[0]) if a else (ncols or 0)
    return DomainMatrix([[to_qq_i(x) for x in row] for row in a], (len(a), cols), QQ_I)


def from_domain_matrix(m: DomainMatrix) -> Matrix:
    rows, cols = m.shape
    return tuple(tuple(from_qq_i(m[i, j].element) for j in range(cols)) for i in range(rows))


def rref(a: Matrix) -> tuple[Matrix, tuple[int, ...]]:
    if not a or not a[0]:
        return a, ()
    reduced, pivots = domain_matrix(a).rref()
    return from_domain_matrix(reduced), tuple(pivots)


def nullspace(a: Matrix, ncols: int) -> Matrix:
    """Rows spanning {v : a v^T = 0}, one per free column of the echelon form."""
    if not a:
        return identity(ncols)
    reduced, pivots = rref(a)
    basis = []
    for f in range(ncols):
        if f in pivots:
            continue
        v = [ZERO] * ncols
        v[f] = ONE
        for r, p in enumerate(pivots):
            v[p] = -reduced[r][f]
        basis.append(tuple(v))
    return tuple(basis)


def inverse(a: Matrix) -> Matrix:
    if not a:
        return ()
    try:
        return from_domain_matrix(domain_matrix(a).inv())
    except (ZeroDivisionError, DMNonInvertibleMatrixError) as exc:
        raise ArityMismatch(f"matrix is singular: {exc}") from exc


# ---- sparse polynomials ----

_VAR = re.compile(r"^(z|chi)(\d+)$")


class HermPoly:
    """Sparse polynomial over GRat in the blocks (z, chi, w, tau).

    ``terms`` maps exponent tuples of length 2n+2 to nonzero coefficients;
    the map is canonical, so polynomial equality is dict equality.
    """
    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms: Mapping[Exps, object] | None = None):
        if n < 0:
            raise ArityMismatch("block size must be nonnegative")
        clean: dict[Exps, GRat] = {}
        for exps, coeff in (terms or {}).items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != 2 * n + 2:
                raise ArityMismatch(f"exponent vector {exps} does not fit n={n}")
            if any(e < 0 for e in exps):
                raise ArityMismatch(f"negative exponent in {exps}")
            c = GRat.of(coeff)
            if c:
                prev = clean.get(exps)
                c = c if prev is None else prev + c
                if c:
                    clean[exps] = c
                else:
                    clean.pop(exps, None)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, name, value):
        raise AttributeError("HermPoly is immutable")

    @classmethod
    def _from_clean(cls, n: int, terms: dict[Exps, GRat]) -> "HermPoly":
        obj = object.__new__(cls)
        object.__setattr__(obj, "n", n)
        object.__setattr__(obj, "terms", terms)
        return obj

    # ---- constructors ----

    @classmethod
    def zero(cls, n: int) -> "HermPoly":
        return cls._from_clean(n, {})

    @classmethod
    def const(cls, n: int, c=1) -> "HermPoly":
        c = GRat.of(c)
        return cls._from_clean(n, {(0,) * (2 * n + 2): c} if c else {})

    @classmethod
    def one(cls, n: int) -> "HermPoly":
        return cls.const(n, ONE)

    @classmethod
    def monomial(cls, n: int, z: Mapping[int, int] | None = None,
                 chi: Mapping[int, int] | None = None, w: int = 0, tau: int = 0,
                 coeff=1) -> "HermPoly":
        """Monomial with 0-based variable indices, e.g. monomial(3, z={2: 6})."""
        exps = [0] * (2 * n + 2)
        for i, e in (z or {}).items():
            exps[i] += e
        for i, e in (chi or {}).items():
            exps[n + i] += e
        exps[2 * n] = w
        exps[2 * n + 1] = tau
        return cls(n, {tuple(exps): coeff})

    @classmethod
    def z(cls, n: int, i: int, e: int = 1) -> "HermPoly":
        return cls.monomial(n, z={i: e})

    @classmethod
    def chi(cls, n: int, i: int, e: int = 1) -> "HermPoly":
        return cls.monomial(n, chi={i: e})

    @classmethod
    def w(cls, n: int, e: int = 1) -> "HermPoly":
        return cls.monomial(n, w=e)

    @classmethod
    def tau(cls, n: int, e: int = 1) -> "HermPoly":
        return cls.monomial(n, tau=e)

    # ---- ring operations ----

    def _check(self, other: "HermPoly") -> None:
        if self.n != other.n:
            raise ArityMismatch(f"variable blocks differ: n={self.n} vs n={other.n}")

    def _lift(self, other) -> "HermPoly | None":
        if isinstance(other, HermPoly):
            self._check(other)
            return other
        c = _coerce(other)
        return None if c is None else HermPoly.const(self.n, c)

    def __add__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        out = dict(self.terms)
        for e, c in o.terms.items():
            prev = out.get(e)
            if prev is None:
                out[e] = c
            else:
                s = prev + c
                if s:
                    out[e] = s
                else:
                    del out[e]
        return HermPoly._from_clean(self.n, out)

    __radd__ = __add__

    def __neg__(self) -> "HermPoly":
        return HermPoly._from_clean(self.n, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def scale(self, c) -> "HermPoly":
        c = GRat.of(c)
        if not c:
            return HermPoly.zero(self.n)
        return HermPoly._from_clean(self.n, {e: x * c for e, x in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, HermPoly):
            c = _coerce(other)
            return NotImplemented if c is None else self.scale(c)
        self._check(other)
        out: dict[Exps, GRat] = {}
        for ea, ca in self.terms.items():
            for eb, cb in other.terms.items():
                e = tuple(x + y for x, y in zip(ea, eb))
                c = ca * cb
                prev = out.get(e)
                out[e] = c if prev is None else prev + c
        return HermPoly._from_clean(self.n, {e: c for e, c in out.items() if c})

    def __rmul__(self, other):
        c = _coerce(other)
        return NotImplemented if c is None else self.scale(c)

    def __pow__(self, k: int) -> "HermPoly":
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        result, base = HermPoly.one(self.n), self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    # ---- structure ----

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        if isinstance(other, HermPoly):
            return self.n == other.n and self.terms == other.terms
        c = _coerce(other)
        if c is None:
            return NotImplemented
        return self.terms == HermPoly.const(self.n, c).terms

    def __hash__(self) -> int:
        return hash((self.n, frozenset(self.terms.items())))

    def coefficient(self, exps: Exps) -> GRat:
        return self.terms.get(tuple(exps), ZERO)

    def constant_term(self) -> GRat:
        return self.coefficient((0,) * (2 * self.n + 2))

    def w_linear_coefficient(self) -> GRat:
        """Coefficient of the monomial w alone."""
        exps = [0] * (2 * self.n + 2)
        exps[2 * self.n] = 1
        return self.coefficient(tuple(exps))

    def depends_on_w(self) -> bool:
        return any(e[2 * self.n] for e in self.terms)

    def depends_on_tau(self) -> bool:
        return any(e[2 * self.n + 1] for e in self.terms)

    def depends_on_polar(self) -> bool:
        """True if any chi or tau exponent is positive."""
        n = self.n
        return any(any(e[n:2 * n]) or e[2 * n + 1] for e in self.terms)

    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def z_terms(self) -> dict[Exps, GRat]:
        """Terms of a polynomial in z only, keyed by the z-block exponent."""
        if self.depends_on_polar() or self.depends_on_w():
            raise ArityMismatch("polynomial depends on variables other than z")
        return {e[: self.n]: c for e, c in self.terms.items()}

    def without_var_block(self, block: str) -> "HermPoly":
        """Set every variable of one block ("z", "chi", "w" or "tau") to zero."""
        n = self.n
        spans = {"z": range(0, n), "chi": range(n, 2 * n),
                 "w": range(2 * n, 2 * n + 1), "tau": range(2 * n + 1, 2 * n + 2)}
        if block not in spans:
            raise ValueError(f"unknown variable block {block!r}")
        span = spans[block]
        return HermPoly._from_clean(
            n, {e: c for e, c in self.terms.items() if not any(e[k] for k in span)})

    def at_w_zero(self) -> "HermPoly":
        return self.without_var_block("w")

    def neg(self) -> "HermPoly":
        return -self

    def sub(self, other: "HermPoly") -> "HermPoly":
        return self - other

    def pow(self, k: int) -> "HermPoly":
        return self ** k

    # ---- involution and substitution ----

    def bar_swap(self) -> "HermPoly":
        """Conjugate coefficients and swap z <-> chi, w <-> tau."""
        n = self.n
        out = {}
        for e, c in self.terms.items():
            out[e[n:2 * n] + e[:n] + (e[2 * n + 1], e[2 * n])] = c.conj()
        return HermPoly._from_clean(n, out)

    def _substitute_scalar(self, index: int, s: "HermPoly") -> "HermPoly":
        self._check(s)
        powers = {0: HermPoly.one(self.n)}
        result = HermPoly.zero(self.n)
        grouped: dict[int, dict[Exps, GRat]] = {}
        for e, c in self.terms.items():
            k = e[index]
            base = e[:index] + (0,) + e[index + 1:]
            grouped.setdefault(k, {})[base] = c
        for k in sorted(grouped):
            if k not in powers:
                top = max(powers)
                acc = powers[top]
                for j in range(top + 1, k + 1):
                    acc = acc * s
                    powers[j] = acc
            result = result + HermPoly._from_clean(self.n, grouped[k]) * powers[k]
        return result

    def substitute_w(self, s: "HermPoly") -> "HermPoly":
        """Replace every power of w by the same power of ``s`` (s must not contain w)."""
        if s.depends_on_w():
            raise SubstitutionError("substituted polynomial depends on w")
        return self._substitute_scalar(2 * self.n, s)

    def substitute_tau(self, s: "HermPoly") -> "HermPoly":
        if s.depends_on_tau():
            raise SubstitutionError("substituted polynomial depends on tau")
        return self._substitute_scalar(2 * self.n + 1, s)

    # ---- numerics ----

    def evaluate(self, z, w=0.0, chi=None, tau=None):
        """Floating evaluation; arrays broadcast over a leading sample axis.

        ``z`` and ``chi`` have shape (..., n); ``w`` and ``tau`` shape (...).
        """
        n = self.n
        z = np.asarray(z, dtype=complex)
        w = np.asarray(w, dtype=complex)
        chi = None if chi is None else np.asarray(chi, dtype=complex)
        tau = None if tau is None else np.asarray(tau, dtype=complex)
        total = np.zeros(np.broadcast_shapes(z.shape[:-1], w.shape), dtype=complex)
        for e, c in self.terms.items():
            term = np.full(total.shape, complex(c))
            for i in range(n):
                if e[i]:
                    term = term * z[..., i] ** e[i]
                if e[n + i]:
                    if chi is None:
                        raise ValueError("polynomial depends on chi but no chi was given")
                    term = term * chi[..., i] ** e[n + i]
            if e[2 * n]:
                term = term * w ** e[2 * n]
            if e[2 * n + 1]:
                if tau is None:
                    raise ValueError("polynomial depends on tau but no tau was given")
                term = term * tau ** e[2 * n + 1]
            total = total + term
        return total

    def evaluate_exact(self, z: Sequence, w=0, chi: Sequence | None = None, tau=0) -> GRat:
        n = self.n
        z = [GRat.of(x) for x in z]
        chi = [GRat.of(x) for x in chi] if chi is not None else [ZERO] * n
        w, tau = GRat.of(w), GRat.of(tau)
        acc = ZERO
        for e, c in self.terms.items():
            term = c
            for i in range(n):
                if e[i]:
                    term = term * z[i] ** e[i]
                if e[n + i]:
                    term = term * chi[i] ** e[n + i]
            if e[2 * n]:
                term = term * w ** e[2 * n]
            if e[2 * n + 1]:
                term = term * tau ** e[2 * n + 1]
            acc = acc + term
        return acc

    # ---- text ----

    def _names(self) -> list[str]:
        n = self.n
        return [f"z{i + 1}" for i in range(n)] + [f"chi{i + 1}" for i in range(n)] + ["w", "tau"]

    def sorted_terms(self) -> list[tuple[Exps, GRat]]:
        """Terms in graded-lexicographic order, highest first."""
        return sorted(self.terms.items(), key=lambda t: (sum(t[0]), t[0]), reverse=True)

    def _monomial_text(self, e: Exps) -> str:
        parts = []
        for name, k in zip(self._names(), e):
            if k == 1:
                parts.append(name)
            elif k > 1:
                parts.append(f"{name}^{k}")
        return "*".join(parts)

    def to_text(self) -> str:
        """Canonical text: ``(re+im*i)*z1^2*chi1^2 + (1+0*i)*tau``."""
        if not self.terms:
            return "0"
        out = []
        for e, c in self.sorted_terms():
            mono = self._monomial_text(e)
            out.append(f"({c.to_text()})" + (f"*{mono}" if mono else ""))
        return " + ".join(out)

    @classmethod
    def parse(cls, text: str, n: int) -> "HermPoly":
        text = text.strip()
        if text == "0":
            return cls.zero(n)
        terms: dict[Exps, GRat] = {}
        for chunk in text.split(" + "):
            m = re.match(r"^\(([^()]*)\)(.*)$", chunk.strip())
            if not m:
                raise ValueError(f"malformed term: {chunk!r}")
            coeff = GRat.parse(m.group(1))
            exps = [0] * (2 * n + 2)
            rest = m.group(2)
            for factor in filter(None, rest.split("*")):
                name, _, power = factor.partition("^")
                k = int(power) if power else 1
                if name == "w":
                    exps[2 * n] += k
                elif name == "tau":
                    exps[2 * n + 1] += k
                else:
                    vm = _VAR.match(name)
                    if not vm or not 1 <= int(vm.group(2)) <= n:
                        raise ValueError(f"unknown variable {name!r} for n={n}")
                    offset = 0 if vm.group(1) == "z" else n
                    exps[offset + int(vm.group(2)) - 1] += k
            key = tuple(exps)
            terms[key] = terms.get(key, ZERO) + coeff
        return cls(n, terms)

    def pretty(self) -> str:
        if not self.terms:
            return "0"
        out = []
        for e, c in self.sorted_terms():
            mono = self._monomial_text(e)
            if not mono:
                out.append(c.pretty())
            elif c == 1:
                out.append(mono)
            elif c == -1:
                out.append(f"-{mono}")
            else:
                out.append(f"{c.pretty()}*{mono}")
        return " + ".join(out).replace("+ -", "- ")

    def __str__(self) -> str:
        return self.pretty()

    def __repr__(self) -> str:
        return f"HermPoly(n={self.n}, {self.to_text()!r})"


# Functional forms of the ring operations.

def add(a: HermPoly, b: HermPoly) -> HermPoly:
    return a + b


def mul(a: HermPoly, b: HermPoly) -> HermPoly:
    return a * b


def substitute_w(p: HermPoly, s: HermPoly) -> HermPoly:
    return p.substitute_w(s)


def bar_swap(p: HermPoly) -> HermPoly:
    return p.bar_swap()


def is_zero(p: HermPoly) -> bool:
    return p.is_zero()
