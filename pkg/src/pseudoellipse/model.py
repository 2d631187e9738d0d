"""
Model hypersurfaces P^n_p = {Im w = sum_j |z_j|^(2 p_j)}.

Problem:  users write exponent lists in whatever order is natural to them,
          but every classification rule assumes the target's exponents
          equal to 1 come first.
Solution: ExponentSignature keeps both orders. The normalized order is a
          stable partition (ones first), and ``norm_perm`` maps every
          normalized position back to the user's index so results can be
          reported in user coordinates.

Indices are 0-based inside the package; serialization converts to 1-based.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import CodimensionError, SignatureError
from .exactpoly import I, HermPoly

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ExponentSignature:
    """Exponents of a model, normalized with their permutation.

    ``exps[k]`` is the exponent at normalized position k and it belongs to
    user coordinate ``norm_perm[k]``.
    """
    exps: tuple[int, ...]
    norm_perm: tuple[int, ...]

    def __post_init__(self):
        if not self.exps:
            raise SignatureError("exponent list is empty")
        if any((not isinstance(e, int)) or isinstance(e, bool) or e < 1 for e in self.exps):
            raise SignatureError(f"exponents must be integers >= 1: {list(self.exps)}")
        if sorted(self.norm_perm) != list(range(len(self.exps))):
            raise SignatureError(f"not a permutation: {list(self.norm_perm)}")

    def __len__(self) -> int:
        return len(self.exps)

    @property
    def dim(self) -> int:
        return len(self.exps)

    @property
    def s(self) -> int:
        """Number of exponents equal to 1 (they lead in normalized order)."""
        return sum(1 for e in self.exps if e == 1)

    @property
    def linear_indices(self) -> range:
        return range(self.s)

    @property
    def weak_indices(self) -> range:
        return range(self.s, len(self.exps))

    @property
    def user_exps(self) -> tuple[int, ...]:
        return self.denormalize(self.exps)

    @property
    def is_normalized(self) -> bool:
        """True when user order already puts the ones first."""
        return self.norm_perm == tuple(range(len(self.exps)))

    def denormalize(self, values: Sequence):
        """Reorder a normalized-order sequence into user order."""
        if len(values) != len(self.exps):
            raise SignatureError(f"expected {len(self.exps)} values, got {len(values)}")
        out = [None] * len(values)
        for k, u in enumerate(self.norm_perm):
            out[u] = values[k]
        return tuple(out)

    def normalize_values(self, values: Sequence):
        """Reorder a user-order sequence into normalized order."""
        if len(values) != len(self.exps):
            raise SignatureError(f"expected {len(self.exps)} values, got {len(values)}")
        return tuple(values[u] for u in self.norm_perm)

    def to_user_index(self, k: int) -> int:
        return self.norm_perm[k]

    def from_user_index(self, u: int) -> int:
        try:
            return self.norm_perm.index(u)
        except ValueError:
            raise SignatureError(f"index {u + 1} out of range 1..{len(self.exps)}") from None

    def to_dict(self) -> dict:
        return {"exps": list(self.user_exps), "normalized": list(self.exps), "s": self.s}


def normalize(raw: Iterable[int]) -> ExponentSignature:
    """Stable partition of a target exponent list: ones first."""
    raw = _check_raw(raw)
    ones = [u for u, e in enumerate(raw) if e == 1]
    rest = [u for u, e in enumerate(raw) if e != 1]
    perm = tuple(ones + rest)
    return ExponentSignature(tuple(raw[u] for u in perm), perm)


def source_signature(raw: Iterable[int]) -> ExponentSignature:
    """Source exponents keep the user's order."""
    raw = _check_raw(raw)
    return ExponentSignature(tuple(raw), tuple(range(len(raw))))


def _check_raw(raw: Iterable[int]) -> list[int]:
    out = []
    for e in raw:
        if isinstance(e, bool) or not isinstance(e, int):
            try:
                e = int(str(e).strip())
            except ValueError:
                raise SignatureError(f"exponent is not an integer: {e!r}") from None
        if e < 1:
            raise SignatureError(f"exponents must be >= 1, got {e}")
        out.append(e)
    if not out:
        raise SignatureError("exponent list is empty")
    return out


def parse_exponents(text: str) -> list[int]:
    """Parse ``"2,4,6"`` into ``[2, 4, 6]``."""
    parts = [t for t in text.replace(" ", "").split(",") if t]
    try:
        return [int(t) for t in parts]
    except ValueError:
        raise SignatureError(f"malformed exponent list: {text!r}") from None


@dataclass(frozen=True)
class ProblemInstance:
    """A source model P^n_p and target model P^N_q."""
    source: ExponentSignature
    target: ExponentSignature

    @classmethod
    def of(cls, p: Iterable[int], q: Iterable[int]) -> "ProblemInstance":
        inst = cls(source_signature(p), normalize(q))
        if inst.N < inst.n:
            raise CodimensionError(f"target dimension N={inst.N} is below source dimension n={inst.n}")
        return inst

    @property
    def n(self) -> int:
        return len(self.source)

    @property
    def N(self) -> int:
        return len(self.target)

    @property
    def s(self) -> int:
        return self.target.s

    @property
    def p(self) -> tuple[int, ...]:
        return self.source.exps

    @property
    def q(self) -> tuple[int, ...]:
        return self.target.exps

    def codimension_ok(self) -> bool:
        return self.n <= self.N and self.N - self.n < self.n

    def require_classifiable(self) -> None:
        """Classification needs n <= N and N - n < n."""
        if not self.codimension_ok():
            raise CodimensionError(
                f"classification needs N - n < n (n={self.n}, N={self.N})")

    def to_dict(self) -> dict:
        return {"p": list(self.source.user_exps), "q": list(self.target.user_exps)}


def defining_polynomial(sig: ExponentSignature) -> HermPoly:
    """Polarized defining function Q(z, chi, tau) = tau + 2i sum z_j^q_j chi_j^q_j."""
    n = len(sig)
    q = HermPoly.tau(n)
    for j, e in enumerate(sig.exps):
        q = q + HermPoly.monomial(n, z={j: e}, chi={j: e}, coeff=2 * I)
    return q


def reality_residual(sig: ExponentSignature) -> HermPoly:
    """Q(z, chi, conj(Q)(chi, z, w)) - w; identically zero for a model."""
    q = defining_polynomial(sig)
    return q.substitute_tau(q.bar_swap()) - HermPoly.w(len(sig))


def sample_points(sig: ExponentSignature, count: int, rng: np.random.Generator,
                  radius: float = 1.0, u_range: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """``count`` floating points (z, w) on the model hypersurface.

    z is uniform in the polydisc of the given radius, Re w uniform in
    [-u_range, u_range] and Im w is set from the defining equation.
    """
    n = len(sig)
    mod = radius * np.sqrt(rng.uniform(0.0, 1.0, size=(count, n)))
    arg = rng.uniform(0.0, 2 * np.pi, size=(count, n))
    z = mod * np.exp(1j * arg)
    u = rng.uniform(-u_range, u_range, size=count)
    return z, on_model(sig, z, u)


def on_model(sig: ExponentSignature, z, u) -> np.ndarray:
    """w = u + i sum_j |z_j|^(2 p_j) for given z and real parts u."""
    z = np.asarray(z, dtype=complex)
    p = np.asarray(sig.exps, dtype=float)
    height = np.sum(np.abs(z) ** (2 * p), axis=-1)
    return np.asarray(u, dtype=float) + 1j * height


def sample_point(sig: ExponentSignature, seed: int | None = None, z=None, u=None,
                 radius: float = 1.0, u_range: float = 1.0) -> tuple[np.ndarray, complex]:
    """One point of P^n_p; explicit ``z``/``u`` override the random draw."""
    rng = np.random.default_rng(seed)
    if z is None:
        zs, _ = sample_points(sig, 1, rng, radius, u_range)
        z = zs[0]
    if u is None:
        u = rng.uniform(-u_range, u_range)
    z = np.asarray(z, dtype=complex)
    return z, complex(on_model(sig, z, u))
