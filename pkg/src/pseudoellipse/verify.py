"""
Membership checks for candidate maps P^n_p -> P^N_q.

The symbolic check is the polarized identity. A map in common-denominator
q-power form (numerators P~_j, denominator delta, G = last / delta) sends
the source into the target iff

    last * conj(delta) - conj(last) * delta - 2i sum_j P~_j * conj(P~_j)

vanishes once w is replaced by the source's Q(z, chi, tau). Here conj is
``bar_swap``, which moves (z, w) to (chi, tau). The result is an exact
polynomial and "zero" means an empty term map.

The numeric checks sample real points of the source and compare
Im G with sum |P_j|^2, which does not depend on root branches.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DenominatorVanishes, ParameterError
from .exactpoly import I, GRat, HermPoly
from .maps import CandidateMap, ClassifiedMap
from .model import defining_polynomial, sample_points

log = logging.getLogger(__name__)

AnyMap = Union[ClassifiedMap, CandidateMap]

RESAMPLE_ROUNDS = 10
DELTA_EPS = 1e-12


def polarized_residual(H: AnyMap) -> HermPoly:
    data = H.qpower
    acc = data.last * data.denom.bar_swap() - data.last.bar_swap() * data.denom
    for num in data.numerators:
        if not num.is_zero():
            acc = acc - (num * num.bar_swap()).scale(2 * I)
    return acc.substitute_w(defining_polynomial(H.inst.source))


def residual_symmetry_holds(R: HermPoly, Q: HermPoly) -> bool:
    """Under w = Q the residual is anti-invariant: conj(R)|_{w=Q} = -R."""
    return R.bar_swap().substitute_w(Q) == -R


def transversal_coefficient(H: AnyMap) -> GRat | None:
    """dG/dw at the origin, or None if delta vanishes there."""
    data = H.qpower
    d0 = data.denom.constant_term()
    if not d0:
        return None
    dw = data.denom.w_linear_coefficient()
    lw = data.last.w_linear_coefficient()
    l0 = data.last.constant_term()
    return (lw * d0 - l0 * dw) / (d0 * d0)


def is_transversal(H: AnyMap) -> bool:
    coeff = transversal_coefficient(H)
    return coeff is not None and not coeff.is_zero()


def _draw(H: AnyMap, nsamples: int, rng: np.random.Generator, radius: float,
          u_range: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Sample source points, redrawing any that land on delta = 0."""
    sig = H.inst.source
    z, w = sample_points(sig, nsamples, rng, radius, u_range)
    delta = H.qpower.denom.evaluate(z, w)
    for round_ in range(RESAMPLE_ROUNDS):
        bad = np.abs(delta) < DELTA_EPS
        if not bad.any():
            return z, w, delta
        log.warning("delta ~ 0 at %d samples, redrawing (round %d)", int(bad.sum()), round_ + 1)
        z_new, w_new = sample_points(sig, int(bad.sum()), rng, radius, u_range)
        z[bad], w[bad] = z_new, w_new
        delta = H.qpower.denom.evaluate(z, w)
    raise DenominatorVanishes("delta keeps vanishing at sampled points")


def membership_errors(H: AnyMap, z, w) -> np.ndarray:
    """|Im G - sum_j |P_j|^2| at the given points."""
    data = H.qpower
    delta = data.denom.evaluate(z, w)
    if np.any(np.abs(delta) < DELTA_EPS):
        raise DenominatorVanishes("delta vanishes at an evaluation point")
    height = np.zeros(np.shape(delta))
    for num in data.numerators:
        if not num.is_zero():
            height = height + np.abs(num.evaluate(z, w) / delta) ** 2
    G = data.last.evaluate(z, w) / delta
    return np.abs(G.imag - height)


def numeric_membership(H: AnyMap, nsamples: int = 100, tol: float = 1e-9, seed: int = 0,
                       radius: float = 1.0, u_range: float = 1.0,
                       include_origin: bool = True) -> float:
    """Max membership error over sampled points of the source model."""
    if tol <= 0:
        raise ParameterError("tolerance must be positive")
    rng = np.random.default_rng(seed)
    n = H.inst.n
    points_z = [np.zeros((1, n), dtype=complex)] if include_origin else []
    points_w = [np.zeros(1, dtype=complex)] if include_origin else []
    if nsamples > 0:
        z, w, _ = _draw(H, nsamples, rng, radius, u_range)
        points_z.append(z)
        points_w.append(w)
    if not points_z:
        return 0.0
    errors = membership_errors(H, np.concatenate(points_z), np.concatenate(points_w))
    worst = float(errors.max()) if errors.size else 0.0
    log.debug("numeric membership: max error %.3e over %d points (tol %.1e)",
              worst, errors.size, tol)
    return worst


def denominator_nonvanishing(H: AnyMap, nsamples: int = 100, seed: int = 0,
                             radius: float = 1.0, u_range: float = 1.0) -> float:
    """Min |delta| over sampled source points (no redrawing)."""
    if nsamples <= 0:
        return float(abs(complex(H.qpower.denom.constant_term())))
    rng = np.random.default_rng(seed)
    z, w = sample_points(H.inst.source, nsamples, rng, radius, u_range)
    return float(np.abs(H.qpower.denom.evaluate(z, w)).min())


@dataclass(frozen=True)
class ResidualReport:
    symbolic_zero: bool
    residual: HermPoly
    numeric_max_error: float
    transversal: bool
    denom_min_modulus: float
    w_coefficient: GRat | None = None
    samples: int = 0
    tolerance: float = 1e-9

    @property
    def numeric_ok(self) -> bool:
        return self.numeric_max_error < self.tolerance

    @property
    def consistent(self) -> bool:
        """A zero residual must come with a small numeric error."""
        return self.numeric_ok if self.symbolic_zero else True

    def to_dict(self) -> dict:
        return {
            "symbolic_zero": self.symbolic_zero,
            "residual": self.residual.to_text(),
            "residual_terms": len(self.residual.terms),
            "numeric_max_error": self.numeric_max_error,
            "transversal": self.transversal,
            "w_coefficient": self.w_coefficient.to_text() if self.w_coefficient is not None else None,
            "denom_min_modulus": self.denom_min_modulus,
            "samples": self.samples,
        }


def verify_map(H: AnyMap, samples: int = 100, seed: int = 0, tol: float = 1e-9,
               radius: float = 1.0, u_range: float = 1.0) -> ResidualReport:
    residual = polarized_residual(H)
    error = numeric_membership(H, samples, tol, seed, radius, u_range)
    report = ResidualReport(
        symbolic_zero=residual.is_zero(),
        residual=residual,
        numeric_max_error=error,
        transversal=is_transversal(H),
        denom_min_modulus=denominator_nonvanishing(H, samples, seed, radius, u_range),
        w_coefficient=transversal_coefficient(H),
        samples=samples,
        tolerance=tol,
    )
    if not report.consistent:
        log.warning("residual is zero but numeric error %.3e exceeds %.1e", error, tol)
    return report
