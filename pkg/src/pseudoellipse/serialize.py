"""
JSON forms of instances, patterns, maps, automorphisms and certificates.

Rationals travel as "num/den" strings, Gaussian rationals as {"re", "im"},
polynomials as canonical text. Every index is 1-based and refers to the
user's coordinate order; normalization stays internal.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Any, Mapping

from .autgroup import CanonicalAut, Dilation, LinearPhase, Mobius, OrbitVerdict, Perm
from .errors import ParameterError, PsmapError, SchemaError
from .exactpoly import ONE, ZERO, GRat, HermPoly, fraction_text, to_fraction
from .existence import AdmissiblePattern, ExistenceResult, InfeasibilityCertificate
from .maps import CandidateMap, ClassifiedMap, general_map
from .model import ExponentSignature, ProblemInstance, normalize


def rat_to_json(x: Fraction) -> str:
    return fraction_text(Fraction(x))


def rat_from_json(x) -> Fraction:
    try:
        return to_fraction(x)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise SchemaError(f"not an exact rational: {x!r}") from exc


def grat_to_json(x: GRat) -> dict:
    return {"re": fraction_text(x.re), "im": fraction_text(x.im)}


def grat_from_json(x) -> GRat:
    try:
        return GRat.of(x)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise SchemaError(f"not a Gaussian rational: {x!r}") from exc


def instance_from_json(data: Mapping) -> ProblemInstance:
    try:
        return ProblemInstance.of(data["p"], data["q"])
    except KeyError as exc:
        raise SchemaError(f"missing field {exc.args[0]!r}") from exc


# ---- patterns and existence ----

def pattern_to_json(inst: ProblemInstance, pattern: AdmissiblePattern) -> dict:
    t = inst.target
    sigma = {t.to_user_index(k) + 1: i + 1 for k, i in pattern.mapping.items()}
    keys = sorted(sigma)
    return {"K": keys, "sigma": {str(k): sigma[k] for k in keys}}


def pattern_from_json(inst: ProblemInstance, data: Mapping) -> AdmissiblePattern:
    t = inst.target
    mapping = {}
    for user_k, i in dict(data.get("sigma", {})).items():
        k = t.from_user_index(int(user_k) - 1)
        mapping[k] = int(i) - 1
    if "K" in data and sorted(int(k) for k in data["K"]) != sorted(t.to_user_index(k) + 1 for k in mapping):
        raise SchemaError("K does not match the keys of sigma")
    return AdmissiblePattern.from_mapping(mapping)


def certificate_to_json(inst: ProblemInstance, cert: InfeasibilityCertificate) -> dict:
    t = inst.target
    return {
        "violating_set": [i + 1 for i in cert.violating_set],
        "neighbourhood": sorted(t.to_user_index(k) + 1 for k in cert.neighbourhood),
        "s": cert.s,
        "matching_size": cert.matching_size,
        "required": inst.n - inst.s,
    }


def certificate_from_json(inst: ProblemInstance, data: Mapping) -> InfeasibilityCertificate:
    t = inst.target
    return InfeasibilityCertificate(
        tuple(int(i) - 1 for i in data["violating_set"]),
        tuple(sorted(t.from_user_index(int(k) - 1) for k in data.get("neighbourhood", []))),
        int(data.get("s", inst.s)),
        int(data.get("matching_size", 0)),
    )


def existence_to_json(inst: ProblemInstance, result: ExistenceResult) -> dict:
    out: dict[str, Any] = {"exists": result.exists, "matching_size": result.matching_size,
                           "required": inst.n - inst.s}
    if result.witness is not None:
        out["witness"] = pattern_to_json(inst, result.witness)
    if result.certificate is not None:
        out["certificate"] = certificate_to_json(inst, result.certificate)
    return out


# ---- maps ----

def qpower_to_json(inst: ProblemInstance, numerators, denom: HermPoly, last: HermPoly) -> dict:
    return {
        "numerators": list(inst.target.denormalize([p.to_text() for p in numerators])),
        "denom": denom.to_text(),
        "last": last.to_text(),
    }


def map_to_json(H: ClassifiedMap, radical: bool = False) -> dict:
    inst = H.inst
    t = inst.target
    c_full = list(H.c) + [ZERO] * (inst.N - inst.s)
    out = {
        **inst.to_dict(),
        "pattern": pattern_to_json(inst, H.pattern),
        "W": [[grat_to_json(x) for x in t.denormalize(row)] for row in H.W],
        "lambda": rat_to_json(H.lam),
        "r": rat_to_json(H.r),
        "c": [grat_to_json(x) for x in t.denormalize(c_full)],
        "derived": {
            "b_prime": [grat_to_json(x) for x in H.b_prime],
            "beta": rat_to_json(H.beta),
        },
        "qpower": qpower_to_json(inst, H.numerators, H.denom, H.last),
    }
    if radical:
        out["components"] = H.radical_components()
    return out


def map_from_json(data: Mapping) -> ClassifiedMap:
    inst = instance_from_json(data)
    t = inst.target
    try:
        rows = data["W"]
    except KeyError:
        raise SchemaError("map needs a coefficient matrix 'W'") from None
    if len(rows) != inst.n or any(len(row) != inst.N for row in rows):
        raise SchemaError(f"W must be {inst.n}x{inst.N}")
    W = [t.normalize_values([grat_from_json(x) for x in row]) for row in rows]
    c = [grat_from_json(x) for x in data.get("c", [])]
    if len(c) == inst.N:
        c = list(t.normalize_values(c))
    pattern = pattern_from_json(inst, data["pattern"]) if data.get("pattern") else None
    return general_map(inst, pattern, W,
                       rat_from_json(data.get("lambda", 1)),
                       rat_from_json(data.get("r", 0)), c)


def candidate_from_json(data: Mapping) -> CandidateMap:
    """External candidate: q-power numerators over a common denominator, or
    z-level polynomial components."""
    inst = instance_from_json(data)
    n = inst.n
    try:
        last = HermPoly.parse(data.get("last", "(1+0*i)*w"), n)
        denom = HermPoly.parse(data.get("denom", "(1+0*i)"), n)
        if "components" in data:
            comps = [HermPoly.parse(text, n) for text in data["components"]]
            return CandidateMap.from_components(inst, inst.target.normalize_values(comps),
                                                denom=denom, last=last)
        nums = [HermPoly.parse(text, n) for text in data["numerators"]]
    except KeyError as exc:
        raise SchemaError(f"candidate needs {exc.args[0]!r}") from exc
    except ValueError as exc:
        if isinstance(exc, PsmapError):
            raise
        raise SchemaError(str(exc)) from exc
    return CandidateMap(inst, tuple(inst.target.normalize_values(nums)), denom, last)


def any_map_from_json(data: Mapping) -> ClassifiedMap | CandidateMap:
    return map_from_json(data) if "W" in data else candidate_from_json(data)


# ---- automorphisms ----

def _weak_dict(t: ExponentSignature, values) -> dict:
    return {str(t.to_user_index(k) + 1): v for k, v in zip(t.weak_indices, values)}


def aut_to_json(T: CanonicalAut) -> dict:
    t = T.target
    return {
        "q": list(t.user_exps),
        "lambda": rat_to_json(T.lam),
        "U": [[grat_to_json(x) for x in row] for row in T.U],
        "mu": _weak_dict(t, [grat_to_json(x) for x in T.mu]),
        "beta": [grat_to_json(x) for x in T.beta],
        "rho": rat_to_json(T.rho),
        "sigma": _weak_dict(t, [t.to_user_index(k) + 1 for k in T.sigma]),
    }


def _mu_from_json(t: ExponentSignature, data) -> tuple[GRat, ...]:
    mu = [ONE] * (len(t) - t.s)
    if isinstance(data, Mapping):
        for user_k, x in data.items():
            k = t.from_user_index(int(user_k) - 1)
            if k < t.s:
                raise SchemaError(f"phase given for linear index {user_k}")
            mu[k - t.s] = grat_from_json(x)
    elif data:
        mu = [grat_from_json(x) for x in data]
    return tuple(mu)


def _sigma_from_json(t: ExponentSignature, data) -> tuple[int, ...]:
    sigma = list(t.weak_indices)
    for user_k, user_image in dict(data or {}).items():
        k = t.from_user_index(int(user_k) - 1)
        image = t.from_user_index(int(user_image) - 1)
        if k < t.s or image < t.s:
            raise ParameterError("permutations act on weak indices only")
        sigma[k - t.s] = image
    return tuple(sigma)


def _matrix_from_json(rows) -> tuple:
    return tuple(tuple(grat_from_json(x) for x in row) for row in rows or ())


def aut_from_json(data: Mapping, target: ExponentSignature | None = None) -> CanonicalAut:
    t = target if target is not None else normalize(data["q"])
    s = t.s
    U = _matrix_from_json(data.get("U")) or tuple(
        tuple(ONE if a == b else ZERO for b in range(s)) for a in range(s))
    beta = tuple(grat_from_json(x) for x in data.get("beta", [])) or (ZERO,) * s
    return CanonicalAut(t, rat_from_json(data.get("lambda", 1)), U,
                        _mu_from_json(t, data.get("mu")), beta,
                        rat_from_json(data.get("rho", 0)), _sigma_from_json(t, data.get("sigma")))


def generator_from_json(t: ExponentSignature, data: Mapping):
    kind = data.get("kind", "canonical")
    if kind == "perm":
        return Perm(t, _sigma_from_json(t, data.get("sigma")))
    if kind == "dilation":
        return Dilation(t, rat_from_json(data["lambda"]))
    if kind == "mobius":
        b = [grat_from_json(x) for x in data.get("b", [])]
        if len(b) == len(t):
            b = list(t.normalize_values(b))
        return Mobius(t, tuple(b), rat_from_json(data.get("r", 0)))
    if kind == "linear":
        return LinearPhase(t, _matrix_from_json(data.get("U")), _mu_from_json(t, data.get("mu")))
    if kind == "canonical":
        return aut_from_json(data, t)
    raise SchemaError(f"unknown automorphism kind {kind!r}")


def word_from_json(q, word) -> list:
    t = normalize(q)
    return [generator_from_json(t, item) for item in word]


def verdict_to_json(verdict: OrbitVerdict) -> dict:
    return {
        "equivalent": verdict.equivalent,
        "status": verdict.status,
        "reason": verdict.reason,
        "witness": aut_to_json(verdict.witness) if verdict.witness else None,
    }
