"""Exception hierarchy for pseudoellipse.

Library code raises these; only the CLI catches them and turns them into
structured JSON errors. Every class carries a short machine-readable ``code``.
"""

from __future__ import annotations


class PsmapError(ValueError):
    """Base class for every domain error raised by the package."""
    code = "error"

    def to_json(self) -> dict:
        return {"code": self.code, "message": str(self)}


class ArityMismatch(PsmapError):
    code = "arity_mismatch"


class SubstitutionError(PsmapError):
    code = "substitution"


class SignatureError(PsmapError):
    code = "invalid_signature"


class CodimensionError(PsmapError):
    code = "codimension"


class PatternError(PsmapError):
    code = "invalid_pattern"


class MatrixConditionError(PsmapError):
    code = "matrix_condition"


class ParameterError(PsmapError):
    code = "invalid_parameter"


class InexactError(PsmapError):
    code = "inexact"


class DenominatorVanishes(PsmapError):
    code = "denominator_vanishes"


class UncertifiedResult(PsmapError):
    code = "uncertified"


class SchemaError(PsmapError):
    code = "schema"
