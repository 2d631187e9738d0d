"""
Request payload schemas for the CLI and batch files.

Every command's JSON payload is validated here before any computation.
Exact numbers stay exact: rationals are JSON integers or "num/den"
strings, Gaussian rationals additionally accept {"re", "im"} objects or
"re+im*i" text. Floats are rejected wherever an exact value is expected.

Map and automorphism payloads accept what `construct`, `aut compose` and
`aut invert` print, so results can be fed back in unchanged.
"""

from __future__ import annotations

from typing import Annotated, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, StrictInt, ValidationError, model_validator

from .errors import SchemaError

Rational = Union[StrictInt, str]
Exponents = Annotated[list[Annotated[StrictInt, Field(ge=1)]], Field(min_length=1)]


class GaussianModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    re: Rational = 0
    im: Rational = 0


Gaussian = Union[StrictInt, str, GaussianModel]
GaussianMatrix = list[list[Gaussian]]


class PatternModel(BaseModel):
    """sigma maps target indices to source indices, both 1-based user order."""
    model_config = ConfigDict(extra="forbid")

    K: Optional[list[StrictInt]] = None
    sigma: dict[str, StrictInt] = Field(default_factory=dict)


class InstanceRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    p: Exponents
    q: Exponents


class DecideRequest(InstanceRequest):
    pass


class EnumerateRequest(InstanceRequest):
    limit: Optional[Annotated[StrictInt, Field(ge=1)]] = None


class EsstypeRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    p: Exponents


class MapModel(BaseModel):
    """A classified map (W, lambda, r, c) or an external candidate.

    Derived fields printed by `construct` (derived, qpower) are ignored.
    """
    model_config = ConfigDict(extra="ignore", populate_by_name=True)

    p: Exponents
    q: Exponents
    pattern: Optional[PatternModel] = None
    W: Optional[GaussianMatrix] = None
    lam: Optional[Rational] = Field(default=None, alias="lambda")
    r: Optional[Rational] = None
    c: Optional[list[Gaussian]] = None
    components: Optional[list[str]] = None
    numerators: Optional[list[str]] = None
    denom: Optional[str] = None
    last: Optional[str] = None

    @model_validator(mode="after")
    def _has_map_data(self):
        if self.W is None and self.components is None and self.numerators is None:
            raise ValueError("map needs 'W', 'components' or 'numerators'")
        return self


class ClassifiedMapModel(MapModel):
    @model_validator(mode="after")
    def _has_W(self):
        if self.W is None:
            raise ValueError("a classified map needs its coefficient matrix 'W'")
        return self


class VerifyRequest(MapModel):
    samples: Optional[Annotated[StrictInt, Field(ge=0)]] = None
    seed: Optional[StrictInt] = None
    tolerance: Optional[Annotated[float, Field(gt=0)]] = None


class MultRequest(ClassifiedMapModel):
    pass


class ConstructRequest(InstanceRequest):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    mode: Literal["default", "pattern", "W", "random"] = "default"
    pattern: Optional[PatternModel] = None
    W: Optional[GaussianMatrix] = None
    lam: Optional[Rational] = Field(default=None, alias="lambda")
    r: Optional[Rational] = None
    c: Optional[list[Gaussian]] = None
    spread: bool = False
    radical: bool = False
    seed: Optional[StrictInt] = None

    @model_validator(mode="after")
    def _mode_inputs(self):
        if self.mode == "pattern" and self.pattern is None:
            raise ValueError("mode 'pattern' needs a pattern")
        if self.mode == "W" and self.W is None:
            raise ValueError("mode 'W' needs a coefficient matrix W")
        return self


class AutModel(BaseModel):
    """An element in normal form, as printed by `aut compose`."""
    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    q: Exponents
    lam: Optional[Rational] = Field(default=None, alias="lambda")
    U: Optional[GaussianMatrix] = None
    mu: Optional[Union[dict[str, Gaussian], list[Gaussian]]] = None
    beta: Optional[list[Gaussian]] = None
    rho: Optional[Rational] = None
    sigma: Optional[dict[str, StrictInt]] = None


class GeneratorModel(AutModel):
    """One letter of a word; ``kind`` selects the generator family."""
    kind: Literal["perm", "dilation", "mobius", "linear", "canonical"] = "canonical"
    q: Optional[Exponents] = None
    b: Optional[list[Gaussian]] = None
    r: Optional[Rational] = None

    @model_validator(mode="after")
    def _kind_inputs(self):
        if self.kind == "dilation" and self.lam is None:
            raise ValueError("a dilation needs 'lambda'")
        if self.kind == "linear" and self.U is None:
            raise ValueError("a linear letter needs 'U'")
        return self


class AutComposeRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    q: Exponents
    word: list[GeneratorModel]


class AutInvertRequest(AutModel):
    pass


class AutEquivalentRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    q: Exponents
    left: list[GeneratorModel]
    right: list[GeneratorModel]


class EquivalentRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    first: ClassifiedMapModel
    second: ClassifiedMapModel


REQUEST_MODELS: dict[str, type[BaseModel]] = {
    "decide": DecideRequest,
    "enumerate": EnumerateRequest,
    "construct": ConstructRequest,
    "verify": VerifyRequest,
    "mult": MultRequest,
    "esstype": EsstypeRequest,
    "aut-compose": AutComposeRequest,
    "aut-invert": AutInvertRequest,
    "aut-equivalent": AutEquivalentRequest,
    "equivalent": EquivalentRequest,
}

Command = Literal[
    "decide", "enumerate", "construct", "verify", "mult", "esstype",
    "aut-compose", "aut-invert", "aut-equivalent", "equivalent",
]


class Request(BaseModel):
    """One line of a batch file."""
    model_config = ConfigDict(extra="forbid")

    command: Command
    payload: dict = Field(default_factory=dict)


def _describe(exc: ValidationError) -> str:
    parts = []
    for err in exc.errors():
        where = ".".join(str(x) for x in err["loc"]) or "payload"
        parts.append(f"{where}: {err['msg']}")
    return "; ".join(parts)


def validate(command: str, payload) -> BaseModel:
    """Parse a payload against its command's model, raising SchemaError."""
    try:
        model = REQUEST_MODELS[command]
    except KeyError:
        raise SchemaError(f"unknown command {command!r}") from None
    try:
        return model.model_validate(payload)
    except ValidationError as exc:
        raise SchemaError(f"{command}: {_describe(exc)}") from exc


def parse_request(data) -> Request:
    try:
        return Request.model_validate(data)
    except ValidationError as exc:
        raise SchemaError(_describe(exc)) from exc


def as_data(model: BaseModel) -> dict:
    """Plain JSON-style dict with wire names (``lambda``) and no unset fields."""
    return model.model_dump(by_alias=True, exclude_none=True)


def json_schema(command: str) -> dict:
    if command not in REQUEST_MODELS:
        raise SchemaError(f"unknown command {command!r}")
    return REQUEST_MODELS[command].model_json_schema(by_alias=True)
