#!/usr/bin/env python3
"""psmap CLI: transversal maps between pseudoellipsoid models."""

from __future__ import annotations

import argparse
import json
import logging
import math
import random
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import yaml

from . import __version__
from .autgroup import CanonicalAut, compose, invert, orbit_relation, same_component
from .config import PsmapConfig, load_config, resolve_fixture
from .errors import PatternError, PsmapError
from .existence import enumerate_patterns, maps_exist
from .filelock import safe_write
from .ideals import INFINITE, defining_ideal, essential_type, multiplicity
from .maps import default_witness_map, general_map
from .model import ProblemInstance, normalize, parse_exponents, source_signature
from .randexact import random_general_map
from .requests import REQUEST_MODELS, as_data, json_schema, parse_request, validate
from .serialize import (
    any_map_from_json, aut_from_json, aut_to_json, existence_to_json, grat_from_json,
    map_from_json, map_to_json, pattern_from_json, pattern_to_json, rat_from_json,
    verdict_to_json, word_from_json,
)
from .verify import verify_map

log = logging.getLogger(__name__)


class UsageError(Exception):
    """Input that never reached a schema: unreadable files, malformed JSON."""

    def __init__(self, message: str, code: str = "usage"):
        super().__init__(message)
        self.code = code


# ---- dispatcher ----

def _moebius_part(inst: ProblemInstance, data: dict):
    lam = rat_from_json(data.get("lambda", 1))
    r = rat_from_json(data.get("r", 0))
    c = [grat_from_json(x) for x in data.get("c", [])]
    if len(c) == inst.N:
        c = list(inst.target.normalize_values(c))
    return lam, r, c


def _construct(data: dict, cfg: PsmapConfig) -> dict:
    inst = ProblemInstance.of(data["p"], data["q"])
    inst.require_classifiable()
    mode = data.get("mode", "default")
    pattern = pattern_from_json(inst, data["pattern"]) if data.get("pattern") else None
    if mode == "W":
        H = map_from_json(data)
    elif mode == "random":
        seed = data.get("seed", cfg.seed)
        H = random_general_map(inst, pattern, random.Random(seed))
    else:
        if pattern is None:
            res = maps_exist(inst)
            if not res.exists:
                cert = res.certificate
                raise PatternError(
                    f"no admissible pattern: source indices "
                    f"{[i + 1 for i in cert.violating_set]} see too few weak target indices")
            pattern = res.witness
        H = default_witness_map(inst, pattern, spread=data.get("spread", False))
        if any(k in data for k in ("lambda", "r", "c")):
            H = general_map(inst, H.pattern, H.W, *_moebius_part(inst, data))
    log.debug("constructed %s map for p=%s q=%s", mode, list(inst.p), list(inst.target.user_exps))
    return map_to_json(H, radical=data.get("radical", False))


def _compose_word(q, word) -> CanonicalAut:
    return compose(word_from_json(q, word), normalize(q))


def handle(command: str, payload, cfg: PsmapConfig | None = None) -> dict:
    """Validate a payload and run one command; the single entry for CLI and batch."""
    cfg = cfg or PsmapConfig()
    data = as_data(validate(command, payload))
    sampling = cfg.sampling

    if command == "decide":
        inst = ProblemInstance.of(data["p"], data["q"])
        return existence_to_json(inst, maps_exist(inst))

    if command == "enumerate":
        inst = ProblemInstance.of(data["p"], data["q"])
        limit = data.get("limit", cfg.enumeration.limit)
        found = list(enumerate_patterns(inst, limit + 1))
        return {
            **inst.to_dict(),
            "count": min(len(found), limit),
            "truncated": len(found) > limit,
            "patterns": [pattern_to_json(inst, pat) for pat in found[:limit]],
        }

    if command == "construct":
        return _construct(data, cfg)

    if command == "verify":
        H = any_map_from_json(data)
        report = verify_map(
            H,
            samples=data.get("samples", sampling.samples),
            seed=data.get("seed", cfg.seed),
            tol=data.get("tolerance", sampling.tolerance),
            radius=sampling.radius,
            u_range=sampling.u_range,
        )
        return report.to_dict()

    if command == "mult":
        H = map_from_json(data)
        res = multiplicity(H)
        bound = essential_type(H.inst.source)
        out = res.to_dict()
        out["esstype"] = bound
        out["bound_holds"] = (res.value != INFINITE and res.value <= bound) if res.certified else None
        return out

    if command == "esstype":
        sig = source_signature(data["p"])
        return {
            "p": list(sig.exps),
            "esstype": essential_type(sig),
            "product": math.prod(sig.exps),
            "ideal": defining_ideal(sig).to_dict(),
        }

    if command == "aut-compose":
        return aut_to_json(_compose_word(data["q"], data["word"]))

    if command == "aut-invert":
        return aut_to_json(invert(aut_from_json(data)))

    if command == "aut-equivalent":
        T1 = _compose_word(data["q"], data["left"])
        T2 = _compose_word(data["q"], data["right"])
        return {
            "equal": T1.same_as(T2),
            "same_component": same_component(T1, T2),
            "left": aut_to_json(T1),
            "right": aut_to_json(T2),
        }

    if command == "equivalent":
        H1 = map_from_json(data["first"])
        H2 = map_from_json(data["second"])
        return verdict_to_json(orbit_relation(H1, H2))

    raise UsageError(f"unknown command {command!r}")


# ---- argument helpers ----

def _read_text(path: str, cfg: PsmapConfig) -> str:
    if path == "-":
        return sys.stdin.read()
    p = resolve_fixture(path, cfg)
    try:
        return p.read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}", "missing_file") from exc


def _loads(text: str, where: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{where}: malformed JSON ({exc.msg} at line {exc.lineno})",
                         "malformed_json") from exc


def _json_arg(value: str, cfg: PsmapConfig, what: str):
    """Inline JSON, or a file (searched in the fixture directory too)."""
    if value.lstrip()[:1] in ("{", "["):
        return _loads(value, what)
    return _loads(_read_text(value, cfg), value)


def _input_payload(args) -> dict | None:
    if getattr(args, "input", None):
        payload = _json_arg(args.input, args.cfg, "--input")
        if not isinstance(payload, dict):
            raise UsageError("--input must hold a JSON object")
        return payload
    return None


def _exponents(args, *names) -> dict:
    out = {}
    for name in names:
        text = getattr(args, name, None)
        if text is None:
            raise UsageError(f"--{name} is required (or give --input)")
        out[name] = parse_exponents(text)
    return out


# ---- commands ----

def cmd_decide(args):
    """Decide whether a transversal map exists."""
    payload = _input_payload(args) or _exponents(args, "p", "q")
    return handle("decide", payload, args.cfg)


def cmd_enumerate(args):
    """List admissible patterns in canonical order."""
    payload = _input_payload(args) or _exponents(args, "p", "q")
    if args.limit is not None:
        payload["limit"] = args.limit
    return handle("enumerate", payload, args.cfg)


def cmd_construct(args):
    """Build a classified map from a pattern, a matrix or a random draw."""
    payload = _input_payload(args) or _exponents(args, "p", "q")
    cfg = args.cfg
    if args.pattern:
        payload["pattern"] = _json_arg(args.pattern, cfg, "--pattern")
    if args.W:
        payload["W"] = _json_arg(args.W, cfg, "--W")
        payload["mode"] = "W"
    elif args.random:
        payload["mode"] = "random"
        payload["seed"] = cfg.seed
    elif args.pattern:
        payload["mode"] = "pattern"
    elif args.default:
        payload["mode"] = "default"
    if args.lam is not None:
        payload["lambda"] = args.lam
    if args.r is not None:
        payload["r"] = args.r
    if args.c:
        payload["c"] = _json_arg(args.c, cfg, "--c")
    if args.spread:
        payload["spread"] = True
    if args.print_radical:
        payload["radical"] = True
    return handle("construct", payload, cfg)


def cmd_verify(args):
    """Check a map symbolically (polarized residual) and numerically."""
    payload = _json_arg(args.map, args.cfg, "--map")
    if not isinstance(payload, dict):
        raise UsageError("--map must hold a JSON object")
    if args.samples is not None:
        payload["samples"] = args.samples
    if args.tolerance is not None:
        payload["tolerance"] = args.tolerance
    if args.seed is not None:
        payload["seed"] = args.seed
    return handle("verify", payload, args.cfg)


def cmd_mult(args):
    """Multiplicity of a classified map at the origin, with certificate."""
    return handle("mult", _json_arg(args.map, args.cfg, "--map"), args.cfg)


def cmd_esstype(args):
    """Essential type of the source model P^n_p."""
    payload = _input_payload(args) or _exponents(args, "p")
    return handle("esstype", payload, args.cfg)


def cmd_aut_compose(args):
    payload = _input_payload(args) or {
        **_exponents(args, "q"),
        "word": _json_arg(args.word, args.cfg, "--word") if args.word else [],
    }
    return handle("aut-compose", payload, args.cfg)


def cmd_aut_invert(args):
    payload = _json_arg(args.aut, args.cfg, "--aut")
    if isinstance(payload, dict) and "q" not in payload and args.q:
        payload["q"] = parse_exponents(args.q)
    return handle("aut-invert", payload, args.cfg)


def cmd_aut_equivalent(args):
    payload = _input_payload(args) or {
        **_exponents(args, "q"),
        "left": _json_arg(args.left, args.cfg, "--left"),
        "right": _json_arg(args.right, args.cfg, "--right"),
    }
    return handle("aut-equivalent", payload, args.cfg)


def cmd_equivalent(args):
    """Decide whether two classified maps lie in one automorphism orbit."""
    payload = {
        "first": _json_arg(args.first, args.cfg, "--first"),
        "second": _json_arg(args.second, args.cfg, "--second"),
    }
    return handle("equivalent", payload, args.cfg)


def run_batch_line(line: str, cfg: PsmapConfig) -> dict:
    """One batch line to one result; failures become error objects."""
    try:
        req = parse_request(_loads(line, "batch line"))
        return handle(req.command, req.payload, cfg)
    except UsageError as exc:
        return {"error": {"code": exc.code, "message": str(exc)}}
    except PsmapError as exc:
        return {"error": exc.to_json()}
    except Exception as exc:  # keep the batch going
        log.exception("batch line failed")
        return {"error": {"code": "internal", "message": f"{type(exc).__name__}: {exc}"}}


def cmd_batch(args):
    """Run newline-delimited requests, one result line per request."""
    cfg = args.cfg
    lines = [ln for ln in _read_text(args.file, cfg).splitlines() if ln.strip()]
    jobs = args.jobs or cfg.jobs
    log.debug("batch: %d lines on %d worker(s)", len(lines), jobs)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(lambda ln: run_batch_line(ln, cfg), lines))
    else:
        results = [run_batch_line(ln, cfg) for ln in lines]
    text = "".join(json.dumps(r) + "\n" for r in results)
    if args.output:
        safe_write(Path(args.output), text)
        return {
            "output": args.output,
            "lines": len(results),
            "errors": sum(1 for r in results if "error" in r),
        }
    sys.stdout.write(text)
    return None


def cmd_schema(args):
    """Print the JSON schema of a command's request payload."""
    return json_schema(args.name)


# ---- entry points ----

def _emit(result, fmt: str):
    if fmt == "pretty":
        sys.stdout.write(yaml.safe_dump(result, sort_keys=False, allow_unicode=True))
    else:
        sys.stdout.write(json.dumps(result, indent=2) + "\n")


def _setup_logging(args):
    level = logging.WARNING
    if args.verbose:
        level = logging.DEBUG
    elif args.quiet:
        level = logging.ERROR
    logging.basicConfig(level=level, stream=sys.stderr, force=True,
                        format="%(levelname)s %(name)s: %(message)s")


def _add_map_args(p, required=True):
    p.add_argument("--map", "-m", required=required,
                   help="Map JSON file (searched in the fixture directory) or inline JSON")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="psmap",
        description="Transversal maps between pseudoellipsoid models P^n_p -> P^N_q",
        allow_abbrev=False,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", "-c", help="Path to psmap.yaml config file")
    parser.add_argument("--verbose", "-v", action="store_true", help="Debug logging on stderr")
    parser.add_argument("--quiet", "-q", action="store_true", help="Only errors on stderr")
    parser.add_argument("--format", choices=["json", "pretty"], help="Output format (default: from config)")
    parser.add_argument("--seed", type=int, help="Seed for random construction and sampling")

    sub = parser.add_subparsers(dest="command", help="Available commands")

    # decide
    p_decide = sub.add_parser("decide", help="Decide existence of a transversal map")
    p_decide.add_argument("--p", help="Source exponents, e.g. 2,4,6")
    p_decide.add_argument("--q", help="Target exponents, e.g. 1,1,1,2,2")
    p_decide.add_argument("--input", "-i", help="Request payload JSON (file, '-' or inline)")
    p_decide.set_defaults(func=cmd_decide)

    # enumerate
    p_enum = sub.add_parser("enumerate", help="Enumerate admissible patterns")
    p_enum.add_argument("--p", help="Source exponents")
    p_enum.add_argument("--q", help="Target exponents")
    p_enum.add_argument("--limit", type=int, help="Stop after N patterns (default: from config)")
    p_enum.add_argument("--input", "-i", help="Request payload JSON")
    p_enum.set_defaults(func=cmd_enumerate)

    # construct
    p_con = sub.add_parser("construct", help="Construct a classified map")
    p_con.add_argument("--p", help="Source exponents")
    p_con.add_argument("--q", help="Target exponents")
    p_con.add_argument("--input", "-i", help="Request payload JSON")
    mode = p_con.add_mutually_exclusive_group()
    mode.add_argument("--default", action="store_true", help="Witness map of the canonical pattern")
    mode.add_argument("--W", help="Coefficient matrix JSON (rows = source, columns = target)")
    mode.add_argument("--random", action="store_true", help="Random exact map (uses --seed)")
    p_con.add_argument("--pattern", help='Pattern JSON, e.g. {"sigma": {"4": 3, "5": 3}}')
    p_con.add_argument("--lambda", dest="lam", help="Dilation, a positive rational")
    p_con.add_argument("--r", help="Real Moebius parameter")
    p_con.add_argument("--c", help="Linear-block shift c as JSON list")
    p_con.add_argument("--spread", action="store_true", help="Keep every preimage of the pattern")
    p_con.add_argument("--print-radical", action="store_true", help="Add components with ^(1/q) radicals")
    p_con.set_defaults(func=cmd_construct)

    # verify
    p_ver = sub.add_parser("verify", help="Verify that a map sends source into target")
    _add_map_args(p_ver)
    p_ver.add_argument("--samples", type=int, help="Numeric sample count")
    p_ver.add_argument("--tolerance", type=float, help="Numeric tolerance")
    p_ver.set_defaults(func=cmd_verify)

    # mult
    p_mult = sub.add_parser("mult", help="Multiplicity of a classified map")
    _add_map_args(p_mult)
    p_mult.set_defaults(func=cmd_mult)

    # esstype
    p_ess = sub.add_parser("esstype", help="Essential type of P^n_p")
    p_ess.add_argument("--p", help="Source exponents")
    p_ess.add_argument("--input", "-i", help="Request payload JSON")
    p_ess.set_defaults(func=cmd_esstype)

    # aut
    p_aut = sub.add_parser("aut", help="Stability group of the target")
    aut_sub = p_aut.add_subparsers(dest="aut_command")
    p_ac = aut_sub.add_parser("compose", help="Normal form of a word of generators")
    p_ac.add_argument("--q", help="Target exponents")
    p_ac.add_argument("--word", help="Word JSON: list of generators, first acts first")
    p_ac.add_argument("--input", "-i", help="Request payload JSON")
    p_ac.set_defaults(func=cmd_aut_compose)
    p_ai = aut_sub.add_parser("invert", help="Inverse of an element in normal form")
    p_ai.add_argument("--aut", required=True, help="Element JSON as printed by 'aut compose'")
    p_ai.add_argument("--q", help="Target exponents, if the element omits them")
    p_ai.set_defaults(func=cmd_aut_invert)
    p_ae = aut_sub.add_parser("equivalent", help="Whether two words give the same element")
    p_ae.add_argument("--q", help="Target exponents")
    p_ae.add_argument("--left", help="First word JSON")
    p_ae.add_argument("--right", help="Second word JSON")
    p_ae.add_argument("--input", "-i", help="Request payload JSON")
    p_ae.set_defaults(func=cmd_aut_equivalent)

    # equivalent
    p_eq = sub.add_parser("equivalent", help="Orbit equivalence of two classified maps")
    p_eq.add_argument("--first", required=True, help="First map JSON")
    p_eq.add_argument("--second", required=True, help="Second map JSON")
    p_eq.set_defaults(func=cmd_equivalent)

    # batch
    p_batch = sub.add_parser("batch", help="Run newline-delimited requests")
    p_batch.add_argument("file", help="Request file ('-' for stdin)")
    p_batch.add_argument("--jobs", "-j", type=int, help="Worker threads (default: from config)")
    p_batch.add_argument("--output", "-o", help="Write results here instead of stdout")
    p_batch.set_defaults(func=cmd_batch)

    # schema
    p_schema = sub.add_parser("schema", help="JSON schema of a request payload")
    p_schema.add_argument("name", choices=sorted(REQUEST_MODELS), help="Command name")
    p_schema.set_defaults(func=cmd_schema)

    return parser


def run(argv: list[str] | None = None) -> int:
    """Parse argv, run one command, print JSON; returns the exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)

    if not getattr(args, "func", None):
        parser.print_help(sys.stderr)
        return 2

    _setup_logging(args)
    try:
        cfg = load_config(args.config)
    except (OSError, yaml.YAMLError, ValueError, TypeError) as exc:
        _emit({"error": {"code": "config", "message": str(exc)}}, "json")
        return 2
    if args.seed is not None:
        cfg.seed = args.seed
    args.cfg = cfg
    fmt = args.format or cfg.format

    try:
        result = args.func(args)
    except UsageError as exc:
        _emit({"error": {"code": exc.code, "message": str(exc)}}, fmt)
        return 2
    except PsmapError as exc:
        log.debug("%s failed: %s", args.command, exc)
        _emit({"error": exc.to_json()}, fmt)
        return 1

    if result is not None:
        _emit(result, fmt)
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
