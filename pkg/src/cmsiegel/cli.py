"""Command-line front end.

    cmsiegel gsp enumerate|check|lift
    cmsiegel family act|eval
    cmsiegel cm point|xi|basis
    cmsiegel rayclass build|H
    cmsiegel invariant value|audit|classpoly|crosscheck

Every command writes JSON to stdout (or --out).  Exit status: 0 success,
2 mathematical failure, 1 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass
from dataclasses import field as dc_field
from pathlib import Path
from typing import Any

import mpmath

from . import __version__
from .cmfield import DATA_FILES, load_field
from .errors import CMSiegelError, MathematicalFailure, StageError
from .family import FamilyDescriptor, FamilyIndex, act_on_index, evaluate_member
from .modfun import catalog
from .modfun.precision import ENV_BITS, Precision, default_bits
from .zmatrix import ModMatrix, enumerate_gsp, gsp_check, matrix_from_json, matrix_to_json, sp_lift

EXIT_OK, EXIT_USAGE, EXIT_MATH = 0, 1, 2

DEFAULTS = {"target": 1e-25, "pole_threshold": 1e-30, "denom_bound": 10**6, "trials": 25, "seed": 0}


class UsageError(Exception):
    """Bad command line or configuration; maps to exit status 1."""


class ConfigError(UsageError):
    def __init__(self, pointer: str, message: str):
        self.pointer = pointer
        super().__init__(f"{pointer}: {message}")


@dataclass
class RunConfig:
    field: str | None = None
    N: int | None = None
    function: str | None = None
    target: float = DEFAULTS["target"]
    pole_threshold: float = DEFAULTS["pole_threshold"]
    bits: int = dc_field(default_factory=default_bits)
    denom_bound: int = DEFAULTS["denom_bound"]
    trials: int = DEFAULTS["trials"]
    seed: int = DEFAULTS["seed"]
    out: str | None = None
    format: str = "json"

    def precision(self) -> Precision:
        return Precision(target=self.target, pole_threshold=self.pole_threshold, bits=self.bits)

    def to_json(self) -> dict:
        return asdict(self)


_CONFIG_TYPES = {"field": str, "N": int, "function": str, "target": (int, float), "pole_threshold": (int, float),
                 "bits": int, "denom_bound": int, "trials": int, "seed": int, "out": str, "format": str}


def _validate(cfg: RunConfig) -> RunConfig:
    if cfg.N is not None and cfg.N < 2:
        raise ConfigError("/N", f"level must be an integer >= 2, got {cfg.N}")
    if cfg.function is not None and cfg.function not in catalog.available():
        raise ConfigError("/function", f"unknown catalog entry {cfg.function!r}; available: "
                          + ", ".join(catalog.available()))
    if not cfg.target > 0:
        raise ConfigError("/target", "must be positive")
    if cfg.bits < 53:
        raise ConfigError("/bits", "must be at least 53")
    if cfg.denom_bound < 1:
        raise ConfigError("/denom_bound", "must be positive")
    if cfg.format not in ("json", "csv"):
        raise ConfigError("/format", "must be json or csv")
    return cfg


def load_config(path: str | Path | dict) -> RunConfig:
    """Read a JSON run configuration, apply defaults and validate it."""
    if isinstance(path, dict):
        data = path
    else:
        try:
            data = json.loads(Path(path).read_text())
        except FileNotFoundError:
            raise UsageError(f"config file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError("", f"invalid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("", "config must be a JSON object")
    if "level" in data and "N" not in data:
        data = {**data, "N": data["level"]}
        del data["level"]
    prec = data.pop("precision", None) if isinstance(data.get("precision"), dict) else None
    if prec:
        data = {**data, **prec}
    kwargs = {}
    for key, value in data.items():
        if key not in _CONFIG_TYPES:
            raise ConfigError(f"/{key}", "unknown key")
        if not isinstance(value, _CONFIG_TYPES[key]) or isinstance(value, bool):
            raise ConfigError(f"/{key}", f"wrong type {type(value).__name__}")
        kwargs[key] = value
    return _validate(RunConfig(**kwargs))


# -- helpers ------------------------------------------------------------------

def _field(name: str):
    p = Path(name)
    if p.exists():
        return load_field(p)
    stem = p.name[:-5] if p.name.endswith(".json") else p.name
    if stem in DATA_FILES and p.parent == Path("."):
        return load_field(stem)
    raise UsageError(f"field file not found: {name}")


def _matrix(text: str):
    try:
        return matrix_from_json(json.loads(text))
    except (json.JSONDecodeError, TypeError, ValueError) as exc:
        raise UsageError(f"cannot parse matrix {text!r}: {exc}") from None


def _point(text: str):
    """Either {"re": [[..]], "im": [[..]]} or a complex scalar like "0.1+1.2j"."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        data = text
    if isinstance(data, dict):
        re, im = data["re"], data["im"]
        return [[mpmath.mpc(mpmath.mpf(str(a)), mpmath.mpf(str(b))) for a, b in zip(r, i)] for r, i in zip(re, im)]
    return [[mpmath.mpc(complex(str(data).replace(" ", "")))]]


def _require(cfg: RunConfig, *names: str) -> None:
    missing = [n for n in names if getattr(cfg, n) is None]
    if missing:
        raise UsageError("missing required option(s): " + ", ".join("--" + m.replace("N", "level") for m in missing))


def _setup(cfg: RunConfig):
    from .invariant import CMSetup
    return CMSetup.build(_field(cfg.field))


def _meta(cfg: RunConfig) -> dict:
    return {"version": __version__, "config": cfg.to_json()}


# -- commands -----------------------------------------------------------------

def cmd_gsp(args, cfg: RunConfig) -> Any:
    if args.action == "enumerate":
        elems = enumerate_gsp(args.genus, args.modulus, budget=args.budget)
        return {"genus": args.genus, "modulus": args.modulus, "count": len(elems),
                "elements": [e.to_json() for e in elems]}
    if args.matrix is None:
        raise UsageError("--matrix is required")
    m = ModMatrix(_matrix(args.matrix), args.modulus)
    e = gsp_check(m)
    if args.action == "check":
        return {"member": True, "multiplier": e.multiplier, "element": e.to_json()}
    return {"element": e.to_json(), "lift": matrix_to_json(sp_lift(e))}


def _index(args, cfg: RunConfig) -> FamilyIndex:
    if args.index is None:
        return FamilyIndex.identity(args.genus, cfg.N)
    num = _matrix(args.index)
    return FamilyIndex(cfg.N, len(num[0]), num)


def cmd_family(args, cfg: RunConfig) -> Any:
    _require(cfg, "N")
    M = _index(args, cfg)
    if args.action == "act":
        if args.element is None:
            raise UsageError("--element is required")
        s = gsp_check(ModMatrix(_matrix(args.element), cfg.N))
        return {"index": act_on_index(s, M).to_json()}
    _require(cfg, "function")
    if args.point is None:
        raise UsageError("--point is required")
    d = FamilyDescriptor.from_catalog(cfg.function, cfg.N)
    prec = cfg.precision()
    with mpmath.workprec(prec.bits + 64):
        Z = _point(args.point)
    v = evaluate_member(d, M, Z, prec)
    return {"function": cfg.function, "index": M.to_json(), "value": v.to_json()}


def cmd_cm(args, cfg: RunConfig) -> Any:
    _require(cfg, "field")
    from .polarization import cm_point
    s = _setup(cfg)
    if args.action == "xi":
        return {"field": s.field.label, "xi": s.form.xi.to_json(), "reflex_type": list(s.reflex.psi_indices())}
    if args.action == "basis":
        return {"field": s.field.label, "basis": [e.to_json() for e in s.standard.elements],
                "gram": [list(r) for r in s.standard.gram()]}
    return {"field": s.field.label, "point": cm_point(s.standard, cfg.precision()).to_json()}


def cmd_rayclass(args, cfg: RunConfig) -> Any:
    _require(cfg, "field", "N")
    from .rayclass import ray_class_group, subgroup_H
    f = _field(cfg.field)
    G = ray_class_group(f, cfg.N)
    if args.action == "build":
        return G.to_json()
    from .cmfield import cm_type, reflex
    H = subgroup_H(G, reflex(cm_type(f)))
    return {"field": f.label, "N": cfg.N, "order": len(H), "classes": [list(c.label) for c in H]}


def cmd_invariant(args, cfg: RunConfig) -> Any:
    _require(cfg, "field", "N", "function")
    from . import invariant as inv
    from .rayclass import ray_class_group, subgroup_H
    s = _setup(cfg)
    G = ray_class_group(s.field, cfg.N)
    d = FamilyDescriptor.from_catalog(cfg.function, cfg.N)
    prec = cfg.precision()
    if args.action == "value":
        classes = list(G)
        if args.label is not None:
            label = tuple(int(x) for x in args.label.split(","))
            classes = [c for c in G if c.label == label]
            if not classes:
                raise UsageError(f"no class with label {args.label}")
        values = [inv.invariant_value(s, G, d, C, prec) for C in classes]
        if cfg.format == "csv":
            return inv.results_csv(values)
        return inv.results_json(s, G, d, values)
    if args.action == "classpoly":
        poly = inv.class_polynomial(s, G, d, prec, denom_bound=cfg.denom_bound)
        return inv.results_json(s, G, d, poly.values, poly)
    if args.action == "crosscheck":
        return inv.galois_cross_check_genus1(s, G, d, prec).to_json()
    kinds = {"basis": inv.audit_basis_independence, "ideal": inv.audit_ideal_independence}
    if args.kind == "H":
        rep = inv.audit_subgroup_H(s, G, d, subgroup_H(G, s.reflex), prec)
    else:
        rep = kinds[args.kind](s, G, d, trials=cfg.trials, prec=prec, seed=cfg.seed)
    return rep.to_json()


# -- parser -------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--field", help="field JSON path or shipped name")
    common.add_argument("--level", "-N", type=int, dest="N")
    common.add_argument("--function", help="catalog entry name")
    common.add_argument("--target", type=float)
    common.add_argument("--bits", type=int, help=f"working precision (default ${ENV_BITS} or 128)")
    common.add_argument("--denom-bound", type=int, dest="denom_bound")
    common.add_argument("--trials", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--format", choices=("json", "csv"))
    common.add_argument("--out", help="write output here instead of stdout")

    p = _Parser(prog="cmsiegel", description="Class invariants from Siegel modular functions at CM points.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gsp", parents=[common])
    g.add_argument("action", choices=("enumerate", "check", "lift"))
    g.add_argument("--genus", type=int, default=1)
    g.add_argument("--modulus", type=int, required=True)
    g.add_argument("--matrix", help="JSON integer matrix")
    g.add_argument("--budget", type=int, default=10**8)

    f = sub.add_parser("family", parents=[common])
    f.add_argument("action", choices=("act", "eval"))
    f.add_argument("--genus", type=int, default=1)
    f.add_argument("--index", help="JSON numerator N*M (2g x g); default the identity index")
    f.add_argument("--element", help="JSON matrix of an element of GSp_2g(Z/NZ)")
    f.add_argument("--point", help='"x+yj" or {"re": [[..]], "im": [[..]]}')

    c = sub.add_parser("cm", parents=[common])
    c.add_argument("action", choices=("point", "xi", "basis"))

    r = sub.add_parser("rayclass", parents=[common])
    r.add_argument("action", choices=("build", "H"))

    i = sub.add_parser("invariant", parents=[common])
    i.add_argument("action", choices=("value", "audit", "classpoly", "crosscheck"))
    i.add_argument("--label", help="class label as comma-separated residue coordinates")
    i.add_argument("--kind", choices=("basis", "ideal", "H"), default="basis")
    return p


def _config_from_args(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    for key in ("field", "N", "function", "target", "bits", "denom_bound", "trials", "seed", "format", "out"):
        v = getattr(args, key, None)
        if v is not None:
            setattr(cfg, key, v)
    return _validate(cfg)


COMMANDS = {"gsp": cmd_gsp, "family": cmd_family, "cm": cmd_cm, "rayclass": cmd_rayclass,
            "invariant": cmd_invariant}


def _emit(payload, cfg: RunConfig, stream) -> None:
    if isinstance(payload, str):
        text = payload
    else:
        text = json.dumps({**payload, "meta": _meta(cfg)}, indent=2, sort_keys=True) + "\n"
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        stream.write(text)


def _is_math(exc: BaseException) -> bool:
    if isinstance(exc, MathematicalFailure):
        return True
    return isinstance(exc, StageError) and isinstance(exc.cause, MathematicalFailure)


def dispatch(argv: list[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        cfg = _config_from_args(args)
        payload = COMMANDS[args.command](args, cfg)
        _emit(payload, cfg, stdout)
        return EXIT_OK
    except UsageError as exc:
        stderr.write(json.dumps({"error": "usage", "message": str(exc),
                                 "pointer": getattr(exc, "pointer", None)}) + "\n")
        return EXIT_USAGE
    except CMSiegelError as exc:
        kind = "mathematical" if _is_math(exc) else "input"
        stderr.write(json.dumps({"error": kind, "type": type(exc).__name__, "message": str(exc)}) + "\n")
        return EXIT_MATH if _is_math(exc) else EXIT_USAGE
    except (OSError, KeyError, ValueError) as exc:
        stderr.write(json.dumps({"error": "input", "type": type(exc).__name__, "message": str(exc)}) + "\n")
        return EXIT_USAGE


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
