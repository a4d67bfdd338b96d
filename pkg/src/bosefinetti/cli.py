"""Command-line entry point.

Usage::

    bosefinetti reduce CONFIG
    bosefinetti limit CONFIG
    bosefinetti sweep CONFIG
    bosefinetti sample CONFIG
    bosefinetti verify {claim,series,free-energy} CONFIG

Structural settings come from a JSON config (``"schema": 1``); ``--seed``,
``--samples``, ``--out`` and ``--workers`` override individual fields. Every
run writes its data file and ``<data file>.manifest.json``.

Exit codes: 0 success, 2 invalid config, 3 capacity exceeded, 4 a verify
threshold failed, 130 interrupted (partial results flushed).
"""

from __future__ import annotations

import argparse
import copy
import json
import logging
import os
import platform
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path
from typing import Optional

import jsonschema
import numpy as np

from .convergence import (
    SweepResult,
    iter_sweep,
    limit_state,
    verify_claim,
    verify_free_energy,
    verify_series,
)
from .definetti import DeFinettiWeight
from .ensembles import EnsembleSpec
from .errors import CapacityError, MismatchError
from .io import matrix_from_json_value, matrix_to_json_value, sym_operator_to_dict
from .montecarlo import WORKERS_ENV, mc_estimate_moment
from .reduction import reduce_sym

log = logging.getLogger("bosefinetti")

EXIT_OK, EXIT_INVALID, EXIT_CAPACITY, EXIT_THRESHOLD, EXIT_INTERRUPTED = 0, 2, 3, 4, 130

COMMANDS = ("reduce", "limit", "sweep", "sample", "verify")
VERIFY_KINDS = ("claim", "series", "free-energy")

_matrix = {
    "oneOf": [
        {"type": "array", "items": {"type": "array", "items": {"type": "number"}}},
        {
            "type": "object",
            "properties": {
                "re": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}},
                "im": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}},
            },
            "required": ["re"],
            "additionalProperties": False,
        },
    ]
}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "properties": {
        "schema": {"const": 1},
        "command": {"enum": list(COMMANDS)},
        "ensemble": {
            "type": "object",
            "properties": {
                "kind": {"enum": ["uniform", "noninteracting", "meanfield"]},
                "d": {"type": "integer", "minimum": 0},
                "n": {"type": "integer", "minimum": 0},
                "beta": {"type": "number"},
                "scaled": {"type": "boolean"},
                "epsilons": {"type": "array", "items": {"type": "number"}},
                "T": _matrix,
                "V": _matrix,
            },
            "required": ["kind", "d"],
            "additionalProperties": False,
        },
        "m": {"type": "integer", "minimum": 0},
        "n_list": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
        "limit": {"enum": ["uniform", "noninteracting", "condensate", "meanfield"]},
        "mc": {
            "type": "object",
            "properties": {
                "samples": {"type": "integer", "minimum": 2},
                "seed": {"type": "integer", "minimum": 0},
            },
            "additionalProperties": False,
        },
        "verify": {
            "type": "object",
            "properties": {
                "j": {"type": "integer", "minimum": 0},
                "order": {"type": "integer", "minimum": 0},
                "beta": {"type": "number"},
                "perturbations": {"type": "integer", "minimum": 0},
            },
            "additionalProperties": False,
        },
        "tolerances": {"type": "object", "additionalProperties": {"type": "number"}},
        "output": {
            "type": "object",
            "properties": {
                "path": {"type": "string"},
                "format": {"enum": ["csv", "json"]},
            },
            "additionalProperties": False,
        },
        "record_timings": {"type": "boolean"},
    },
    "required": ["schema", "ensemble"],
    "additionalProperties": False,
}

DEFAULT_TOLERANCES = {"claim_j0": 1e-10, "series_atol": 1e-12, "n_sigma": 3.0}


class ConfigError(ValueError):
    def __init__(self, message: str, path: str = "$"):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass
class RunConfig:
    command: str
    ensemble: EnsembleSpec
    m: int = 1
    n_list: list[int] = field(default_factory=list)
    limit: Optional[str] = None
    samples: int = 100_000
    seed: int = 0
    verify: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    output_path: Optional[str] = None
    output_format: str = "json"
    record_timings: bool = False
    raw: dict = field(default_factory=dict)


def _json_path(parts) -> str:
    return "$" + "".join(f"[{p}]" if isinstance(p, int) else f".{p}" for p in parts)


def parse_config(raw: dict, command: str) -> RunConfig:
    """Validate a config dict against the strict schema and build a :class:`RunConfig`."""
    try:
        jsonschema.validate(raw, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(exc.message, _json_path(exc.absolute_path)) from None
    if raw.get("command", command) != command:
        raise ConfigError(f"config is for {raw['command']!r}, invoked as {command!r}", "$.command")
    ens = raw["ensemble"]
    try:
        spec = EnsembleSpec(
            kind=ens["kind"],
            d=ens["d"],
            n=ens.get("n"),
            beta=float(ens.get("beta", 0.0)),
            scaled=ens.get("scaled", True),
            epsilons=ens.get("epsilons"),
            T=matrix_from_json_value(ens["T"]) if "T" in ens else None,
            V=matrix_from_json_value(ens["V"]) if "V" in ens else None,
        )
    except (ValueError, MismatchError) as exc:
        raise ConfigError(str(exc), "$.ensemble") from None
    mc = raw.get("mc", {})
    out = raw.get("output", {})
    default_format = "csv" if command == "sweep" or (command == "verify") else "json"
    tol = dict(DEFAULT_TOLERANCES)
    tol.update(raw.get("tolerances", {}))
    return RunConfig(
        command=command,
        ensemble=spec,
        m=raw.get("m", 1),
        n_list=list(raw.get("n_list", [])),
        limit=raw.get("limit"),
        samples=mc.get("samples", 100_000),
        seed=mc.get("seed", 0),
        verify=dict(raw.get("verify", {})),
        tolerances=tol,
        output_path=out.get("path"),
        output_format=out.get("format", default_format),
        record_timings=raw.get("record_timings", False),
        raw=raw,
    )


def _default_limit(spec: EnsembleSpec) -> str:
    return {"uniform": "uniform", "noninteracting": "noninteracting", "meanfield": "meanfield"}[spec.kind]


def _require_n(cfg: RunConfig) -> int:
    if cfg.ensemble.n is None:
        raise ConfigError("this command needs ensemble.n", "$.ensemble.n")
    return cfg.ensemble.n


def _versions() -> dict:
    import scipy

    try:
        pkg = version("bosefinetti")
    except PackageNotFoundError:
        pkg = "unknown"
    return {"bosefinetti": pkg, "python": platform.python_version(), "numpy": np.__version__, "scipy": scipy.__version__}


def _write_manifest(cfg: RunConfig, data_path: Path, extra: Optional[dict] = None, truncated: bool = False):
    manifest = {
        "schema": 1,
        "command": cfg.command,
        "config": cfg.raw,
        "seed": cfg.seed,
        "tolerances": cfg.tolerances,
        "versions": _versions(),
        "data": data_path.name,
        "truncated": truncated,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    if extra:
        manifest.update(extra)
    Path(str(data_path) + ".manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _sweep_json(rows) -> str:
    def clean(x):
        return None if isinstance(x, float) and not np.isfinite(x) else x

    return _dump_json([{k: clean(v) for k, v in r.__dict__.items() if k != "wall_time_s"} for r in rows])


def _operator_only(cfg: RunConfig):
    if cfg.output_format != "json":
        raise ConfigError("operator outputs are JSON only", "$.output.format")


def cmd_reduce(cfg: RunConfig, data_path: Path) -> int:
    _operator_only(cfg)
    n = _require_n(cfg)
    spec = cfg.ensemble
    rho = reduce_sym(spec.density(n), n, cfg.m, spec.d)
    data_path.write_text(_dump_json({"operator": sym_operator_to_dict(rho, cfg.m, spec.d)}))
    _write_manifest(cfg, data_path)
    return EXIT_OK


def cmd_limit(cfg: RunConfig, data_path: Path) -> int:
    _operator_only(cfg)
    spec = cfg.ensemble
    limit = cfg.limit or _default_limit(spec)
    rho, sigma, info = limit_state(spec, limit, cfg.m, cfg.samples, cfg.seed)
    data_path.write_text(
        _dump_json({"limit": limit, "sigma_ref": sigma, "info": info, "operator": sym_operator_to_dict(rho, cfg.m, spec.d)})
    )
    _write_manifest(cfg, data_path)
    return EXIT_OK


def cmd_sweep(cfg: RunConfig, data_path: Path) -> int:
    if not cfg.n_list:
        raise ConfigError("sweep needs n_list", "$.n_list")
    if any(n < cfg.m for n in cfg.n_list):
        raise ConfigError(f"every n must be >= m={cfg.m}", "$.n_list")
    spec = cfg.ensemble
    limit = cfg.limit or _default_limit(spec)
    ref, sigma, info = limit_state(spec, limit, cfg.m, cfg.samples, cfg.seed)
    rows, truncated = [], False
    try:
        for row in iter_sweep(spec, ref, sigma, cfg.m, cfg.n_list):
            rows.append(row)
    except KeyboardInterrupt:
        truncated = True
    result = SweepResult(rows, {"limit": limit, **info})
    if cfg.output_format == "csv":
        data_path.write_text(result.to_csv(cfg.record_timings))
    else:
        data_path.write_text(_sweep_json(rows))
    _write_manifest(cfg, data_path, {"limit": limit, "limit_info": info}, truncated=truncated)
    return EXIT_INTERRUPTED if truncated else EXIT_OK


def cmd_sample(cfg: RunConfig, data_path: Path) -> int:
    _operator_only(cfg)
    spec = cfg.ensemble
    if spec.kind == "uniform":
        weight = DeFinettiWeight()
    else:
        weight = DeFinettiWeight("boltzmann", spec.beta, spec.one_body(), spec.two_body())
    est = mc_estimate_moment(cfg.m, spec.d, weight, cfg.samples, cfg.seed)
    payload = {
        "operator": sym_operator_to_dict(est.density, cfg.m, spec.d),
        "stderr": matrix_to_json_value(est.stderr),
        "bias": matrix_to_json_value(est.bias),
        "z": est.z,
        "z_stderr": est.z_stderr,
        "trace_deviation": est.trace_deviation,
        "samples": est.samples,
        "seed": est.seed,
    }
    data_path.write_text(_dump_json(payload))
    _write_manifest(cfg, data_path)
    return EXIT_OK


def _write_table(path: Path, fmt: str, header: list[str], rows: list[list]):
    if fmt == "csv":
        lines = [",".join(header)] + [",".join(format(x, ".17g") if isinstance(x, float) else str(x) for x in r) for r in rows]
        path.write_text("\n".join(lines) + "\n")
    else:
        clean = [[None if isinstance(x, float) and not np.isfinite(x) else x for x in r] for r in rows]
        path.write_text(_dump_json([dict(zip(header, r)) for r in clean]))


def cmd_verify(cfg: RunConfig, kind: str, data_path: Path) -> int:
    spec = cfg.ensemble
    t, v = spec.one_body(), spec.two_body()
    tol = cfg.tolerances
    if kind == "claim":
        if not cfg.n_list:
            raise ConfigError("verify claim needs n_list", "$.n_list")
        j = cfg.verify.get("j", 1)
        res = verify_claim(j, cfg.m, cfg.n_list, t, v, spec.d)
        devs = res.deviations
        if j == 0:
            passed = bool(np.all(devs <= tol["claim_j0"]))
        else:
            passed = bool(np.all(np.diff(devs) < 0))
        _write_table(data_path, cfg.output_format, ["n", "deviation"], [[r.n, r.deviation] for r in res.rows])
    elif kind == "series":
        n = _require_n(cfg)
        beta = cfg.verify.get("beta", spec.beta)
        res = verify_series(cfg.verify.get("order", 8), beta, n, cfg.m, t, v, spec.d)
        res.atol = tol["series_atol"]
        passed = res.within_bound
        _write_table(
            data_path,
            cfg.output_format,
            ["order", "beta", "n", "m", "deviation", "remainder_bound"],
            [[cfg.verify.get("order", 8), float(beta), n, cfg.m, res.deviation, res.remainder_bound]],
        )
    else:
        beta = cfg.verify.get("beta", spec.beta)
        check = verify_free_energy(beta, t, cfg.samples, cfg.seed, cfg.verify.get("perturbations", 20))
        k = tol["n_sigma"]
        minimal = check.optimum_is_minimal(k)
        passed = check.optimum_matches(k) and all(minimal)
        rows = [["optimum", check.optimum.value, check.optimum.stderr, check.log_partition_value]]
        rows += [[f"perturbed_{i}", f.value, f.stderr, float("nan")] for i, f in enumerate(check.perturbed)]
        _write_table(data_path, "csv" if cfg.output_format == "csv" else "json", ["label", "free_energy", "stderr", "reference"], rows)
    _write_manifest(cfg, data_path, {"verify": kind, "passed": passed})
    print(f"verify {kind}: {'PASS' if passed else 'FAIL'}")
    return EXIT_OK if passed else EXIT_THRESHOLD


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bosefinetti", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("config", help="path to the JSON run config")
        p.add_argument("--seed", type=int)
        p.add_argument("--samples", type=int)
        p.add_argument("--out", help="data output path (manifest goes next to it)")
        p.add_argument("--workers", type=int, help=f"worker threads (default ${WORKERS_ENV} or 1)")

    for name in ("reduce", "limit", "sweep", "sample"):
        common(sub.add_parser(name))
    ver = sub.add_parser("verify")
    ver.add_argument("kind", choices=VERIFY_KINDS)
    common(ver)
    return parser


def _apply_overrides(raw: dict, args) -> dict:
    raw = copy.deepcopy(raw)
    if args.seed is not None:
        raw.setdefault("mc", {})["seed"] = args.seed
    if args.samples is not None:
        raw.setdefault("mc", {})["samples"] = args.samples
    if args.out is not None:
        raw.setdefault("output", {})["path"] = args.out
    return raw


def main(argv: Optional[list[str]] = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    if args.workers is not None:
        os.environ[WORKERS_ENV] = str(args.workers)
    try:
        raw = json.loads(Path(args.config).read_text())
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        raw = _apply_overrides(raw, args)
        cfg = parse_config(raw, args.command)
    except (OSError, json.JSONDecodeError, ConfigError) as exc:
        print(f"error: {args.config}: {exc}", file=sys.stderr)
        return EXIT_INVALID

    ext = "csv" if cfg.output_format == "csv" else "json"
    label = args.command if args.command != "verify" else f"verify-{args.kind}"
    data_path = Path(cfg.output_path or f"{label}.{ext}")
    data_path.parent.mkdir(parents=True, exist_ok=True)
    try:
        if args.command == "verify":
            return cmd_verify(cfg, args.kind, data_path)
        return {"reduce": cmd_reduce, "limit": cmd_limit, "sweep": cmd_sweep, "sample": cmd_sample}[args.command](
            cfg, data_path
        )
    except ConfigError as exc:
        print(f"error: {args.config}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except CapacityError as exc:
        print(f"error: {args.config}: capacity: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (ValueError, MismatchError) as exc:
        print(f"error: {args.config}: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
