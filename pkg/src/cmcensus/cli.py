"""Command-line front end: ``cm-census <command> [--config FILE] [--key value ...]``.

Every run writes its CSV outputs and a ``manifest.json`` into ``--out``.
Files are written to a temporary name and renamed into place, so an
interrupted run never leaves a truncated CSV behind.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import platform
import sys
import time
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from . import __version__
from .census import SUMMARY_HEADER, default_workers

COMMANDS = ("census", "interval-census", "cyclicity", "density", "rayclass-bv", "bt-check", "pe-find",
            "validate-registry")


class ConfigError(ValueError):
    pass


class CheckFailed(RuntimeError):
    pass


@dataclass
class ExperimentConfig:
    curve_id: str = "cm-11"
    x: int = 10**6
    h: int | None = None
    M: int = 30
    Q: int | None = None
    workers: int = 1
    segment_size: int = 1 << 20
    seed_salt: int = 0
    emit_records: bool = False
    slack: float = 1.5

    def validate(self):
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.segment_size < 1 << 12:
            raise ConfigError("segment_size must be >= 4096")
        if self.x < 0:
            raise ConfigError("x must be nonnegative")
        if self.h is not None and not 0 <= self.h <= self.x:
            raise ConfigError("need 0 <= h <= x")
        if self.M < 1:
            raise ConfigError("M must be >= 1")
        return self


def _coerce(name: str, raw: str):
    types = {f.name: f.type for f in fields(ExperimentConfig)}
    if name not in types:
        raise ConfigError(f"unknown config key {name!r}")
    t = types[name]
    if raw.lower() in ("none", "") and "None" in t:
        return None
    try:
        if t.startswith("bool"):
            if raw.lower() not in ("0", "1", "true", "false", "yes", "no"):
                raise ValueError(raw)
            return raw.lower() in ("1", "true", "yes")
        if t.startswith("int"):
            return int(float(raw)) if "e" in raw.lower() else int(raw)
        if t.startswith("float"):
            return float(raw)
    except ValueError:
        raise ConfigError(f"bad value for {name}: {raw!r}") from None
    return raw


def parse_config_file(path: str | Path) -> dict:
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        k, v = (s.strip() for s in line.split("=", 1))
        out[k] = _coerce(k, v)
    return out


def build_config(args: argparse.Namespace) -> ExperimentConfig:
    values = {"workers": default_workers()}
    if args.config:
        values.update(parse_config_file(args.config))
    for f in fields(ExperimentConfig):
        raw = getattr(args, f.name, None)
        if raw is not None:
            values[f.name] = _coerce(f.name, str(raw))
    return ExperimentConfig(**values).validate()


# ---------------------------------------------------------------- output helpers


class Outputs:
    def __init__(self, out_dir: Path):
        self.dir = out_dir
        self.dir.mkdir(parents=True, exist_ok=True)
        self.files: list[str] = []

    def path(self, name: str) -> Path:
        return self.dir / name

    def write(self, name: str, header: str, rows) -> Path:
        path = self.path(name)
        tmp = path.with_name(path.name + ".tmp")
        with open(tmp, "w", encoding="ascii", newline="\n") as fh:
            fh.write(header + "\n")
            for r in rows:
                fh.write(r + "\n")
        os.replace(tmp, path)
        self.files.append(name)
        return path


def _curve(cfg: ExperimentConfig):
    from .cmcurve import get_curve

    try:
        return get_curve(cfg.curve_id)
    except KeyError:
        raise ConfigError(f"unknown curve_id {cfg.curve_id!r}") from None


def _kw(cfg):
    return {"workers": cfg.workers, "segment_size": cfg.segment_size, "seed_salt": cfg.seed_salt}


# ---------------------------------------------------------------- commands


def cmd_census(cfg, out: Outputs, info: dict):
    from .census import squarefree_census

    E = _curve(cfg)
    rec = out.path("records.csv") if cfg.emit_records else None
    r = squarefree_census(E, cfg.x, records_path=rec, **_kw(cfg))
    if rec:
        out.files.append(rec.name)
    out.write("census.csv", SUMMARY_HEADER, [r.summary_row()])


def cmd_interval_census(cfg, out, info):
    from .census import interval_census

    if cfg.h is None:
        raise ConfigError("interval-census needs h")
    E = _curve(cfg)
    rec = out.path("records.csv") if cfg.emit_records else None
    r = interval_census(E, cfg.x, cfg.h, records_path=rec, **_kw(cfg))
    if rec:
        out.files.append(rec.name)
    out.write("interval_census.csv", SUMMARY_HEADER, [r.summary_row()])


def cmd_cyclicity(cfg, out, info):
    from .census import cyclicity_census, interval_cyclicity_census

    E = _curve(cfg)
    if cfg.h is None:
        r = cyclicity_census(E, cfg.x, **_kw(cfg))
    else:
        r = interval_cyclicity_census(E, cfg.x, cfg.h, **_kw(cfg))
    out.write("cyclicity.csv", SUMMARY_HEADER, [r.summary_row()])


def cmd_density(cfg, out, info):
    from .density import DENSITY_HEADER, Model, c_E_truncated, delta_E_truncated, tail_constant

    E = _curve(cfg)
    rows = []
    for name, fn in (("delta_E", delta_E_truncated), ("c_E", c_E_truncated)):
        for model in Model:
            est = fn(E, cfg.M, model, x=cfg.x, workers=cfg.workers)
            rows.append(est.row(E.id, name))
    info["tail_constant"] = tail_constant()
    out.write("density.csv", DENSITY_HEADER, rows)


def _Q(cfg, default):
    return cfg.Q if cfg.Q is not None else default


def cmd_rayclass_bv(cfg, out, info):
    from .rayclass import (CLASS_HEADER, STAT_HEADER, bv_short_interval_statistic, bv_statistic, bvsi_regime,
                           class_rows, enumerate_moduli)

    K = _curve(cfg).K
    Q = _Q(cfg, math.isqrt(math.isqrt(cfg.x)))
    if cfg.h is None:
        stat = bv_statistic(K, cfg.x, Q)
    else:
        stat = bv_short_interval_statistic(K, cfg.x, cfg.h, Q)
        info["regime"] = bvsi_regime(cfg.x, cfg.h, Q)
    info["degree_two_primes"] = "excluded"
    h = "" if cfg.h is None else cfg.h
    out.write("rayclass_bv.csv", STAT_HEADER, [f"{K.disc},{cfg.x},{h},{Q},{stat:.6f}"])
    rows = [r for q in enumerate_moduli(K, Q) for r in class_rows(cfg.x, q)]
    out.write("rayclass_classes.csv", CLASS_HEADER, rows)


def cmd_bt_check(cfg, out, info):
    from .rayclass import brun_titchmarsh_check, enumerate_moduli

    K = _curve(cfg).K
    rows, failed = [], 0
    for q in enumerate_moduli(K, _Q(cfg, 50)):
        if q.norm >= cfg.x:
            continue
        rep = brun_titchmarsh_check(cfg.x, q, cfg.slack)
        failed += not rep.passed
        for lab, margin in rep.margins.items():
            count = round(rep.bound - margin)
            rows.append(f"{K.disc},{q.norm},{q},{lab[0]}:{lab[1]},{count},{rep.bound:.3f},{margin:.3f}")
    out.write("bt_check.csv", "disc,q_norm,q_gen,class_id,count,bound,margin", rows)
    info["violations"] = failed
    if failed:
        raise CheckFailed(f"Brun-Titchmarsh bound violated for {failed} moduli")


def cmd_pe_find(cfg, out, info):
    from .census import find_pE

    E = _curve(cfg)
    p = find_pE(E, cfg.x, cfg.seed_salt)
    out.write("pe_find.csv", "curve_id,search_bound,p_E", [f"{E.id},{cfg.x},{p if p else 'NotFound'}"])


def cmd_validate_registry(cfg, out, info):
    from .cmcurve import RegistryError, load_registry, validate_cm

    bound = max(100, min(cfg.x, 10**4))
    try:
        curves = load_registry(bound=100)
        reports = [validate_cm(E, bound) for E in curves]
    except (RegistryError, ValueError) as exc:
        raise CheckFailed(str(exc)) from exc
    rows = [f"{E.id},{E.K.disc},{E.conductor},{r.primes_checked},{r.ordinary},{r.supersingular}"
            for E, r in zip(curves, reports)]
    info["curves_validated"] = len(curves)
    out.write("registry.csv", "curve_id,disc,conductor,primes_checked,ordinary,supersingular", rows)


HANDLERS = {
    "census": cmd_census,
    "interval-census": cmd_interval_census,
    "cyclicity": cmd_cyclicity,
    "density": cmd_density,
    "rayclass-bv": cmd_rayclass_bv,
    "bt-check": cmd_bt_check,
    "pe-find": cmd_pe_find,
    "validate-registry": cmd_validate_registry,
}


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cm-census", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", help="flat key=value file; flags override it")
    ap.add_argument("--out", default=".", help="output directory (default: current)")
    ap.add_argument("--curve", dest="curve_id", help="registry id (cm-11) or field discriminant (-11)")
    for name in ("x", "h", "M", "Q", "workers", "segment_size", "seed_salt", "slack"):
        ap.add_argument(f"--{name.replace('_', '-')}", dest=name)
    ap.add_argument("--emit-records", dest="emit_records", action="store_const", const="1")
    return ap


def run(command: str, cfg: ExperimentConfig, out_dir: str | Path) -> int:
    out = Outputs(Path(out_dir))
    info: dict = {}
    t0 = time.perf_counter()
    status, error = 0, None
    try:
        HANDLERS[command](cfg, out, info)
    except ConfigError as exc:
        status, error = 2, str(exc)
    except (CheckFailed, AssertionError) as exc:
        status, error = 1, str(exc) or type(exc).__name__
    manifest = {
        "command": command,
        "config": asdict(cfg),
        "version": __version__,
        "python": platform.python_version(),
        "wall_time_s": round(time.perf_counter() - t0, 3),
        "outputs": out.files,
        "status": status,
        **info,
    }
    if error:
        manifest["error"] = error
        print(f"cm-census {command}: {error}", file=sys.stderr)
    tmp = out.path("manifest.json.tmp")
    tmp.write_text(json.dumps(manifest, indent=2, default=str) + "\n")
    os.replace(tmp, out.path("manifest.json"))
    return status


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        cfg = build_config(args)
    except (ConfigError, OSError) as exc:
        print(f"cm-census: {exc}", file=sys.stderr)
        return 2
    return run(args.command, cfg, args.out)


if __name__ == "__main__":
    sys.exit(main())
