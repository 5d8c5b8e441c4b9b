"""Command line entry point: ``run``, ``young-report`` and ``version``.

Exit codes: 0 all experiments pass, 1 any failure, 2 configuration error,
3 inconclusive results without failures.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__, hopf
from .errors import AdmissibilityError, ConfigError, DomainError, InvalidYoungError
from .fields import Ball, domain_from_config
from .operator import QuadratureScheme
from .young import from_config, index_record

WORKERS_ENV = "ORLICZ_HOPF_WORKERS"
EXIT_PASS, EXIT_FAIL, EXIT_CONFIG, EXIT_INCONCLUSIVE = 0, 1, 2, 3

KINDS = ("two_sided", "torsion_hopf", "continuity", "barrier", "boundary", "potential",
         "scaling", "principles")

DEFAULT_PARAMS = {
    "two_sided": {"beta": 1.0, "R_values": [0.25, 0.5, 0.9], "refine": True},
    "torsion_hopf": {"eps_values": [0.5, 1.0, 2.0], "rho": 0.2, "refine": True},
    "continuity": {"k_max": 10},
    "barrier": {"rho": 0.25, "r": 0.25, "level": 1.0},
    "boundary": {"beta": 1.0, "beta_angle": math.pi / 4, "t0": 0.5, "n_samples": 256},
    "potential": {"beta": 1.0, "c": -1.0},
    "scaling": {"beta": 1.0, "R_values": [0.25, 0.5, 0.9]},
    "principles": {"n_single": 20, "n_pairs": 10},
}


@dataclass
class RunConfig:
    young: dict
    s: float
    domain: dict = field(default_factory=lambda: {"kind": "ball", "center": [0.0], "R": 1.0})
    h: float = 0.01
    quadrature: dict = field(default_factory=dict)
    experiments: list = field(default_factory=list)
    output_dir: str = "out"
    seed: int = 0
    workers: int = 1

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        if not isinstance(raw, dict):
            raise ConfigError("$", "config must be a JSON object")
        known = set(cls.__dataclass_fields__)
        extra = sorted(set(raw) - known)
        if extra:
            raise ConfigError(extra[0], "unknown key")
        for key in ("young", "s"):
            if key not in raw:
                raise ConfigError(key, "missing required key")
        cfg = cls(**raw)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if not isinstance(self.s, (int, float)) or not 0 < self.s < 1:
            raise ConfigError("s", "s must lie in (0,1)")
        try:
            yf = from_config(self.young)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError("young", str(exc)) from exc
        try:
            yf.indices.check_admissible(self.s)
        except (AdmissibilityError, InvalidYoungError) as exc:
            raise ConfigError("young", str(exc)) from exc
        try:
            domain_from_config(self.domain)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError("domain", str(exc)) from exc
        if not isinstance(self.h, (int, float)) or not self.h > 0:
            raise ConfigError("h", "grid spacing must be positive")
        allowed_q = {"m_near", "m_ang", "gamma", "R_trunc", "r_min", "gauss_order",
                     "far_width", "tail_policy"}
        for k in self.quadrature:
            if k not in allowed_q:
                raise ConfigError(f"quadrature.{k}", "unknown key")
        try:
            QuadratureScheme(**self.quadrature)
        except (TypeError, ValueError) as exc:
            raise ConfigError("quadrature", str(exc)) from exc
        if not isinstance(self.workers, int) or self.workers < 1:
            raise ConfigError("workers", "must be a positive integer")
        seen = set()
        normalized = []
        for i, exp in enumerate(self.experiments):
            if isinstance(exp, str):
                exp = {"kind": exp}
            if not isinstance(exp, dict) or exp.get("kind") not in KINDS:
                raise ConfigError(f"experiments[{i}].kind", f"must be one of {', '.join(KINDS)}")
            exp = {**DEFAULT_PARAMS[exp["kind"]], **exp}
            exp.setdefault("id", exp["kind"])
            if exp["id"] in seen:
                raise ConfigError(f"experiments[{i}].id", "duplicate experiment id")
            seen.add(exp["id"])
            allowed = set(DEFAULT_PARAMS[exp["kind"]]) | {"kind", "id", "h", "n"}
            for k in exp:
                if k not in allowed:
                    raise ConfigError(f"experiments[{i}].{k}", "unknown parameter")
            normalized.append(exp)
        self.experiments = normalized

    def effective(self) -> dict:
        return asdict(self)


def _dimension(cfg: RunConfig) -> int:
    return domain_from_config(cfg.domain).n


def run_experiment(cfg: RunConfig, exp: dict) -> hopf.HopfReport:
    yf = from_config(cfg.young)
    s = float(cfg.s)
    h = float(exp.get("h", cfg.h))
    n = int(exp.get("n", _dimension(cfg)))
    scheme = QuadratureScheme.for_grid(h, **cfg.quadrature) if "r_min" not in cfg.quadrature \
        else QuadratureScheme(**cfg.quadrature)
    kind = exp["kind"]
    if kind == "two_sided":
        return hopf.verify_two_sided(yf, s, exp["beta"], h, n, exp["R_values"], exp["refine"])
    if kind == "torsion_hopf":
        dom = domain_from_config(cfg.domain)
        return hopf.verify_torsion_hopf(yf, s, exp["eps_values"], dom, exp["rho"], h,
                                        exp["refine"])
    if kind == "continuity":
        return hopf.continuity_experiment(yf, s, h, n, exp["k_max"], scheme)
    if kind == "barrier":
        return hopf.verify_barrier(yf, s, exp["rho"], exp["r"], h, n, exp["level"], scheme)
    if kind == "boundary":
        return hopf.boundary_experiment(yf, s, exp["beta"], h, n, exp["beta_angle"], exp["t0"],
                                        exp["n_samples"], cfg.seed)
    if kind == "potential":
        dom = domain_from_config(cfg.domain)
        if not isinstance(dom, Ball):
            raise DomainError("potential experiment needs a ball")
        return hopf.potential_experiment(yf, s, exp["c"], exp["beta"], dom, h)
    if kind == "scaling":
        return hopf.scaling_experiment(yf, s, exp["beta"], h, n, exp["R_values"])
    if kind == "principles":
        return hopf.principles_experiment(yf, s, h, n, cfg.seed, exp["n_single"], exp["n_pairs"])
    raise ConfigError("experiments", f"unknown kind {kind}")


def _atomic_write(path: Path, writer) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            writer(fh)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_outputs(outdir: Path, exp_id: str, report: hopf.HopfReport) -> list[str]:
    rep_path = outdir / f"{exp_id}.report.json"
    csv_path = outdir / f"{exp_id}.trace.csv"
    _atomic_write(rep_path, lambda fh: json.dump(report.to_dict(), fh, indent=2, sort_keys=True))

    def write_csv(fh):
        wr = csv.writer(fh)
        wr.writerow(report.trace_header)
        for row in report.trace_rows:
            wr.writerow([repr(float(v)) if isinstance(v, float) or hasattr(v, "dtype") else v
                         for v in row])

    _atomic_write(csv_path, write_csv)
    return [str(rep_path), str(csv_path)]


@dataclass
class RunSummary:
    rows: list = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        verdicts = [r["verdict"] for r in self.rows]
        if any(v not in (hopf.PASS, hopf.INCONCLUSIVE) for v in verdicts):
            return EXIT_FAIL
        if any(v == hopf.INCONCLUSIVE for v in verdicts):
            return EXIT_INCONCLUSIVE
        return EXIT_PASS

    def table(self) -> str:
        lines = [f"{'experiment':<16} {'verdict':<13} {'seconds':>8}  key constants"]
        for r in self.rows:
            lines.append(f"{r['id']:<16} {r['verdict'].upper():<13} {r['seconds']:>8.2f}  "
                         f"{r['key']}")
        return "\n".join(lines)


def _key_constants(report: hopf.HopfReport) -> str:
    items = []
    for k, v in report.constants.items():
        if isinstance(v, (int, float)) and not isinstance(v, bool):
            items.append(f"{k}={v:.4g}")
    return ", ".join(items[:3])


def run(config_path: str, outdir: str | None = None, quiet: bool = False) -> RunSummary:
    raw = json.loads(Path(config_path).read_text())
    cfg = RunConfig.from_dict(raw)
    if outdir is not None:
        cfg.output_dir = outdir
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    _atomic_write(out / "effective-config.json",
                  lambda fh: json.dump(cfg.effective(), fh, indent=2, sort_keys=True))
    workers = int(os.environ.get(WORKERS_ENV, cfg.workers))

    def job(exp):
        t0 = time.perf_counter()
        try:
            rep = run_experiment(cfg, exp)
            files = _write_outputs(out, exp["id"], rep)
            return {"id": exp["id"], "verdict": rep.verdict, "files": files,
                    "key": _key_constants(rep), "seconds": time.perf_counter() - t0}
        except Exception as exc:  # reported as a failed experiment
            return {"id": exp["id"], "verdict": "error", "files": [],
                    "key": f"{type(exc).__name__}: {exc}", "seconds": time.perf_counter() - t0}

    if workers > 1 and len(cfg.experiments) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(job, cfg.experiments))
    else:
        rows = [job(e) for e in cfg.experiments]
    summary = RunSummary(rows)
    _atomic_write(out / "summary.json", lambda fh: json.dump(
        {"exit_code": summary.exit_code, "experiments": rows}, fh, indent=2, sort_keys=True))
    if not quiet:
        print(summary.table())
    return summary


def young_report(config_path: str) -> dict:
    raw = json.loads(Path(config_path).read_text())
    try:
        yf = from_config(raw["young"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError("young", str(exc)) from exc
    rec = index_record(yf)
    if "s" in raw:
        rec["s"] = raw["s"]
        rec["admissible"] = yf.indices.admissible_for(float(raw["s"]))
    return rec


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="orlicz-hopf", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run the experiments of a config file")
    p_run.add_argument("config")
    p_run.add_argument("--outdir", default=None)
    p_run.add_argument("-q", "--quiet", action="store_true")
    p_young = sub.add_parser("young-report", help="growth indices of the configured family")
    p_young.add_argument("config")
    sub.add_parser("version")
    args = parser.parse_args(argv)

    if args.command == "version":
        print(__version__)
        return EXIT_PASS
    try:
        if args.command == "young-report":
            print(json.dumps(young_report(args.config), indent=2, sort_keys=True))
            return EXIT_PASS
        summary = run(args.config, args.outdir, args.quiet)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return summary.exit_code


if __name__ == "__main__":
    sys.exit(main())
