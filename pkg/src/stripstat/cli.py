"""Command line entry point.

    stripstat verify --suite all
    stripstat partition --model geo --N 2 --a 0.5 0.6 --c1 0.3 --c2 0.4
    stripstat simulate --model geo --N 2 --a 0.5 --c1 0.3 --c2 0.4 --m 3 --samples 20000

Exit codes: 0 success, 1 failed check, 2 invalid configuration, 3 non-convergence.
Output goes to --out, or to <command>.<format> in $STRIPSTAT_OUT_DIR (default: cwd).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field

from . import __version__
from .numerics import NonConvergenceError
from .params import GeoParams, KpzParams, LGParams, ParameterError

__all__ = ["RunConfig", "ConfigError", "parse_config", "dispatch", "main", "SCHEMA_VERSION"]

SCHEMA_VERSION = 1
COMMANDS = ("verify", "sample", "simulate", "laplace", "partition", "kpz")
SUITE_NAMES = ("schur", "whittaker", "partition", "kernels", "all")
TOL_FLOOR = 1e-15

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_NONCONV = 0, 1, 2, 3


class ConfigError(ValueError):
    """Invalid or incomplete configuration."""


@dataclass
class RunConfig:
    command: str
    model: str | None = None
    params: GeoParams | LGParams | KpzParams | None = None
    seed: int = 0
    tol: float | None = None
    out_path: str = ""
    format: str = "csv"
    options: dict = field(default_factory=dict)

    def resolved(self) -> dict:
        """Plain-data view of the config, embedded in every output file."""
        return {
            "command": self.command,
            "model": self.model,
            "params": asdict(self.params) if self.params is not None else None,
            "seed": self.seed,
            "tol": self.tol,
            "format": self.format,
            "options": dict(self.options),
            "schema_version": SCHEMA_VERSION,
        }


# keys accepted both as flags and in a config file
_KEYS = ("model", "N", "a", "c1", "c2", "alpha", "u", "v", "L", "t", "points", "m", "samples",
         "suite", "seed", "tol", "out", "format", "negative_control", "continuation")


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stripstat", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", help="JSON config file; flags override its values")
        s.add_argument("--seed", type=int)
        s.add_argument("--tol", type=float)
        s.add_argument("--out")
        s.add_argument("--format", choices=("csv", "json"))
        if name == "verify":
            s.add_argument("--suite", choices=SUITE_NAMES)
            continue
        if name == "kpz":
            s.add_argument("--u", type=float)
            s.add_argument("--v", type=float)
            s.add_argument("--L", type=float)
            continue
        s.add_argument("--model", type=str.upper, choices=("GEO", "LG"))
        s.add_argument("--N", type=int)
        s.add_argument("--a", type=float, nargs="+")
        s.add_argument("--c1", type=float)
        s.add_argument("--c2", type=float)
        s.add_argument("--alpha", type=float, nargs="+")
        s.add_argument("--u", type=float)
        s.add_argument("--v", type=float)
        if name == "laplace":
            s.add_argument("--t", type=float, nargs="+")
            s.add_argument("--points", type=int, nargs="+")
            s.add_argument("--continuation", action="store_true", default=None)
        if name in ("sample", "simulate"):
            s.add_argument("--samples", type=int)
        if name == "simulate":
            s.add_argument("--m", type=int)
            s.add_argument("--negative-control", dest="negative_control", action="store_true",
                           default=None)
    return p


def _load_file(path: str) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    version = data.pop("schema_version", None)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"config schema_version must be {SCHEMA_VERSION}, got {version!r}")
    unknown = set(data) - set(_KEYS) - {"command"}
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return data


def _need(values: dict, *keys):
    missing = [k for k in keys if values.get(k) is None]
    if missing:
        raise ConfigError(f"{values['command']}: missing required parameter(s) {', '.join(missing)}")


def _as_list(x):
    return list(x) if isinstance(x, (list, tuple)) else [x]


def _build_params(values: dict):
    cmd = values["command"]
    if cmd == "kpz":
        _need(values, "u", "v", "L")
        return None, KpzParams(float(values["u"]), float(values["v"]), float(values["L"]))
    _need(values, "model", "N")
    model = str(values["model"]).upper()
    N = int(values["N"])
    if N < 0 or (N == 0 and cmd != "partition"):
        raise ConfigError("N must be positive")
    n_rates = max(N, 1)
    if model == "GEO":
        _need(values, "a", "c1", "c2")
        a = _as_list(values["a"])
        if len(a) == 1:
            a = a * n_rates
        if len(a) < n_rates:
            raise ConfigError(f"need {n_rates} values of a, got {len(a)}")
        return model, GeoParams(tuple(a), float(values["c1"]), float(values["c2"]))
    if model == "LG":
        _need(values, "alpha", "u", "v")
        al = _as_list(values["alpha"])
        if len(al) == 1:
            al = al * n_rates
        if len(al) < n_rates:
            raise ConfigError(f"need {n_rates} values of alpha, got {len(al)}")
        return model, LGParams(tuple(al), float(values["u"]), float(values["v"]))
    raise ConfigError(f"unknown model {values['model']!r}")


def parse_config(argv=None, environ=None) -> RunConfig:
    """Parse flags (and an optional --config file) into a validated RunConfig.

    Raises ConfigError or ParameterError on invalid input.
    """
    environ = os.environ if environ is None else environ
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        if exc.code == 0:
            raise
        raise ConfigError("invalid command line") from None
    flags = vars(args)
    values = _load_file(flags["config"]) if flags.get("config") else {}
    if values.get("command", args.command) != args.command:
        raise ConfigError(f"config file is for {values['command']!r}, not {args.command!r}")
    for k in _KEYS:
        if flags.get(k) is not None:
            values[k] = flags[k]
    values["command"] = args.command

    seed = int(values.get("seed", 0))
    if not 0 <= seed < 2**64:
        raise ConfigError("seed must be a 64-bit unsigned integer")
    tol = values.get("tol")
    if tol is not None:
        tol = float(tol)
        if not tol > 0 or not math.isfinite(tol):
            raise ConfigError("tol must be positive")
    fmt = values.get("format", "csv")
    if fmt not in ("csv", "json"):
        raise ConfigError("format must be csv or json")

    model, params = (None, None)
    options = {}
    cmd = args.command
    if cmd == "verify":
        options["suite"] = values.get("suite", "all")
        if options["suite"] not in SUITE_NAMES:
            raise ConfigError(f"unknown suite {options['suite']!r}")
    else:
        model, params = _build_params(values)
    if cmd == "laplace":
        _need(values, "t")
        options["t"] = [float(x) for x in _as_list(values["t"])]
        pts = values.get("points")
        options["points"] = [int(x) for x in pts] if pts is not None else [0, int(values["N"])]
        options["continuation"] = bool(values.get("continuation") or False)
    if cmd in ("sample", "simulate"):
        options["samples"] = int(values.get("samples", 1000 if cmd == "sample" else 20000))
        if options["samples"] < 1:
            raise ConfigError("samples must be positive")
    if cmd == "simulate":
        options["m"] = int(values.get("m", 3))
        if options["m"] < 0:
            raise ConfigError("m must be nonnegative")
        options["negative_control"] = bool(values.get("negative_control") or False)
    if cmd in ("partition", "laplace"):
        options["N"] = int(values["N"])

    out = values.get("out")
    if not out:
        out = os.path.join(environ.get("STRIPSTAT_OUT_DIR", "."), f"{cmd}.{fmt}")
    return RunConfig(cmd, model, params, seed, tol, out, fmt, options)


# ---------------------------------------------------------------------------
# commands: each returns (rows, summary, passed)
# ---------------------------------------------------------------------------


def _rel_tol(cfg, default):
    if cfg.tol is None:
        return default
    if cfg.tol < TOL_FLOOR:
        raise NonConvergenceError(f"tolerance {cfg.tol:g} is below the attainable floor {TOL_FLOOR:g}")
    return cfg.tol


def _run_verify(cfg):
    from .suites import run_suite

    rows = run_suite(cfg.options["suite"], cfg.tol, seed=cfg.seed)
    failed = [r["name"] for r in rows if not r["passed"]]
    return rows, {"checks": len(rows), "failed": failed}, not failed


def _run_partition(cfg):
    from .formulas import partition_geo, partition_lg

    N = cfg.options["N"]
    if cfg.model == "GEO":
        z = partition_geo(N, cfg.params, rel_tol=_rel_tol(cfg, 1e-13))
    else:
        z = partition_lg(N, cfg.params, rel_tol=_rel_tol(cfg, 1e-12))
    return [{"model": cfg.model, "N": N, "Z": z}], {}, True


def _run_laplace(cfg):
    from .formulas import LaplaceQuery, laplace_geo, laplace_lg, laplace_lg_continued

    o = cfg.options
    if o["points"][-1] != o["N"]:
        raise ConfigError("the last observation point must equal N")
    q = LaplaceQuery(cfg.model, tuple(o["points"]), tuple(o["t"]), o["continuation"])
    if cfg.model == "GEO":
        val = laplace_geo(q, cfg.params, rel_tol=_rel_tol(cfg, 1e-11))
    elif o["continuation"]:
        if q.k != 1:
            raise ConfigError("the continued formula supports a single interval")
        val = laplace_lg_continued(q.N, q.t[0], cfg.params, rel_tol=_rel_tol(cfg, 1e-10))
    else:
        val = laplace_lg(q, cfg.params, rel_tol=_rel_tol(cfg, 1e-10))
    row = {"model": cfg.model, "N": q.N, "points": " ".join(map(str, q.points)),
           "t": " ".join(repr(t) for t in q.t), "value": val}
    return [row], {}, True


def _run_sample(cfg):
    import numpy as np

    from .twolayer import ChainConfig, sample_twolayer_geo, sample_twolayer_lg_mcmc

    n = cfg.options["samples"]
    summary = {}
    if cfg.model == "GEO":
        paths = sample_twolayer_geo(cfg.params, cfg.seed, n)
    else:
        chains = min(n, 32)
        conf = ChainConfig(n_chains=chains, n_samples=-(-n // chains), thin=20)
        res = sample_twolayer_lg_mcmc(cfg.params, cfg.seed, conf)
        paths = np.asarray(res.paths).reshape(-1, cfg.params.N + 1, 2)[:n]
        summary = {"acceptance": res.acceptance, "ess": res.ess, "tau": res.tau,
                   "flagged": res.flagged}
    rows = []
    for s, path in enumerate(paths):
        for x, (l1, l2) in enumerate(path):
            rows.append({"sample": s, "x": x, "L1": l1.item(), "L2": l2.item()})
    return rows, summary, not summary.get("flagged", False)


def _run_simulate(cfg):
    from .strip_models import stationarity_report

    o = cfg.options
    rep = stationarity_report(cfg.model, cfg.params, o["m"], o["samples"], cfg.seed,
                              negative_control=o["negative_control"])
    # for the negative control the check is that stationarity is rejected
    ok = (not rep["passed"]) if o["negative_control"] else rep["passed"]
    rows = [dict(c) for c in rep["coordinates"]]
    summary = {k: v for k, v in rep.items() if k not in ("coordinates", "params")}
    summary["check_passed"] = ok
    return rows, summary, ok


def _run_kpz(cfg):
    from .kpz import c_uv, phase_limit, z_kpz_full

    p = cfg.params
    tol = _rel_tol(cfg, 1e-12)
    z = z_kpz_full(p, tol)
    row = {"u": p.u, "v": p.v, "L": p.L, "z_tilde": z.value, "c_uv": c_uv(p, tol),
           "phase_limit": phase_limit(p.u, p.v)}
    return [row], {}, True


_RUNNERS = {
    "verify": _run_verify,
    "partition": _run_partition,
    "laplace": _run_laplace,
    "sample": _run_sample,
    "simulate": _run_simulate,
    "kpz": _run_kpz,
}


def _clean(x):
    # json-safe, deterministic plain data
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if hasattr(x, "item"):
        return x.item()
    return x


def render(cfg: RunConfig, rows, summary, passed) -> str:
    conf = cfg.resolved()
    if cfg.format == "json":
        doc = {"config": conf, "version": __version__,
               "result": {"rows": rows, "summary": summary, "passed": passed}}
        return json.dumps(_clean(doc), sort_keys=True, indent=2) + "\n"
    buf = io.StringIO()
    buf.write(f"# stripstat {__version__}\n")
    buf.write(f"# config: {json.dumps(_clean(conf), sort_keys=True)}\n")
    if summary:
        buf.write(f"# summary: {json.dumps(_clean(summary), sort_keys=True)}\n")
    buf.write(f"# passed: {str(passed).lower()}\n")
    if rows:
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        for r in rows:
            writer.writerow(_clean(r))
    return buf.getvalue()


def dispatch(cfg: RunConfig) -> int:
    """Run a validated config, write its output file and return the exit code."""
    try:
        rows, summary, passed = _RUNNERS[cfg.command](cfg)
    except NonConvergenceError as exc:
        print(f"stripstat: non-convergence: {exc}", file=sys.stderr)
        return EXIT_NONCONV
    except (ConfigError, ParameterError) as exc:
        print(f"stripstat: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    text = render(cfg, _clean(rows), _clean(summary), bool(passed))
    d = os.path.dirname(cfg.out_path)
    if d:
        os.makedirs(d, exist_ok=True)
    with open(cfg.out_path, "w", newline="") as fh:
        fh.write(text)
    status = "passed" if passed else "FAILED"
    print(f"{cfg.command}: {status}; wrote {cfg.out_path}")
    return EXIT_OK if passed else EXIT_FAILED


def main(argv=None) -> int:
    try:
        cfg = parse_config(argv)
    except (ConfigError, ParameterError) as exc:
        print(f"stripstat: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return dispatch(cfg)


if __name__ == "__main__":
    sys.exit(main())
