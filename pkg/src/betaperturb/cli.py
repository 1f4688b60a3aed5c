"""
Command-line interface: ``betaperturb {sample,density,verify,plot}``.

Exit codes: 0 success, 1 verification failure, 2 data error, 64 usage error.
Every option can also be given in a flat ``key=value`` file passed with
``--config``; options on the command line take precedence.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .density import log_density
from .ensembles import CHIRAL, GAUSSIAN, LAGUERRE, EnsembleSpec, RngStream, ScaleLaw, sample_jacobi, sample_scale
from .errors import BetaPerturbError, ConfigurationError, ParseError
from .perturb import EigenConfiguration, chiral_spectrum, perturbed_spectrum
from .plotting import caption_text, scatter_svg
from .verify import SUITES, run_suite

__all__ = ["main", "parse_law", "read_config", "read_configurations", "sample_records", "RunConfig"]

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_DATA = 2
EXIT_USAGE = 64

CSV_HEADER = ["trial", "l", "k", "re", "im"]
DENSITY_COLUMNS = ["log_density", "normalized"]
ERROR_MARKER = "ERROR"

_LAW_RE = re.compile(r"^\s*([a-z]+)\s*\(([^()]*)\)\s*$")

# option name -> converter, for values coming from a --config file
_KEYS = {
    "ensemble": str,
    "beta": float,
    "n": int,
    "m": int,
    "l": float,
    "law": str,
    "trials": int,
    "seed": int,
    "format": str,
    "output": str,
    "input": str,
    "jobs": int,
    "suite": str,
}

log = logging.getLogger("betaperturb")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


def parse_law(text: str) -> ScaleLaw:
    """``exp(rate)``, ``uniform(a,b)``, ``halfnormal(sigma)`` or ``point(l0)``."""
    match = _LAW_RE.match(text)
    if not match:
        raise ConfigurationError(f"cannot parse scale law {text!r}")
    name, raw = match.groups()
    try:
        args = [float(a) for a in raw.split(",")] if raw.strip() else []
    except ValueError:
        raise ConfigurationError(f"non-numeric argument in scale law {text!r}") from None
    makers = {"exp": (ScaleLaw.exponential, 1), "uniform": (ScaleLaw.uniform, 2),
              "halfnormal": (ScaleLaw.halfnormal, 1), "point": (ScaleLaw.point_mass, 1)}
    if name not in makers:
        raise ConfigurationError(f"unknown scale law {name!r}; use exp, uniform, halfnormal or point")
    make, arity = makers[name]
    if len(args) != arity:
        raise ConfigurationError(f"{name} takes {arity} argument(s)")
    return make(*args)


def read_config(path: str) -> dict:
    """Read a flat ``key=value`` file; ``#`` starts a comment."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigurationError(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in _KEYS:
                raise ConfigurationError(f"{path}:{lineno}: unknown key {key!r}")
            try:
                out[key] = _KEYS[key](value)
            except ValueError:
                raise ConfigurationError(f"{path}:{lineno}: bad value for {key}: {value!r}") from None
    return out


@dataclass
class RunConfig:
    subcommand: str
    ensemble: Optional[str] = None
    beta: Optional[float] = None
    n: Optional[int] = None
    m: Optional[int] = None
    law: Optional[ScaleLaw] = None
    trials: int = 1
    seed: int = 0
    format: Optional[str] = None
    output: Optional[str] = None
    input: Optional[str] = None
    jobs: int = 1
    suite: Optional[str] = None

    def spec(self, required: bool = True) -> Optional[EnsembleSpec]:
        if self.ensemble is None and self.beta is None and self.n is None:
            if required:
                raise UsageError("--ensemble, --beta and --n are required")
            return None
        if self.n is None:
            raise UsageError("--n is required")
        try:
            return EnsembleSpec(self.ensemble or GAUSSIAN, 2.0 if self.beta is None else self.beta,
                                self.n, self.m)
        except BetaPerturbError as exc:
            raise UsageError(str(exc)) from None


def _merge(args: argparse.Namespace) -> RunConfig:
    values = {}
    if getattr(args, "config", None):
        try:
            values.update(read_config(args.config))
        except OSError as exc:
            raise UsageError(f"cannot read config file: {exc}") from None
        except ConfigurationError as exc:
            raise UsageError(str(exc)) from None
    flags = {k: getattr(args, k) for k in _KEYS if getattr(args, k, None) is not None}
    if "l" in flags or "law" in flags:
        values.pop("l", None)
        values.pop("law", None)
    values.update(flags)
    if "l" in values and "law" in values:
        raise UsageError("give either --l or --law, not both")
    try:
        law = None
        if "l" in values:
            law = ScaleLaw.point_mass(values["l"])
        elif "law" in values:
            law = parse_law(values["law"])
    except ConfigurationError as exc:
        raise UsageError(str(exc)) from None
    cfg = RunConfig(args.command, law=law)
    for key in ("ensemble", "beta", "n", "m", "trials", "seed", "format", "output", "input", "jobs", "suite"):
        if key in values:
            setattr(cfg, key, values[key])
    if cfg.ensemble is not None and cfg.ensemble not in (GAUSSIAN, LAGUERRE, CHIRAL):
        raise UsageError(f"unknown ensemble {cfg.ensemble!r}")
    if cfg.format not in (None, "csv", "json", "svg"):
        raise UsageError(f"unknown format {cfg.format!r}")
    if cfg.trials < 1 or cfg.jobs < 1:
        raise UsageError("--trials and --jobs must be positive")
    return cfg


# ---------------------------------------------------------------------------
# sampling and records
# ---------------------------------------------------------------------------


def _sample_trial(task):
    spec, law, seed, t = task
    rng = RngStream(seed, t)
    lag = spec.laguerre()
    J = sample_jacobi(lag, rng)
    l = sample_scale(law, rng)
    config = perturbed_spectrum(J, l, lag)
    if spec.kind == CHIRAL:
        config = chiral_spectrum(config, spec.m, spec.n)
    return config


def sample_records(spec: EnsembleSpec, law: ScaleLaw, trials: int, seed: int, jobs: int = 1) -> list:
    """Perturbed spectra for trials ``0..trials-1``; trial ``t`` uses ``RngStream(seed, t)``."""
    tasks = [(spec, law, seed, t) for t in range(trials)]
    if jobs > 1 and trials > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_sample_trial, tasks, chunksize=max(1, trials // (4 * jobs))))
    return [_sample_trial(task) for task in tasks]


def _meta(spec: EnsembleSpec, seed: int, law: ScaleLaw) -> dict:
    meta = {"ensemble": spec.kind, "beta": spec.beta, "n": spec.n}
    if spec.m is not None:
        meta["m"] = spec.m
    meta["seed"] = seed
    meta["law"] = law.name
    return meta


def _csv_text(configs, extra=None) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER + (DENSITY_COLUMNS if extra is not None else []))
    for t, config in enumerate(configs):
        for k, z in enumerate(config.z):
            row = [t, repr(config.l), k, repr(float(z.real)), repr(float(z.imag))]
            if extra is not None:
                row += list(extra[t])
            writer.writerow(row)
    return buf.getvalue()


def _json_text(meta, configs, extra=None) -> str:
    trials = []
    for t, config in enumerate(configs):
        rec = {"l": config.l, "z": [[float(z.real), float(z.imag)] for z in config.z],
               "zero_count": int(config.zero_count)}
        if extra is not None:
            value, note = extra[t]
            if value == ERROR_MARKER:
                rec["log_density"] = None
                rec["error"] = note
            else:
                rec["log_density"] = float(value)
                rec["normalized"] = note == "true"
        trials.append(rec)
    return json.dumps({"meta": meta, "trials": trials}, indent=1) + "\n"


def _write(text: str, path: Optional[str]) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _read_text(path: Optional[str]) -> str:
    if path is None or path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def read_configurations(text: str):
    """Parse sample output (CSV or JSON).

    Returns ``(meta, records)`` where ``meta`` is ``None`` for CSV and each
    record is ``(l, z, zero_count)``; ``zero_count`` is ``None`` when the
    format does not carry it.
    """
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            doc = json.loads(text)
            meta = doc.get("meta")
            records = []
            for i, rec in enumerate(doc["trials"]):
                z = np.array([complex(float(a), float(b)) for a, b in rec["z"]], dtype=complex)
                records.append((float(rec["l"]), z, rec.get("zero_count")))
            return meta, records
        except (ValueError, KeyError, TypeError, AttributeError) as exc:
            raise ParseError(f"malformed JSON input: {exc}") from None
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        return None, []
    header = [h.strip() for h in lines[0].split(",")]
    if header[:5] != CSV_HEADER:
        raise ParseError(f"expected header {','.join(CSV_HEADER)}", line=1)
    groups = {}
    order = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.split(",")
        if len(fields) < 5:
            raise ParseError(f"expected at least 5 fields, got {len(fields)}", line=lineno)
        try:
            t = int(fields[0])
            l = float(fields[1])
            int(fields[2])
            z = complex(float(fields[3]), float(fields[4]))
        except ValueError:
            raise ParseError("non-numeric field", line=lineno) from None
        if not (math.isfinite(l) and math.isfinite(z.real) and math.isfinite(z.imag)):
            raise ParseError("non-finite value", line=lineno)
        if t not in groups:
            groups[t] = (l, [])
            order.append(t)
        elif groups[t][0] != l:
            raise ParseError(f"trial {t} has inconsistent l", line=lineno)
        groups[t][1].append(z)
    return None, [(groups[t][0], np.array(groups[t][1], dtype=complex), None) for t in order]


def _spec_from_meta(meta) -> Optional[EnsembleSpec]:
    if not meta:
        return None
    try:
        return EnsembleSpec(meta["ensemble"], float(meta["beta"]), int(meta["n"]),
                            None if meta.get("m") is None else int(meta["m"]))
    except (KeyError, TypeError, ValueError, BetaPerturbError) as exc:
        raise ParseError(f"bad meta block: {exc}") from None


def _structural_zeros(spec: EnsembleSpec) -> int:
    if spec.kind == CHIRAL:
        return abs(spec.m - spec.n)
    return 1 if spec.laguerre().hard else 0


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_sample(cfg: RunConfig) -> int:
    spec = cfg.spec()
    law = cfg.law or ScaleLaw.point_mass(1.0)
    configs = sample_records(spec, law, cfg.trials, cfg.seed, cfg.jobs)
    if cfg.format == "svg":
        if not cfg.output:
            raise UsageError("--format svg needs --output")
        z = np.concatenate([c.z for c in configs])
        l = configs[0].l if len({c.l for c in configs}) == 1 else law.name
        scatter_svg(z, cfg.output, caption_text(spec.kind, spec.beta, spec.n, l, spec.m))
        return EXIT_OK
    if cfg.format == "json":
        _write(_json_text(_meta(spec, cfg.seed, law), configs), cfg.output)
    else:
        _write(_csv_text(configs), cfg.output)
    return EXIT_OK


def cmd_density(cfg: RunConfig) -> int:
    meta, records = read_configurations(_read_text(cfg.input))
    spec = cfg.spec(required=False) or _spec_from_meta(meta)
    if spec is None:
        raise UsageError("ensemble unknown: pass --ensemble/--beta/--n or a JSON input with meta")
    law = cfg.law
    if law is None and meta and meta.get("law"):
        try:
            law = parse_law(meta["law"])
        except ConfigurationError:
            law = None
    configs, extra = [], []
    failed = 0
    for t, (l, z, zero_count) in enumerate(records):
        zc = _structural_zeros(spec) if zero_count is None else int(zero_count)
        try:
            config = EigenConfiguration(z, l, spec, zc)
            target = spec.laguerre() if spec.kind == CHIRAL else spec
            check = config if spec.kind != CHIRAL else EigenConfiguration(
                z[z.real > 0] ** 2, l, target, 1 if target.hard else 0)
            bad = check.violations()
            if bad:
                raise ParseError("; ".join(bad))
            report = log_density(config, law)
            extra.append((repr(report.log_value), "true" if report.normalized else "false"))
        except (BetaPerturbError, ValueError, ArithmeticError) as exc:
            failed += 1
            config = EigenConfiguration(z, l, spec, zc)
            reason = str(exc).replace(",", ";").replace("\n", " ")
            log.error("trial %d: %s", t, reason)
            extra.append((ERROR_MARKER, reason))
        configs.append(config)
    fmt = cfg.format or ("json" if meta is not None else "csv")
    if fmt == "json":
        _write(_json_text(meta or _meta(spec, cfg.seed, law or ScaleLaw.point_mass(1.0)), configs, extra),
               cfg.output)
    else:
        _write(_csv_text(configs, extra), cfg.output)
    return EXIT_DATA if failed else EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    spec = cfg.spec(required=False)
    report = run_suite(cfg.suite, spec, cfg.law, cfg.trials, cfg.seed, cfg.jobs)
    _write(report.to_json() + "\n", cfg.output)
    for line in report.summary_lines():
        print(line, file=sys.stderr)
    print(f"{'PASS' if report.passed else 'FAIL'} {report.suite}: {len(report.checks)} checks, "
          f"{report.trials} trials, seed {report.seed}, {report.wall_time:.2f} s", file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_VERIFY


def cmd_plot(cfg: RunConfig) -> int:
    if not cfg.output:
        raise UsageError("plot needs --output")
    meta, records = read_configurations(_read_text(cfg.input))
    spec = cfg.spec(required=False) or _spec_from_meta(meta)
    z = np.concatenate([r[1] for r in records]) if records else np.zeros(0, dtype=complex)
    ls = {r[0] for r in records}
    if len(ls) == 1:
        l = ls.pop()
    elif cfg.law is not None:
        l = cfg.law.name
    elif meta and meta.get("law"):
        l = meta["law"]
    else:
        l = "varies" if records else None
    if spec is not None:
        caption = caption_text(spec.kind, spec.beta, spec.n, l, spec.m)
    else:
        caption = caption_text(None, None, None, l)
    scatter_svg(z, cfg.output, caption)
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _add_common(p, with_trials=True):
    p.add_argument("--config", help="flat key=value file with defaults for any option")
    p.add_argument("--ensemble", choices=[GAUSSIAN, LAGUERRE, CHIRAL])
    p.add_argument("--beta", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    scale = p.add_mutually_exclusive_group()
    scale.add_argument("--l", type=float, help="fixed perturbation scale")
    scale.add_argument("--law", help="scale law: exp(rate), uniform(a,b), halfnormal(sigma), point(l0)")
    if with_trials:
        p.add_argument("--trials", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--jobs", type=int, help="worker processes (output order is unaffected)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="betaperturb", description=__doc__.strip().splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("sample", help="sample perturbed spectra")
    _add_common(p)
    p.add_argument("--format", choices=["csv", "json", "svg"])
    p.add_argument("--output", "-o")

    p = sub.add_parser("density", help="closed-form log-density of sampled configurations")
    _add_common(p, with_trials=False)
    p.add_argument("--input", "-i", help="CSV or JSON from 'sample' (default: stdin)")
    p.add_argument("--format", choices=["csv", "json"])
    p.add_argument("--output", "-o")

    p = sub.add_parser("verify", help="run a verification suite")
    _add_common(p)
    p.add_argument("--suite", choices=list(SUITES) + ["all"])
    p.add_argument("--output", "-o", help="JSON report path (default: stdout)")

    p = sub.add_parser("plot", help="SVG scatter of sampled eigenvalues")
    _add_common(p, with_trials=False)
    p.add_argument("--input", "-i", help="CSV or JSON from 'sample' (default: stdin)")
    p.add_argument("--output", "-o")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s", stream=sys.stderr)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _merge(args)
        if cfg.subcommand == "verify":
            if cfg.suite is None:
                raise UsageError("--suite is required")
            if cfg.suite not in SUITES + ("all",):
                raise UsageError(f"unknown suite {cfg.suite!r}")
        handler = {"sample": cmd_sample, "density": cmd_density, "verify": cmd_verify, "plot": cmd_plot}
        return handler[cfg.subcommand](cfg)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"betaperturb: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (BetaPerturbError, OSError) as exc:
        print(f"betaperturb: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
