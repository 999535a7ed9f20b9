"""Command-line front end: experiment configuration, execution, persistence.

Subcommands ``simulate``, ``theory`` and ``compare`` share one flat
key=value config-file format; command-line flags override file values.
Results go to a fixed-schema CSV; all diagnostics go to stderr.  Exit
codes: 0 success, 2 invalid configuration, 3 enumeration budget exceeded.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import re
import secrets
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .channel import snr_db_to_noise_var
from .modem import ConstellationKind, Scheme, SystemConfig, build_constellation
from .sim import DEFAULT_BATCH_SIZE, StopRule, run_sweep
from .theory import CLT_MIN_REFLECTORS, EnumerationBudgetError, union_bound_bep

__all__ = ["main", "CSV_COLUMNS", "write_results_csv", "read_results_csv", "parse_snr_grid"]

CSV_COLUMNS = [
    "scheme",
    "N",
    "Nr",
    "M",
    "constellation",
    "snr_db",
    "ber",
    "ci_low",
    "ci_high",
    "bit_errors",
    "bits_sent",
    "frames",
    "seed",
    "elapsed_s",
]

_INT_COLUMNS = {"N", "Nr", "M", "bit_errors", "bits_sent", "frames", "seed"}
_FLOAT_COLUMNS = {"snr_db", "ber", "ci_low", "ci_high", "elapsed_s"}

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BUDGET = 3

_VALUE_FLAGS_WITH_NEGATIVES = {"--snr"}
_NEGATIVE_VALUE = re.compile(r"^-\d")


class ConfigError(Exception):
    """Invalid or missing configuration; the message names the offending key."""


def _fail(message: str, code: int) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def parse_snr_grid(text: str) -> list[float]:
    """Parse an SNR grid: ``start:stop:step`` (inclusive), a comma list, or one value."""
    text = str(text).strip()
    try:
        if ":" in text:
            parts = text.split(":")
            if len(parts) != 3:
                raise ValueError
            start, stop, step = (float(p) for p in parts)
            if step <= 0:
                raise ConfigError("snr grid step must be positive")
            if stop < start:
                raise ConfigError("snr grid stop must not precede start")
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            return [start + i * step for i in range(count)]
        if "," in text:
            return [float(p) for p in text.split(",") if p.strip()]
        return [float(text)]
    except ConfigError:
        raise
    except ValueError:
        raise ConfigError(f"snr grid '{text}' is not start:stop:step, a comma list, or a number")


def _format_value(column: str, value) -> str:
    if column in _INT_COLUMNS:
        return str(int(value))
    if column in _FLOAT_COLUMNS:
        return repr(float(value))
    return str(value)


def write_results_csv(rows: list[dict], fh) -> None:
    fh.write(",".join(CSV_COLUMNS) + "\n")
    for row in rows:
        fh.write(",".join(_format_value(c, row[c]) for c in CSV_COLUMNS) + "\n")


def read_results_csv(path) -> list[dict]:
    """Parse a results CSV back into typed rows (exact float round trip)."""
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        if header != CSV_COLUMNS:
            raise ConfigError(f"unexpected results header: {header}")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            row = {}
            for col, part in zip(CSV_COLUMNS, parts):
                if col in _INT_COLUMNS:
                    row[col] = int(part)
                elif col in _FLOAT_COLUMNS:
                    row[col] = float(part)
                else:
                    row[col] = part
            rows.append(row)
    return rows


def load_config_file(path) -> dict:
    """Flat key=value file; '#' starts a comment; keys use flag names."""
    values = {}
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {path}")
    for lineno, raw in enumerate(p.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {lineno} is not key=value: {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key.replace("-", "_")] = value
    return values


def _preprocess_argv(argv: list[str]) -> list[str]:
    """Join value flags with negative-number-led values so argparse accepts them."""
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok in _VALUE_FLAGS_WITH_NEGATIVES and i + 1 < len(argv) and _NEGATIVE_VALUE.match(argv[i + 1]):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="risrsm",
        description="Link-level BER simulation and analytical bounds for "
        "RIS-assisted received spatial modulation with Alamouti coding.",
        allow_abbrev=False,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser, multi_scheme: bool) -> None:
        if multi_scheme:
            p.add_argument("--scheme", action="append", help="scheme (repeatable or comma list)")
        else:
            p.add_argument("--scheme", help="ris-rsm-asbc or ris-rsm")
        p.add_argument("--N", dest="N", type=int, help="reflector count")
        p.add_argument("--Nr", dest="Nr", type=int, help="receive antennas")
        p.add_argument("--M", dest="M", type=int, help="constellation order")
        p.add_argument("--constellation", help="psk or qam (default psk)")
        p.add_argument("--snr", help="SNR grid in dB: start:stop:step, comma list, or value")
        p.add_argument("--seed", type=int, help="master seed (default: fresh entropy, recorded)")
        p.add_argument("--out", help="results CSV path (default: stdout)")
        p.add_argument("--config", help="flat key=value config file; flags override")
        p.add_argument("--json", dest="json_out", help="also write a JSON run manifest here")
        p.add_argument("--plot", dest="plot_out", help="also render a BER figure to this file")

    sim = sub.add_parser("simulate", help="Monte Carlo BER sweep")
    add_common(sim, multi_scheme=False)
    sim.add_argument("--min-errors", type=int, help="bit errors to accumulate per point (default 200)")
    sim.add_argument("--max-frames", type=int, help="frame budget per point (default 10^7)")
    sim.add_argument("--threads", type=int, help="worker processes (default 1)")
    sim.add_argument("--batch-size", type=int, help="frames per batch (default 4096)")

    theo = sub.add_parser("theory", help="analytical union-bound sweep")
    add_common(theo, multi_scheme=False)
    theo.add_argument("--quad-nodes", type=int, help="quadrature nodes (default 64)")
    theo.add_argument("--enum-budget", type=int, help="hypothesis enumeration cap (default 4096)")

    comp = sub.add_parser("compare", help="run several schemes on one grid and seed")
    add_common(comp, multi_scheme=True)
    comp.add_argument("--min-errors", type=int)
    comp.add_argument("--max-frames", type=int)
    comp.add_argument("--threads", type=int)
    comp.add_argument("--batch-size", type=int)
    comp.add_argument("--wide-out", help="gnuplot-style wide table path (default <out>.wide.dat)")

    return parser


_DEFAULTS = {
    "constellation": "psk",
    "min_errors": 200,
    "max_frames": 10_000_000,
    "threads": 1,
    "batch_size": DEFAULT_BATCH_SIZE,
    "quad_nodes": 64,
    "enum_budget": 4096,
}


def _merged(args: argparse.Namespace) -> dict:
    """defaults < config file < explicit flags."""
    merged = dict(_DEFAULTS)
    if getattr(args, "config", None):
        file_values = load_config_file(args.config)
        known = set(vars(args)) | set(_DEFAULTS) | {"snr"}
        for key, value in file_values.items():
            if key not in known:
                raise ConfigError(f"unknown config key: {key}")
            merged[key] = value
    for key, value in vars(args).items():
        if key in ("command", "config"):
            continue
        if value is not None:
            merged[key] = value
    return merged


def _require(merged: dict, keys: list[str]) -> None:
    for key in keys:
        if merged.get(key) in (None, ""):
            flag = key.replace("_", "-") if key not in ("N", "Nr", "M") else key
            raise ConfigError(f"missing required parameter: {flag}")


def _parse_scheme(text: str) -> Scheme:
    norm = str(text).strip().lower().replace("_", "-")
    for scheme in Scheme:
        if scheme.value == norm:
            return scheme
    raise ConfigError(f"unknown scheme: {text}")


def _parse_kind(text: str) -> ConstellationKind:
    norm = str(text).strip().lower()
    for kind in ConstellationKind:
        if kind.value == norm:
            return kind
    raise ConfigError(f"unknown constellation: {text}")


def _build_cfg(merged: dict, scheme: Scheme) -> SystemConfig:
    try:
        return SystemConfig(
            scheme=scheme,
            num_reflectors=int(merged["N"]),
            num_rx=int(merged["Nr"]),
            mod_order=int(merged["M"]),
            constellation=_parse_kind(merged["constellation"]),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _resolve_seed(merged: dict) -> int:
    if merged.get("seed") is not None:
        return int(merged["seed"])
    seed = secrets.randbits(32)
    print(f"note: no --seed given; using recorded entropy seed {seed}", file=sys.stderr)
    return seed


def _stop_rule(merged: dict) -> StopRule:
    return StopRule(
        min_bit_errors=int(merged["min_errors"]),
        max_frames=int(merged["max_frames"]),
    )


def _point_row(cfg: SystemConfig, point) -> dict:
    return {
        "scheme": cfg.scheme.value,
        "N": cfg.num_reflectors,
        "Nr": cfg.num_rx,
        "M": cfg.mod_order,
        "constellation": cfg.constellation.value,
        "snr_db": point.snr_db,
        "ber": point.ber,
        "ci_low": point.ci_low,
        "ci_high": point.ci_high,
        "bit_errors": point.bit_errors,
        "bits_sent": point.bits_sent,
        "frames": point.frames,
        "seed": point.seed,
        "elapsed_s": point.elapsed_seconds,
    }


def _emit(rows: list[dict], merged: dict, params: dict) -> None:
    out = merged.get("out")
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            write_results_csv(rows, fh)
    else:
        write_results_csv(rows, sys.stdout)
    if merged.get("json_out"):
        manifest = {
            "tool": "risrsm",
            "version": __version__,
            "created_utc": datetime.now(timezone.utc).isoformat(),
            "params": params,
            "param_hash": param_hash(params),
            "points": rows,
        }
        Path(merged["json_out"]).write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    if merged.get("plot_out"):
        from .plotting import render_ber_figure

        curves: dict[str, tuple[list[float], list[float]]] = {}
        for row in rows:
            label = f"{row['scheme']} N={row['N']}"
            curves.setdefault(label, ([], []))
            curves[label][0].append(row["snr_db"])
            curves[label][1].append(row["ber"])
        render_ber_figure(curves, merged["plot_out"])


def param_hash(params: dict) -> str:
    canon = json.dumps(params, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def _cmd_simulate(args: argparse.Namespace) -> int:
    merged = _merged(args)
    _require(merged, ["scheme", "N", "Nr", "M", "snr"])
    scheme = _parse_scheme(merged["scheme"])
    cfg = _build_cfg(merged, scheme)
    grid = parse_snr_grid(merged["snr"])
    seed = _resolve_seed(merged)
    const = build_constellation(cfg.mod_order, cfg.constellation)
    points = run_sweep(
        cfg,
        const,
        grid,
        stop=_stop_rule(merged),
        seed=seed,
        batch_size=int(merged["batch_size"]),
        workers=int(merged["threads"]),
    )
    rows = [_point_row(cfg, p) for p in points]
    params = {
        "command": "simulate",
        "scheme": cfg.scheme.value,
        "N": cfg.num_reflectors,
        "Nr": cfg.num_rx,
        "M": cfg.mod_order,
        "constellation": cfg.constellation.value,
        "snr": grid,
        "seed": seed,
        "min_errors": int(merged["min_errors"]),
        "max_frames": int(merged["max_frames"]),
        "batch_size": int(merged["batch_size"]),
    }
    _emit(rows, merged, params)
    return EXIT_OK


def _cmd_theory(args: argparse.Namespace) -> int:
    merged = _merged(args)
    merged.setdefault("scheme", Scheme.RIS_RSM_ASBC.value)
    if merged.get("scheme") is None:
        merged["scheme"] = Scheme.RIS_RSM_ASBC.value
    _require(merged, ["N", "Nr", "M", "snr"])
    scheme = _parse_scheme(merged["scheme"])
    if scheme is not Scheme.RIS_RSM_ASBC:
        raise ConfigError("scheme: the analytical bound is available for ris-rsm-asbc only")
    cfg = _build_cfg(merged, scheme)
    grid = parse_snr_grid(merged["snr"])
    const = build_constellation(cfg.mod_order, cfg.constellation)
    if cfg.num_reflectors < CLT_MIN_REFLECTORS:
        print(
            f"warning: N={cfg.num_reflectors} reflectors is below {CLT_MIN_REFLECTORS}; "
            "the Gaussian moment matching behind the bound may be inaccurate",
            file=sys.stderr,
        )
    rows = []
    import warnings as _warnings

    for snr in grid:
        t0 = time.perf_counter()
        with _warnings.catch_warnings():
            _warnings.simplefilter("ignore")  # CLT notice already printed above
            bound = union_bound_bep(
                cfg,
                const,
                snr_db_to_noise_var(snr),
                quad_nodes=int(merged["quad_nodes"]),
                enum_budget=int(merged["enum_budget"]),
            )
        rows.append(
            {
                "scheme": cfg.scheme.value,
                "N": cfg.num_reflectors,
                "Nr": cfg.num_rx,
                "M": cfg.mod_order,
                "constellation": cfg.constellation.value,
                "snr_db": snr,
                "ber": bound,
                "ci_low": bound,
                "ci_high": bound,
                "bit_errors": 0,
                "bits_sent": 0,
                "frames": 0,
                "seed": 0,
                "elapsed_s": time.perf_counter() - t0,
            }
        )
    params = {
        "command": "theory",
        "scheme": cfg.scheme.value,
        "N": cfg.num_reflectors,
        "Nr": cfg.num_rx,
        "M": cfg.mod_order,
        "constellation": cfg.constellation.value,
        "snr": grid,
        "quad_nodes": int(merged["quad_nodes"]),
    }
    _emit(rows, merged, params)
    return EXIT_OK


def _cmd_compare(args: argparse.Namespace) -> int:
    merged = _merged(args)
    _require(merged, ["scheme", "N", "Nr", "M", "snr"])
    raw = merged["scheme"]
    if isinstance(raw, str):
        raw = [raw]
    names: list[str] = []
    for chunk in raw:
        names.extend(p.strip() for p in str(chunk).split(",") if p.strip())
    schemes: list[Scheme] = []
    for name in names:
        scheme = _parse_scheme(name)
        if scheme in schemes:
            print(f"warning: scheme {scheme.value} listed more than once; deduplicated", file=sys.stderr)
            continue
        schemes.append(scheme)
    grid = parse_snr_grid(merged["snr"])
    seed = _resolve_seed(merged)
    stop = _stop_rule(merged)

    rows: list[dict] = []
    per_scheme: dict[str, list] = {}
    for scheme in schemes:
        cfg = _build_cfg(merged, scheme)
        const = build_constellation(cfg.mod_order, cfg.constellation)
        points = run_sweep(
            cfg,
            const,
            grid,
            stop=stop,
            seed=seed,
            batch_size=int(merged["batch_size"]),
            workers=int(merged["threads"]),
        )
        per_scheme[scheme.value] = points
        rows.extend(_point_row(cfg, p) for p in points)

    params = {
        "command": "compare",
        "schemes": [s.value for s in schemes],
        "N": int(merged["N"]),
        "Nr": int(merged["Nr"]),
        "M": int(merged["M"]),
        "constellation": str(merged["constellation"]),
        "snr": grid,
        "seed": seed,
        "min_errors": int(merged["min_errors"]),
        "max_frames": int(merged["max_frames"]),
    }
    _emit(rows, merged, params)

    wide_path = merged.get("wide_out")
    if not wide_path and merged.get("out"):
        wide_path = str(merged["out"]) + ".wide.dat"
    lines = ["# snr_db " + " ".join(s.value for s in schemes)]
    for i, snr in enumerate(grid):
        vals = " ".join(repr(per_scheme[s.value][i].ber) for s in schemes)
        lines.append(f"{repr(float(snr))} {vals}")
    text = "\n".join(lines) + "\n"
    if wide_path:
        Path(wide_path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    args = parser.parse_args(_preprocess_argv(argv))
    handlers = {
        "simulate": _cmd_simulate,
        "theory": _cmd_theory,
        "compare": _cmd_compare,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        return _fail(str(exc), EXIT_CONFIG)
    except EnumerationBudgetError as exc:
        return _fail(str(exc), EXIT_BUDGET)


if __name__ == "__main__":
    sys.exit(main())
