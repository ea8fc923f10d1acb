"""Command-line front end.

Subcommands: ``eval`` (one bound report), ``sweep`` (minimum energy-per-bit
CSV over a (ka, alpha) grid, optionally with a rendered figure), ``aloha``
(T-fold slotted comparison, same CSV schema), ``simulate`` (Monte Carlo
estimate next to the matching analytic bound) and ``check`` (built-in
invariant suite).

Option precedence is flags > config file > built-in defaults; the config
file holds ``key = value`` lines with ``#`` comments, and unknown keys are
rejected.  Exit codes: 0 success, 1 usage error, 2 computation invalid or
target unattainable, 3 self-check failure.
"""

from __future__ import annotations

import argparse
import math
import sys

from . import aloha as aloha_mod
from . import bounds, montecarlo, optimizer, selfcheck
from .model import DelayVector, SystemParams


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); we own the exit codes
        raise UsageError(message)


# per-subcommand schema: key -> (type, default); None default means unset
_PARAM_KEYS = {
    "n": (int, 4000),
    "log_m": (float, 100.0),
    "epsilon": (float, 1e-3),
}

_SCHEMAS: dict[str, dict[str, tuple[type, object]]] = {
    "eval": {
        **_PARAM_KEYS,
        "ka": (int, 100),
        "alpha": (float, 0.0),
        "p": (float, None),
        "p_prime": (float, None),
        "variant": (str, "thm2"),
        "delays": (str, None),
        "subset_guard": (int, bounds.DEFAULT_SUBSET_GUARD),
    },
    "sweep": {
        **_PARAM_KEYS,
        "ka": (str, "50:160:10"),
        "alpha": (str, "0,0.2,0.4"),
        "variant": (str, "auto"),
        "cap_db": (float, optimizer.DEFAULT_CAP_DB),
        "floor_db": (float, optimizer.DEFAULT_FLOOR_DB),
        "rel_tol": (float, optimizer.DEFAULT_REL_TOL),
        "workers": (int, 1),
        "output": (str, None),
        "plot": (str, None),
    },
    "aloha": {
        **_PARAM_KEYS,
        "ka": (str, "50:160:10"),
        "alpha": (str, "0,0.2,0.4"),
        "t_fold": (int, 16),
        "cap_db": (float, optimizer.DEFAULT_CAP_DB),
        "floor_db": (float, optimizer.DEFAULT_FLOOR_DB),
        "rel_tol": (float, optimizer.DEFAULT_REL_TOL),
        "workers": (int, 1),
        "output": (str, None),
        "plot": (str, None),
    },
    "simulate": {
        "n_sim": (int, 200),
        "m_sim": (int, 64),
        "ka_sim": (int, 2),
        "p": (float, None),
        "p_prime": (float, None),
        "delays": (str, None),
        "trials": (int, 10000),
        "seed": (int, 0),
        "noise_std": (float, 1.0),
        "workers": (int, 1),
        "output": (str, None),
    },
    "check": {
        "seed": (int, 0),
    },
}

_HELP = {
    "n": "blocklength in channel uses",
    "log_m": "payload size in nats",
    "epsilon": "target per-user error probability",
    "ka": "number of active users (sweeps: list '50,80' or inclusive range '50:160:10')",
    "alpha": "delay fraction in [0,1) (sweeps: comma list)",
    "p": "codebook symbol variance, linear power units",
    "p_prime": "maximal power constraint, linear power units",
    "variant": "bound variant: thm1 | sync | thm2 (sweeps: thm2 | sync | auto)",
    "delays": "comma-separated non-decreasing delays starting at 0",
    "subset_guard": "largest ka allowed for exact error-set enumeration",
    "cap_db": "give up above this Eb/N0 (dB)",
    "floor_db": "smallest Eb/N0 (dB) probed",
    "rel_tol": "relative width of the power-cap bisection",
    "workers": "parallel worker processes (results identical for any count)",
    "output": "CSV output path (default: stdout)",
    "plot": "also render the sweep figure (PNG/PDF by extension) to this path",
    "n_sim": "simulation blocklength (<= 512)",
    "m_sim": "simulation codebook size (<= 256)",
    "ka_sim": "simulated active users (<= 3)",
    "trials": "Monte Carlo trials",
    "seed": "base seed for counter-derived per-trial streams",
    "noise_std": "noise standard deviation (1.0 is the channel model)",
}


def parse_config_text(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"config line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def merge_options(subcommand: str, cli_values: dict, config: dict[str, str]) -> dict:
    """flags > config file > defaults, with unknown config keys rejected."""
    schema = _SCHEMAS[subcommand]
    for key in config:
        if key not in schema:
            raise UsageError(f"unknown config key {key!r} for subcommand {subcommand!r}")
    merged = {}
    for key, (typ, default) in schema.items():
        if cli_values.get(key) is not None:
            merged[key] = cli_values[key]
        elif key in config:
            try:
                merged[key] = typ(config[key])
            except ValueError as exc:
                raise UsageError(f"config key {key!r}: {exc}") from exc
        else:
            merged[key] = default
    return merged


def dump_config(merged: dict, path: str) -> None:
    lines = [f"{k} = {v}" for k, v in sorted(merged.items()) if v is not None]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def parse_int_grid(spec: str) -> list[int]:
    """'50:160:10' (inclusive) or '50,80,110' or '50'."""
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) == 2:
            start, stop, step = int(parts[0]), int(parts[1]), 1
        elif len(parts) == 3:
            start, stop, step = (int(x) for x in parts)
        else:
            raise UsageError(f"bad range spec {spec!r}")
        if step < 1 or stop < start:
            raise UsageError(f"bad range spec {spec!r}")
        return list(range(start, stop + 1, step))
    return [int(x) for x in spec.split(",") if x.strip() != ""]


def parse_float_list(spec: str) -> list[float]:
    return [float(x) for x in spec.split(",") if x.strip() != ""]


def parse_delays(spec: str | None, ka: int) -> DelayVector:
    if spec is None:
        return DelayVector.zeros(ka)
    return DelayVector(tuple(int(x) for x in spec.split(",")))


def _add_schema_flags(sub: argparse.ArgumentParser, name: str) -> None:
    for key, (typ, default) in _SCHEMAS[name].items():
        flag = "--" + key.replace("_", "-")
        sub.add_argument(
            flag,
            dest=key,
            type=str if typ is str else typ,
            default=None,
            help=f"{_HELP.get(key, key)} (default: {default})",
        )
    sub.add_argument("--config", default=None, help="config file with 'key = value' lines")
    sub.add_argument("--dump-config", default=None, help="write the effective options to this path")


def build_parser() -> _Parser:
    parser = _Parser(prog="aumac", description=__doc__.split("\n\n")[0])
    subs = parser.add_subparsers(dest="subcommand", required=True)
    for name, blurb in (
        ("eval", "evaluate one bound and print a report line"),
        ("sweep", "minimum Eb/N0 over a (ka, alpha) grid; CSV and optional figure"),
        ("aloha", "T-fold slotted ALOHA minimum Eb/N0 over a grid"),
        ("simulate", "Monte Carlo PUPE estimate next to the analytic bound"),
        ("check", "run the built-in invariant suite"),
    ):
        sub = subs.add_parser(name, help=blurb, description=blurb)
        _add_schema_flags(sub, name)
        if name == "eval":
            sub.add_argument(
                "--details",
                action="store_true",
                help="also print the per-cardinality breakdown (worst-case "
                "profiles in len:value run form, tilts, log terms)",
            )
    return parser


def _merged_for(args) -> dict:
    config: dict[str, str] = {}
    if args.config is not None:
        with open(args.config, "r", encoding="utf-8") as fh:
            config = parse_config_text(fh.read())
    cli_values = {k: getattr(args, k) for k in _SCHEMAS[args.subcommand]}
    merged = merge_options(args.subcommand, cli_values, config)
    if args.dump_config is not None:
        dump_config(merged, args.dump_config)
    return merged


def _require(merged: dict, *keys: str) -> None:
    for key in keys:
        if merged[key] is None:
            raise UsageError(f"--{key.replace('_', '-')} is required")


def _cmd_eval(merged: dict) -> int:
    _require(merged, "p", "p_prime")
    params = SystemParams(
        n=merged["n"],
        log_m=merged["log_m"],
        ka=merged["ka"],
        epsilon=merged["epsilon"],
        alpha=merged["alpha"],
        p=merged["p"],
        p_prime=merged["p_prime"],
    )
    variant = merged["variant"]
    if variant == "thm1":
        delays = parse_delays(merged["delays"], params.ka)
        report = bounds.theorem1_bound(
            params, delays, bounds.MODE_POWER_OF_M, subset_guard=merged["subset_guard"]
        )
    elif variant == "sync":
        report = bounds.synchronous_bound(params)
    elif variant == "thm2":
        report = bounds.theorem2_bound(params)
    else:
        raise UsageError(f"unknown variant {variant!r} (expected thm1, sync or thm2)")
    print(report.serialize())
    if merged.get("details"):
        if report.certificates is not None:
            for c in report.certificates:
                print(
                    f"  k={c.k} iota={c.iota} profile={c.profile.serialize()} "
                    f"t0={c.t0} t_bar={c.t_bar} t_under={c.t_under} "
                    f"t_star={c.t_star} log_term={c.log_term} "
                    f"status={'ok' if c.valid else c.failure}"
                )
        else:
            for k, _, log_term, status in report.per_cardinality:
                print(f"  k={k} log_term={log_term} status={status}")
    return 0 if report.valid else 2


def _grid(merged: dict) -> list[tuple[int, float]]:
    kas = parse_int_grid(merged["ka"])
    alphas = parse_float_list(merged["alpha"])
    if not kas or not alphas:
        raise UsageError("empty (ka, alpha) grid")
    return [(ka, alpha) for ka in kas for alpha in alphas]


def _emit_points(points, merged: dict) -> int:
    text = optimizer.csv_text(points)
    if merged["output"] is None:
        sys.stdout.write(text)
    else:
        with open(merged["output"], "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    if merged["plot"] is not None:
        from .plotting import plot_energy_points

        plot_energy_points(points, merged["plot"])
    return 2 if any(p.status != optimizer.STATUS_OK for p in points) else 0


def _base_params(merged: dict, ka: int, alpha: float) -> SystemParams:
    # p/p_prime placeholders; the optimizer owns the power search
    return SystemParams(
        n=merged["n"],
        log_m=merged["log_m"],
        ka=ka,
        epsilon=merged["epsilon"],
        alpha=alpha,
        p=1.0,
        p_prime=2.0,
    )


def _cmd_sweep(merged: dict) -> int:
    grid = _grid(merged)
    base = _base_params(merged, grid[0][0], grid[0][1])
    points = optimizer.sweep(
        grid,
        base,
        variant=merged["variant"],
        cap_db=merged["cap_db"],
        floor_db=merged["floor_db"],
        rel_tol=merged["rel_tol"],
        workers=merged["workers"],
    )
    return _emit_points(points, merged)


def _cmd_aloha(merged: dict) -> int:
    grid = _grid(merged)
    points = []
    for ka, alpha in grid:
        base = _base_params(merged, ka, alpha)
        try:
            cfg = aloha_mod.choose_v(ka, merged["epsilon"], merged["t_fold"], merged["n"])
        except aloha_mod.BudgetUnattainableError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        points.append(
            aloha_mod.aloha_min_ebn0(
                base,
                cfg,
                cap_db=merged["cap_db"],
                floor_db=merged["floor_db"],
                rel_tol=merged["rel_tol"],
            )
        )
    return _emit_points(points, merged)


def _cmd_simulate(merged: dict) -> int:
    _require(merged, "p", "p_prime")
    delays = parse_delays(merged["delays"], merged["ka_sim"])
    config = montecarlo.SimConfig(
        n_sim=merged["n_sim"],
        m_sim=merged["m_sim"],
        ka_sim=merged["ka_sim"],
        p=merged["p"],
        p_prime=merged["p_prime"],
        delays=delays,
        trials=merged["trials"],
        seed=merged["seed"],
        noise_std=merged["noise_std"],
    )
    estimate = montecarlo.simulate_pupe(config, workers=merged["workers"])
    params = SystemParams(
        n=config.n_sim,
        log_m=math.log(config.m_sim),
        ka=config.ka_sim,
        epsilon=0.5,  # unused by the bound; placeholder inside (0,1)
        alpha=(delays.delays[-1] + 0.5) / config.n_sim if delays.delays[-1] else 0.0,
        p=config.p,
        p_prime=config.p_prime,
    )
    report = bounds.theorem1_bound(params, delays, bounds.MODE_POWER_OF_M)
    print(f"empirical  mean={estimate.mean!r} stderr={estimate.stderr!r} trials={estimate.trials}")
    print(
        f"           collision={estimate.collision_rate!r} "
        f"power={estimate.power_rate!r} missed={estimate.missed_rate!r}"
    )
    print(f"analytic   {report.serialize()}")
    if merged["output"] is not None:
        with open(merged["output"], "w", encoding="utf-8", newline="\n") as fh:
            fh.write(montecarlo.PUPE_CSV_HEADER + ",bound\n")
            fh.write(estimate.csv_row() + "," + repr(report.clamped) + "\n")
    if not report.valid:
        return 2
    return 0


def _cmd_check(merged: dict) -> int:
    failures = selfcheck.run_all(seed=merged["seed"])
    return 3 if failures else 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        merged = _merged_for(args)
        merged["details"] = getattr(args, "details", False)
        handler = {
            "eval": _cmd_eval,
            "sweep": _cmd_sweep,
            "aloha": _cmd_aloha,
            "simulate": _cmd_simulate,
            "check": _cmd_check,
        }[args.subcommand]
        return handler(merged)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
