"""Command-line front end.

Exit codes: 0 success, 1 configuration or output error, 2 verification failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import _kernels
from .config import build_env, build_schedule, dump, load, normalize
from .core import ConfigError
from .env import FiniteRealizableEnv, stream_rng
from .schedule import satisfies_doubling_cap, satisfies_growth_floor

log = logging.getLogger("falconcb")


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="falconcb", description="FALCON contextual-bandit simulator")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="YAML run configuration")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--horizon", type=int)
        sp.add_argument("--algo", choices=["falcon", "falcon_plus", "epsilon_greedy", "uniform"])
        sp.add_argument("--out")

    sp = sub.add_parser("run", help="single run; writes the per-round CSV")
    common(sp)
    sp.add_argument("--plot", help="also write an SVG regret plot here")

    sp = sub.add_parser("replicate", help="independent runs over several seeds; writes a JSON summary")
    common(sp)
    sp.add_argument("--seeds", help="comma-separated seeds (default: config 'seeds' or 0..n-1)")
    sp.add_argument("--n-seeds", type=int, default=20)
    sp.add_argument("--workers", type=int)

    sp = sub.add_parser("verify", help="brute-force duality/IOP checks on an enumerable instance")
    common(sp)
    sp.add_argument("--n-mc", type=int, default=100_000, help="Monte-Carlo draws per epoch (0 to skip)")

    sp = sub.add_parser("schedule-info", help="epoch boundaries and oracle-call count")
    common(sp)
    sp.add_argument("--schedule", choices=["geometric", "known_horizon"])
    return p


def _effective(args) -> dict:
    raw = load(args.config) if args.config else {}
    if args.seed is not None:
        raw["seed"] = args.seed
    if args.horizon is not None:
        raw["horizon"] = args.horizon
    if args.algo is not None:
        raw.setdefault("algorithm", {})
        raw["algorithm"] = {**(raw["algorithm"] or {}), "name": args.algo}
    if getattr(args, "schedule", None):
        raw["schedule"] = {"kind": args.schedule}
    return raw


def _cmd_run(args) -> int:
    from .sim import run

    raw = _effective(args)
    if args.out:
        raw.setdefault("output", {})
        raw["output"] = {**(raw["output"] or {}), "csv": args.out}
    if args.plot:
        raw["output"] = {**(raw.get("output") or {}), "plot": args.plot}
    cfg = normalize(raw)
    result = run(cfg)
    out = cfg["output"]
    if out["csv"]:
        result.to_csv(out["csv"])
        Path(str(out["csv"]) + ".config.yaml").write_text(dump(result.config))
    if out["plot"]:
        from .plot import emit_plot

        emit_plot(result, out["plot"])
    bound = result.bound()
    print(
        f"T={result.horizon} final_regret={result.final_regret:g} oracle_calls={result.total_oracle_calls} "
        f"epochs={result.epochs_entered} bound={'n/a' if bound is None else f'{bound:.6g}'} backend={_kernels.BACKEND}"
    )
    return 0


def _cmd_replicate(args) -> int:
    from .sim import replicate, write_summary

    raw = _effective(args)
    if args.seeds:
        raw["seeds"] = [int(s) for s in args.seeds.split(",")]
    elif "seeds" not in raw:
        raw["seeds"] = list(range(args.n_seeds))
    if args.workers:
        raw["workers"] = args.workers
    if args.out:
        raw["output"] = {**(raw.get("output") or {}), "summary": args.out}
    cfg = normalize(raw)
    summary = replicate(cfg)
    if cfg["output"]["summary"]:
        write_summary(summary, cfg["output"]["summary"])
    else:
        print(json.dumps(summary, indent=2))
    print(
        f"seeds={len(summary['per_seed'])} mean={summary['mean']:g} p10={summary['p10']:g} "
        f"p90={summary['p90']:g} bound={summary['theoretical_bound']}",
        file=sys.stderr,
    )
    return 0


def _cmd_verify(args) -> int:
    from .sim import run
    from .verify import verify_epochs

    raw = _effective(args)
    raw.setdefault("algorithm", {"name": "falcon"})
    cfg = normalize(raw)
    env = build_env(cfg)
    if not isinstance(env, FiniteRealizableEnv):
        raise ConfigError("environment.kind", "verify needs a finite (enumerable) environment")
    result = run(cfg)
    report = verify_epochs(env, result, n_mc=args.n_mc, rng=stream_rng(cfg["seed"], 99))
    text = report.render()
    if args.out:
        Path(args.out).write_text(text + "\n")
    print(text)
    if not report.passed:
        print("verification failed:", ", ".join(c.name for c in report.failures), file=sys.stderr)
        return 2
    return 0


def _cmd_schedule_info(args) -> int:
    raw = _effective(args)
    cfg = normalize(raw)
    s = build_schedule(cfg)
    T = cfg["horizon"]
    b = s.boundaries(T)
    info = {
        "kind": cfg["schedule"]["kind"],
        "horizon": T,
        "boundaries": b,
        "epochs": len(b),
        "oracle_calls": len(b) - 1,
        "doubling_cap": satisfies_doubling_cap(s, T),
        "growth_floor": satisfies_growth_floor(s, T),
    }
    text = json.dumps(info, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n")
    print(text)
    return 0


_COMMANDS = {
    "run": _cmd_run,
    "replicate": _cmd_replicate,
    "verify": _cmd_verify,
    "schedule-info": _cmd_schedule_info,
}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"output error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
