"""Run configuration: YAML loading, validation with defaults, and object builders.

A config is a nested mapping; the grammar is documented in the README.  The
normalised form returned by :func:`normalize` is what gets echoed into every
output, and feeding it back reproduces the run exactly.
"""

from __future__ import annotations

import copy
from pathlib import Path

import yaml

from .algo import ALGORITHMS, Learner
from .core import ConfigError, FiniteFunctionClass
from .env import INSTANCE, FiniteRealizableEnv, LinearRealizableEnv, make_linear_instance, make_planted_instance, stream_rng
from .oracle import FiniteClassOracle, LinearOracle, constant_xi, xi_finite_class, xi_linear_class
from .schedule import custom_schedule, geometric_schedule, known_horizon_schedule, satisfies_growth_floor

SCHEDULES = ("geometric", "known_horizon", "custom")
ENVIRONMENTS = ("planted", "finite", "linear")


def load(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError("config", f"not valid YAML: {exc}") from exc
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("config", "top level must be a mapping")
    return data


def dump(cfg: dict) -> str:
    return yaml.safe_dump(cfg, sort_keys=False)


def _section(cfg, name):
    sec = cfg.get(name)
    if sec is None:
        return {}
    if not isinstance(sec, dict):
        raise ConfigError(name, "must be a mapping")
    return dict(sec)


def _int(value, field, lo=None, hi=None):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(field, f"must be an integer, got {value!r}")
    if lo is not None and value < lo:
        raise ConfigError(field, f"must be >= {lo}, got {value}")
    if hi is not None and value > hi:
        raise ConfigError(field, f"must be <= {hi}, got {value}")
    return value


def _float(value, field):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(field, f"must be a number, got {value!r}")
    return float(value)


def normalize(raw: dict) -> dict:
    """Validate ``raw`` and fill defaults; raises :class:`ConfigError` naming the field."""
    raw = copy.deepcopy(raw)
    cfg: dict = {}
    if raw.get("horizon") is None:
        raise ConfigError("horizon", "is required (number of rounds T)")
    cfg["horizon"] = _int(raw["horizon"], "horizon", lo=1)
    cfg["seed"] = _int(raw.get("seed", 0), "seed", lo=0, hi=2**64 - 1)

    alg = _section(raw, "algorithm")
    name = alg.get("name", "falcon")
    if name not in ALGORITHMS:
        raise ConfigError("algorithm.name", f"unknown algorithm {name!r}; choose from {ALGORITHMS}")
    delta = _float(alg.get("delta", 0.05), "algorithm.delta")
    if not 0.0 < delta < 1.0:
        raise ConfigError("algorithm.delta", f"must lie in (0, 1), got {delta}")
    eps = _float(alg.get("epsilon", 0.1), "algorithm.epsilon")
    if not 0.0 <= eps <= 1.0:
        raise ConfigError("algorithm.epsilon", f"must lie in [0, 1], got {eps}")

    env = _section(raw, "environment")
    kind = env.get("kind", "planted")
    if kind not in ENVIRONMENTS:
        raise ConfigError("environment.kind", f"unknown environment {kind!r}; choose from {ENVIRONMENTS}")
    if kind == "planted":
        env_cfg = {
            "kind": "planted",
            "n_contexts": _int(env.get("n_contexts", 20), "environment.n_contexts", lo=1),
            "n_actions": _int(env.get("n_actions", 5), "environment.n_actions", lo=2),
            "class_size": _int(env.get("class_size", 50), "environment.class_size", lo=4),
            "gap": _float(env.get("gap", 0.2), "environment.gap"),
            "instance_seed": env.get("instance_seed"),
        }
        if not 0.0 < env_cfg["gap"] <= 0.5:
            raise ConfigError("environment.gap", f"must lie in (0, 0.5], got {env_cfg['gap']}")
    elif kind == "finite":
        for key in ("context_distribution", "tables", "star"):
            if key not in env:
                raise ConfigError(f"environment.{key}", "is required for a finite environment")
        env_cfg = {
            "kind": "finite",
            "context_distribution": [float(v) for v in env["context_distribution"]],
            "tables": env["tables"],
            "star": _int(env["star"], "environment.star", lo=0),
        }
    else:
        env_cfg = {
            "kind": "linear",
            "dimension": _int(env.get("dimension", 5), "environment.dimension", lo=2),
            "n_actions": _int(env.get("n_actions", 4), "environment.n_actions", lo=2),
            "theta": env.get("theta"),
            "instance_seed": env.get("instance_seed"),
            "ridge": _float(env.get("ridge", 1e-8), "environment.ridge"),
        }
        if env_cfg["ridge"] < 0:
            raise ConfigError("environment.ridge", "must be non-negative")
    if env_cfg.get("instance_seed") is not None:
        _int(env_cfg["instance_seed"], "environment.instance_seed", lo=0, hi=2**64 - 1)
    cfg["environment"] = env_cfg

    if name == "falcon" and kind == "linear":
        raise ConfigError("algorithm.name", "falcon needs a finite function class; use falcon_plus for linear environments")
    alg_cfg = {"name": name, "delta": delta}
    if name == "epsilon_greedy":
        alg_cfg["epsilon"] = eps
    if name == "falcon_plus":
        xi = alg.get("xi") or {}
        if not isinstance(xi, dict):
            raise ConfigError("algorithm.xi", "must be a mapping")
        form = xi.get("form", "linear" if kind == "linear" else "finite")
        if form == "constant":
            alg_cfg["xi"] = {"form": "constant", "value": _float(xi.get("value", 1.0), "algorithm.xi.value")}
        elif form in ("finite", "linear"):
            if form == "finite" and kind == "linear":
                raise ConfigError("algorithm.xi.form", "the finite-class curve needs a finite environment")
            default_c = 16.0 if form == "finite" else 8.0
            alg_cfg["xi"] = {"form": form, "C": _float(xi.get("C", default_c), "algorithm.xi.C")}
            if alg_cfg["xi"]["C"] <= 0:
                raise ConfigError("algorithm.xi.C", "must be positive")
        else:
            raise ConfigError("algorithm.xi.form", f"unknown form {form!r}")
    cfg["algorithm"] = alg_cfg

    sch = _section(raw, "schedule")
    skind = sch.get("kind", "geometric")
    if skind not in SCHEDULES:
        raise ConfigError("schedule.kind", f"unknown schedule {skind!r}; choose from {SCHEDULES}")
    sch_cfg = {"kind": skind}
    if skind == "custom":
        bounds = sch.get("boundaries")
        if not bounds:
            raise ConfigError("schedule.boundaries", "a custom schedule needs an explicit list of boundaries")
        sch_cfg["boundaries"] = [_int(b, "schedule.boundaries", lo=1) for b in bounds]
    cfg["schedule"] = sch_cfg

    out = _section(raw, "output")
    cfg["output"] = {
        "csv": out.get("csv"),
        "summary": out.get("summary"),
        "plot": out.get("plot"),
        "log_every": _int(out.get("log_every", 1), "output.log_every", lo=1),
    }
    if "seeds" in raw:
        seeds = raw["seeds"]
        if not isinstance(seeds, list) or not seeds:
            raise ConfigError("seeds", "must be a non-empty list of integers")
        cfg["seeds"] = [_int(s, "seeds", lo=0, hi=2**64 - 1) for s in seeds]
    if "workers" in raw:
        cfg["workers"] = _int(raw["workers"], "workers", lo=1)

    # cross-checks that need built objects
    schedule = build_schedule(cfg)
    if name == "falcon_plus" and not satisfies_growth_floor(schedule, cfg["horizon"]):
        raise ConfigError("schedule", "falcon_plus requires tau_m >= 2^m for every epoch")
    return cfg


def build_schedule(cfg: dict):
    sch = cfg["schedule"]
    T = cfg["horizon"]
    if sch["kind"] == "geometric":
        return geometric_schedule()
    if sch["kind"] == "known_horizon":
        if T < 2:
            raise ConfigError("horizon", "the known-horizon schedule needs T >= 2")
        return known_horizon_schedule(T)
    try:
        s = custom_schedule(sch["boundaries"])
    except ValueError as exc:
        raise ConfigError("schedule.boundaries", str(exc)) from exc
    if s.tau(len(sch["boundaries"])) < T:
        raise ConfigError("schedule.boundaries", f"last boundary must be >= horizon {T}")
    return s


def build_env(cfg: dict, seed: int | None = None):
    env = cfg["environment"]
    seed = cfg["seed"] if seed is None else seed
    inst_seed = env.get("instance_seed")
    rng = stream_rng(seed if inst_seed is None else inst_seed, INSTANCE)
    if env["kind"] == "planted":
        return make_planted_instance(env["n_contexts"], env["n_actions"], env["class_size"], env["gap"], rng)
    if env["kind"] == "finite":
        return FiniteRealizableEnv(env["context_distribution"], FiniteFunctionClass(env["tables"]), env["star"])
    if env["theta"] is not None:
        return LinearRealizableEnv(env["theta"], env["n_actions"])
    return make_linear_instance(env["dimension"], env["n_actions"], rng)


def build_oracle(cfg: dict, env):
    if isinstance(env, LinearRealizableEnv):
        return LinearOracle(env.dim, cfg["environment"].get("ridge", 1e-8))
    return FiniteClassOracle(env.fclass)


def build_xi(cfg: dict, env):
    xi = cfg["algorithm"].get("xi")
    if xi is None:
        return None
    if xi["form"] == "constant":
        return constant_xi(xi["value"])
    if xi["form"] == "finite":
        return xi_finite_class(env.class_size, xi["C"])
    return xi_linear_class(env.dim, xi["C"])


def build_learner(cfg: dict, env) -> Learner:
    alg = cfg["algorithm"]
    return Learner(
        algorithm=alg["name"],
        n_actions=env.n_actions,
        delta=alg["delta"],
        class_size=getattr(env, "class_size", None),
        xi=build_xi(cfg, env),
        epsilon=alg.get("epsilon", 0.1),
    )
