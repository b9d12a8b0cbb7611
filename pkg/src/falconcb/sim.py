"""Simulation runner: learner/environment interaction, regret and oracle-call
accounting, CSV and summary output."""

from __future__ import annotations

import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels
from .algo import epoch_transition
from .config import build_env, build_learner, build_oracle, build_schedule, normalize
from .core import InteractionLog
from .env import LEARNER, NATURE, stream_rng

log = logging.getLogger(__name__)

CSV_HEADER = "round,epoch,gamma,context,action,reward,inst_regret,cum_regret,oracle_calls"


def regret_bound(K: int, T: int, class_size: int, delta: float, tau1: int) -> float:
    """High-probability regret bound for FALCON with a doubling-capped schedule:
    ``608.5 sqrt(K T ln(|F| T / delta)) + sqrt(8 T ln(2 / delta)) + tau_1``."""
    return (
        608.5 * math.sqrt(K * T * math.log(class_size * T / delta))
        + math.sqrt(8.0 * T * math.log(2.0 / delta))
        + tau1
    )


@dataclass
class EpochRecord:
    epoch: int
    start: int  # last round of the previous epoch (tau_{m-1})
    stop: int  # last round played in this epoch
    gamma: float
    predictor: object
    n_fit: int
    oracle_called: bool


@dataclass
class RunResult:
    config: dict
    seed: int
    epoch: np.ndarray
    gamma: np.ndarray
    context: np.ndarray
    action: np.ndarray
    reward: np.ndarray
    inst_regret: np.ndarray
    cum_regret: np.ndarray
    oracle_calls: np.ndarray
    pseudo_regret: np.ndarray
    epochs: list[EpochRecord] = field(default_factory=list)
    clamp_events: int = 0
    wall_time: float = 0.0
    backend: str = _kernels.BACKEND

    @property
    def horizon(self) -> int:
        return len(self.reward)

    @property
    def final_regret(self) -> float:
        return float(self.cum_regret[-1]) if len(self.cum_regret) else 0.0

    @property
    def final_pseudo_regret(self) -> float:
        return float(np.cumsum(self.pseudo_regret)[-1]) if len(self.pseudo_regret) else 0.0

    @property
    def total_oracle_calls(self) -> int:
        return int(self.oracle_calls[-1]) if len(self.oracle_calls) else 0

    @property
    def epochs_entered(self) -> int:
        return len(self.epochs)

    def logged_rows(self, every: int = 1) -> np.ndarray:
        T = self.horizon
        idx = np.arange(every - 1, T, every)
        if T and (idx.size == 0 or idx[-1] != T - 1):
            idx = np.append(idx, T - 1)
        return idx

    def to_csv(self, path, every: int | None = None) -> None:
        every = every or self.config["output"]["log_every"]
        lines = [CSV_HEADER]
        for i in self.logged_rows(every).tolist():
            lines.append(
                f"{i + 1},{int(self.epoch[i])},{float(self.gamma[i])!r},{int(self.context[i])},"
                f"{int(self.action[i])},{float(self.reward[i])!r},{float(self.inst_regret[i])!r},"
                f"{float(self.cum_regret[i])!r},{int(self.oracle_calls[i])}"
            )
        Path(path).write_text("\n".join(lines) + "\n")

    def bound(self) -> float | None:
        return bound_for(self.config, self.horizon)


def bound_for(cfg: dict, T: int) -> float | None:
    """Theoretical bound for a normalised config, or ``None`` when it does not
    apply (infinite classes)."""
    env = cfg["environment"]
    if env["kind"] == "linear":
        return None
    if env["kind"] == "planted":
        K, size = env["n_actions"], env["class_size"]
    else:
        tables = env["tables"]
        size, K = len(tables), len(tables[0][0])
    tau1 = build_schedule(cfg).tau(1)
    return regret_bound(K, T, size, cfg["algorithm"]["delta"], tau1)


def run(config: dict, seed: int | None = None) -> RunResult:
    """Execute exactly ``horizon`` rounds of one configured learner."""
    cfg = normalize(config)
    if seed is not None:
        cfg["seed"] = seed
    seed = cfg["seed"]
    T = cfg["horizon"]
    env = build_env(cfg, seed)
    oracle = build_oracle(cfg, env)
    learner = build_learner(cfg, env)
    schedule = build_schedule(cfg)
    nature = stream_rng(seed, NATURE)
    lrng = stream_rng(seed, LEARNER)
    hist = InteractionLog(feature_dim=getattr(env, "dim", None))

    epoch = np.empty(T, dtype=np.int64)
    gamma = np.empty(T)
    context = np.empty(T, dtype=np.int64)
    action = np.empty(T, dtype=np.int64)
    reward = np.empty(T)
    inst = np.empty(T)
    pseudo = np.empty(T)
    calls = np.empty(T, dtype=np.int64)
    records: list[EpochRecord] = []
    n_calls = 0
    clamps = 0
    t0 = time.perf_counter()

    t, m = 0, 0
    while t < T:
        m += 1
        state = epoch_transition(learner, hist, oracle, schedule, m)
        n_calls += state.oracle_called
        stop = min(schedule.tau(m), T)
        n = stop - t
        block = env.sample_block(nature, n)
        ctx_in = block.features if block.features is not None else block.contexts
        preds = state.predictor.predict(ctx_in)
        if block.features is not None:
            clamps += state.predictor.count_clamps(ctx_in)
        probs, _ = learner.probabilities(preds)
        acts = _kernels.sample_cdf(probs, lrng.random(n))
        rows = np.arange(n)
        obs = block.rewards[rows, acts]
        sl = slice(t, stop)
        epoch[sl] = m
        gamma[sl] = state.gamma
        context[sl] = block.contexts
        action[sl] = acts
        reward[sl] = obs
        inst[sl] = block.rewards[rows, block.best] - obs
        pseudo[sl] = block.means[rows, block.best] - block.means[rows, acts]
        calls[sl] = n_calls
        feats = block.features[rows, acts] if block.features is not None else None
        hist.extend(block.contexts, acts, obs, features=feats)
        hist.close_epoch()
        records.append(EpochRecord(m, t, stop, state.gamma, state.predictor, state.n_fit, state.oracle_called))
        log.debug("epoch %d rounds %d..%d gamma=%.4g", m, t + 1, stop, state.gamma)
        t = stop

    result = RunResult(
        config=cfg,
        seed=seed,
        epoch=epoch,
        gamma=gamma,
        context=context,
        action=action,
        reward=reward,
        inst_regret=inst,
        cum_regret=np.cumsum(inst),
        oracle_calls=calls,
        pseudo_regret=pseudo,
        epochs=records,
        clamp_events=clamps,
        wall_time=time.perf_counter() - t0,
    )
    assert result.total_oracle_calls == result.epochs_entered - 1
    return result


def _final(args):
    cfg, seed = args
    r = run(cfg, seed)
    return seed, r.final_regret, r.final_pseudo_regret, r.total_oracle_calls


def replicate(config: dict, seeds=None, workers: int | None = None) -> dict:
    """Independent runs over ``seeds``; returns the summary document."""
    cfg = normalize(config)
    seeds = list(seeds if seeds is not None else cfg.get("seeds", [cfg["seed"]]))
    if not seeds:
        raise ValueError("replicate needs at least one seed")
    cfg["seeds"] = seeds
    workers = workers or cfg.get("workers", 1)
    jobs = [(cfg, s) for s in seeds]
    if workers > 1 and len(seeds) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_final, jobs))
    else:
        rows = [_final(j) for j in jobs]
    by_seed = {s: (reg, pseudo, calls) for s, reg, pseudo, calls in rows}
    finals = np.array([by_seed[s][0] for s in seeds])
    bound = bound_for(cfg, cfg["horizon"])
    return {
        "config": cfg,
        "per_seed": [
            {"seed": s, "final_regret": by_seed[s][0], "final_pseudo_regret": by_seed[s][1], "oracle_calls": by_seed[s][2]}
            for s in seeds
        ],
        "mean": float(finals.mean()),
        "p10": float(np.percentile(finals, 10)),
        "p90": float(np.percentile(finals, 90)),
        "theoretical_bound": bound,
        "bound_violations": None if bound is None else int(np.sum(finals > bound)),
    }


def write_summary(summary: dict, path) -> None:
    Path(path).write_text(json.dumps(summary, indent=2) + "\n")
