"""Brute-force checks of the kernel/policy-measure duality on enumerable instances.

Every check enumerates the full policy space ``Psi = A^X`` (at most about a
million policies) and returns a :class:`Report` rather than raising, so a
suite can collect all failures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .algo import action_distribution
from .core import ConfigError, FiniteFunctionClass, check_distribution, enumerate_policies, induced_policy
from .env import FiniteRealizableEnv

IOP_TOL = 1e-9
MARGINAL_TOL = 1e-12
REGRET_EST_C0 = 5.15


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class Report:
    checks: list[Check] = field(default_factory=list)

    def add(self, name: str, passed: bool, detail: str = "") -> None:
        self.checks.append(Check(name, bool(passed), detail))

    def extend(self, other: "Report") -> None:
        self.checks.extend(other.checks)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def render(self) -> str:
        lines = [f"[{'PASS' if c.passed else 'FAIL'}] {c.name}" + (f": {c.detail}" if c.detail else "") for c in self.checks]
        lines.append(f"{sum(c.passed for c in self.checks)}/{len(self.checks)} checks passed")
        return "\n".join(lines)


@dataclass(frozen=True)
class PolicyMeasure:
    policies: np.ndarray  # (K^|X|, |X|)
    q: np.ndarray  # (K^|X|,)


def kernel_table(predictor_table: np.ndarray, gamma: float) -> np.ndarray:
    """The selection kernel ``p(a|x)`` for every context, shape ``(|X|, K)``."""
    return np.stack([action_distribution(row, gamma).probs for row in np.asarray(predictor_table)])


def product_measure(kernel: np.ndarray) -> PolicyMeasure:
    """``Q(pi) = prod_x p(pi(x)|x)`` over all deterministic policies."""
    kernel = np.asarray(kernel, dtype=np.float64)
    n_x, K = kernel.shape
    policies = enumerate_policies(n_x, K)
    return PolicyMeasure(policies, _kernels.product_measure(kernel, policies))


def marginals(Q: PolicyMeasure, n_actions: int) -> np.ndarray:
    """``sum_pi 1{pi(x)=a} Q(pi)`` for every ``(x, a)``."""
    n_x = Q.policies.shape[1]
    out = np.zeros((n_x, n_actions))
    for x in range(n_x):
        out[x] = np.bincount(Q.policies[:, x], weights=Q.q, minlength=n_actions)
    return out


@dataclass(frozen=True)
class ImplicitQuantities:
    reward: np.ndarray  # R(pi) under f*
    predicted_reward: np.ndarray  # R_hat(pi) under f_hat
    regret: np.ndarray  # Reg(pi)
    predicted_regret: np.ndarray  # Reg_hat(pi)


def implicit_quantities(Q: PolicyMeasure, f_hat: np.ndarray, f_star: np.ndarray, d_x) -> ImplicitQuantities:
    """Exact implicit rewards and regrets of every enumerated policy.

    Policy values are accumulated in context order, which keeps
    ``R(pi_f) >= R(pi)`` exact in floating point, so both regrets are
    non-negative without clamping.
    """
    d = check_distribution(d_x)
    f_hat = np.asarray(f_hat, dtype=np.float64)
    f_star = np.asarray(f_star, dtype=np.float64)
    r = _kernels.policy_values(f_star, d, Q.policies)
    r_hat = _kernels.policy_values(f_hat, d, Q.policies)
    best = _kernels.policy_values(f_star, d, induced_policy(f_star)[None])[0]
    best_hat = _kernels.policy_values(f_hat, d, induced_policy(f_hat)[None])[0]
    return ImplicitQuantities(r, r_hat, best - r, best_hat - r_hat)


def inverse_prob_value(kernel: np.ndarray, d_x, policies: np.ndarray) -> np.ndarray:
    """``V(p, pi) = E_x[1 / p(pi(x)|x)]`` for every policy."""
    return _kernels.policy_values(1.0 / np.asarray(kernel, dtype=np.float64), np.asarray(d_x, dtype=np.float64), policies)


def check_marginals(Q: PolicyMeasure, kernel: np.ndarray, tol: float = MARGINAL_TOL) -> Report:
    rep = Report()
    err = float(np.max(np.abs(marginals(Q, kernel.shape[1]) - kernel)))
    rep.add("marginalization (kernel = policy-measure marginals)", err <= tol, f"max error {err:.3g}")
    rep.add("policy measure is a distribution", bool(np.all(Q.q >= 0)) and abs(math.fsum(Q.q) - 1.0) <= tol)
    return rep


def check_iop(Q: PolicyMeasure, gamma: float, kernel: np.ndarray, quantities: ImplicitQuantities, d_x, tol: float = IOP_TOL) -> Report:
    """Both implicit-optimization constraints:

    * exploitation: ``sum_pi Q(pi) Reg_hat(pi) <= K / gamma``
    * exploration: ``V(p, pi) <= K + gamma Reg_hat(pi)`` for every policy
    """
    rep = Report()
    K = kernel.shape[1]
    exploit = math.fsum(Q.q * quantities.predicted_regret)
    rep.add("exploitation constraint", exploit <= K / gamma + tol, f"{exploit:.6g} <= {K / gamma:.6g}")
    v = inverse_prob_value(kernel, d_x, Q.policies)
    slack = K + gamma * quantities.predicted_regret - v
    worst = int(np.argmin(slack))
    rep.add(
        "exploration constraint (all policies)",
        bool(slack[worst] >= -tol),
        f"min slack {slack[worst]:.3g} over {len(slack)} policies",
    )
    return rep


def exact_expected_regret(kernel: np.ndarray, f_star: np.ndarray, d_x) -> float:
    """``E_x sum_a p(a|x) (f*(x, pi*(x)) - f*(x, a))`` computed directly per context."""
    f_star = np.asarray(f_star)
    top = f_star.max(axis=1, keepdims=True)
    return float(np.dot(np.asarray(d_x), np.sum(kernel * (top - f_star), axis=1)))


def mc_expected_regret(env: FiniteRealizableEnv, kernel: np.ndarray, n: int, rng: np.random.Generator) -> tuple[float, float]:
    """Monte-Carlo mean and standard error of ``r(pi*(x)) - r(a)`` with ``a ~ p(.|x)``."""
    block = env.sample_block(rng, n)
    acts = _kernels.sample_cdf(kernel[block.contexts], rng.random(n))
    rows = np.arange(n)
    z = block.rewards[rows, block.best] - block.rewards[rows, acts]
    return float(z.mean()), float(z.std(ddof=1) / math.sqrt(n))


def check_equi(Q: PolicyMeasure, env: FiniteRealizableEnv, kernel: np.ndarray, n_mc: int, rng: np.random.Generator, z: float = 4.0) -> Report:
    """Expected instantaneous regret under the kernel equals ``sum_pi Q(pi) Reg(pi)``."""
    rep = Report()
    f_star = env.f_star.table
    q = implicit_quantities(Q, f_star, f_star, env.d_x)
    exact = math.fsum(Q.q * q.regret)
    direct = exact_expected_regret(kernel, f_star, env.d_x)
    mean, se = mc_expected_regret(env, kernel, n_mc, rng)
    rep.add("policy-measure regret = per-context regret", abs(exact - direct) <= 1e-12, f"{exact:.12g} vs {direct:.12g}")
    band = z * se
    rep.add(
        "policy-measure regret = Monte-Carlo regret",
        abs(mean - exact) <= band or (se == 0.0 and abs(mean - exact) <= 1e-12),
        f"exact {exact:.6g}, MC {mean:.6g} +/- {band:.3g}",
    )
    return rep


def check_regret_estimates(quantities: ImplicitQuantities, K: int, gamma: float, c0: float = REGRET_EST_C0) -> Report:
    """``Reg <= 2 Reg_hat + c0 K/gamma`` and ``Reg_hat <= 2 Reg + c0 K/gamma`` for all
    policies.  These hold only on a high-probability event, so callers should
    tally failures rather than treat one as fatal."""
    rep = Report()
    slack = c0 * K / gamma
    a = quantities.regret - (2 * quantities.predicted_regret + slack)
    b = quantities.predicted_regret - (2 * quantities.regret + slack)
    rep.add("true regret <= 2 x predicted + c0 K/gamma", bool(np.all(a <= IOP_TOL)), f"max excess {a.max():.3g}")
    rep.add("predicted regret <= 2 x true + c0 K/gamma", bool(np.all(b <= IOP_TOL)), f"max excess {b.max():.3g}")
    return rep


def random_enumerable_instance(rng: np.random.Generator, max_contexts: int = 3, max_actions: int = 4, class_size: int = 6) -> FiniteRealizableEnv:
    """Fuzz instance: random size, Dirichlet context weights, uniform random class."""
    n_x = int(rng.integers(1, max_contexts + 1))
    K = int(rng.integers(2, max_actions + 1))
    d_x = rng.dirichlet(np.ones(n_x))
    d_x = d_x / math.fsum(d_x)
    tables = rng.random((class_size, n_x, K))
    return FiniteRealizableEnv(d_x, FiniteFunctionClass(tables), int(rng.integers(class_size)))


def verify_epochs(env: FiniteRealizableEnv, result, n_mc: int = 0, rng: np.random.Generator | None = None) -> Report:
    """Run the duality, IOP and (optionally) Monte-Carlo checks for every epoch
    of a finished run on an enumerable instance."""
    if env.n_contexts * math.log2(env.n_actions) > 20:
        raise ConfigError("environment", "verification needs |X| log2 K <= 20")
    rep = Report()
    f_star = env.f_star.table
    for ep in result.epochs:
        f_hat = ep.predictor.table
        kern = kernel_table(f_hat, ep.gamma)
        Q = product_measure(kern)
        quant = implicit_quantities(Q, f_hat, f_star, env.d_x)
        for part in (check_marginals(Q, kern), check_iop(Q, ep.gamma, kern, quant, env.d_x)):
            for c in part.checks:
                rep.add(f"epoch {ep.epoch}: {c.name}", c.passed, c.detail)
        if n_mc:
            for c in check_equi(Q, env, kern, n_mc, rng).checks:
                rep.add(f"epoch {ep.epoch}: {c.name}", c.passed, c.detail)
    return rep


def regret_estimate_failures(env: FiniteRealizableEnv, result) -> list[int]:
    """Epochs (m >= 2) where the regret-estimate relation fails for some policy."""
    f_star = env.f_star.table
    bad = []
    for ep in result.epochs:
        if ep.epoch < 2:
            continue
        f_hat = ep.predictor.table
        Q = product_measure(kernel_table(f_hat, ep.gamma))
        quant = implicit_quantities(Q, f_hat, f_star, env.d_x)
        if not check_regret_estimates(quant, env.n_actions, ep.gamma).passed:
            bad.append(ep.epoch)
    return bad
