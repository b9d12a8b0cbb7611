"""Hot numeric kernels, each with a numba path and a pure-numpy path.

The numba path is used when numba imports and ``FALCONCB_DISABLE_NUMBA`` is
unset (or ``0``).  Both paths perform the same floating-point operations in
the same order, so results are bit-identical whichever backend is active.
Sums over actions and samples are therefore sequential (``np.cumsum`` on the
numpy side) rather than numpy's pairwise reduction.
"""

from __future__ import annotations

import os

import numpy as np

try:
    import numba

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    _HAVE_NUMBA = False

_DISABLED = os.environ.get("FALCONCB_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes"}
USE_NUMBA = _HAVE_NUMBA and not _DISABLED
BACKEND = "numba" if USE_NUMBA else "numpy"


def _jit(fn):
    if not _HAVE_NUMBA:
        return fn
    return numba.njit(cache=True)(fn)


# ---------------------------------------------------------------------------
# inverse-gap-weighted action distribution


def _igw_probs_loop(preds, gamma):
    n, k = preds.shape
    probs = np.empty((n, k))
    greedy = np.empty(n, dtype=np.int64)
    for i in range(n):
        best = 0
        for a in range(1, k):
            if preds[i, a] > preds[i, best]:
                best = a
        greedy[i] = best
        top = preds[i, best]
        rest = 0.0
        for a in range(k):
            if a != best:
                p = 1.0 / (k + gamma * (top - preds[i, a]))
                probs[i, a] = p
                rest += p
        probs[i, best] = 1.0 - rest
    return probs, greedy


def _igw_probs_numpy(preds, gamma):
    n, k = preds.shape
    greedy = np.argmax(preds, axis=1)
    rows = np.arange(n)
    top = preds[rows, greedy]
    probs = 1.0 / (k + gamma * (top[:, None] - preds))
    rest = np.zeros(n)
    for a in range(k):
        mask = greedy != a
        rest = np.where(mask, rest + probs[:, a], rest)
    probs[rows, greedy] = 1.0 - rest
    return probs, greedy.astype(np.int64)


def _eps_greedy_probs_loop(preds, eps):
    n, k = preds.shape
    probs = np.empty((n, k))
    greedy = np.empty(n, dtype=np.int64)
    share = eps / k
    for i in range(n):
        best = 0
        for a in range(1, k):
            if preds[i, a] > preds[i, best]:
                best = a
        greedy[i] = best
        for a in range(k):
            probs[i, a] = share
        probs[i, best] = share + (1.0 - eps)
    return probs, greedy


def _eps_greedy_probs_numpy(preds, eps):
    n, k = preds.shape
    greedy = np.argmax(preds, axis=1)
    probs = np.full((n, k), eps / k)
    probs[np.arange(n), greedy] = eps / k + (1.0 - eps)
    return probs, greedy.astype(np.int64)


# ---------------------------------------------------------------------------
# inverse-CDF sampling over action-index order


def _sample_cdf_loop(probs, u):
    n, k = probs.shape
    out = np.empty(n, dtype=np.int64)
    for i in range(n):
        c = 0.0
        chosen = k - 1
        for a in range(k):
            c += probs[i, a]
            if u[i] < c:
                chosen = a
                break
        out[i] = chosen
    return out


def _sample_cdf_numpy(probs, u):
    n, k = probs.shape
    cdf = np.cumsum(probs, axis=1)
    hit = u[:, None] < cdf
    # rounding can leave cdf[-1] a hair below 1; fall through to the last action
    out = np.where(hit.any(axis=1), hit.argmax(axis=1), k - 1)
    return out.astype(np.int64)


# ---------------------------------------------------------------------------
# squared loss of every member of a finite class


def _class_losses_loop(tables, xs, acts, ys):
    n_f = tables.shape[0]
    n = xs.shape[0]
    out = np.empty(n_f)
    for j in range(n_f):
        s = 0.0
        for i in range(n):
            r = tables[j, xs[i], acts[i]] - ys[i]
            s += r * r
        out[j] = s
    return out


def _class_losses_numpy(tables, xs, acts, ys):
    n_f = tables.shape[0]
    if xs.shape[0] == 0:
        return np.zeros(n_f)
    resid = tables[:, xs, acts] - ys[None, :]
    return np.cumsum(resid * resid, axis=1)[:, -1].copy()


# ---------------------------------------------------------------------------
# policy enumeration: product measure and per-policy values


def _product_measure_loop(kernel, policies):
    n_pi, n_x = policies.shape
    out = np.empty(n_pi)
    for j in range(n_pi):
        q = 1.0
        for x in range(n_x):
            q *= kernel[x, policies[j, x]]
        out[j] = q
    return out


def _product_measure_numpy(kernel, policies):
    n_pi, n_x = policies.shape
    q = np.ones(n_pi)
    for x in range(n_x):
        q = q * kernel[x, policies[:, x]]
    return q


def _policy_values_loop(table, weights, policies):
    # sum_x weights[x] * table[x, pi(x)], accumulated in context order
    n_pi, n_x = policies.shape
    out = np.empty(n_pi)
    for j in range(n_pi):
        s = 0.0
        for x in range(n_x):
            s += weights[x] * table[x, policies[j, x]]
        out[j] = s
    return out


def _policy_values_numpy(table, weights, policies):
    n_pi, n_x = policies.shape
    s = np.zeros(n_pi)
    for x in range(n_x):
        s = s + weights[x] * table[x, policies[:, x]]
    return s


igw_probs_jit = _jit(_igw_probs_loop)
eps_greedy_probs_jit = _jit(_eps_greedy_probs_loop)
sample_cdf_jit = _jit(_sample_cdf_loop)
class_losses_jit = _jit(_class_losses_loop)
product_measure_jit = _jit(_product_measure_loop)
policy_values_jit = _jit(_policy_values_loop)

NUMPY_KERNELS = {
    "igw_probs": _igw_probs_numpy,
    "eps_greedy_probs": _eps_greedy_probs_numpy,
    "sample_cdf": _sample_cdf_numpy,
    "class_losses": _class_losses_numpy,
    "product_measure": _product_measure_numpy,
    "policy_values": _policy_values_numpy,
}
JIT_KERNELS = {
    "igw_probs": igw_probs_jit,
    "eps_greedy_probs": eps_greedy_probs_jit,
    "sample_cdf": sample_cdf_jit,
    "class_losses": class_losses_jit,
    "product_measure": product_measure_jit,
    "policy_values": policy_values_jit,
}
_ACTIVE = JIT_KERNELS if USE_NUMBA else NUMPY_KERNELS


def igw_probs(preds: np.ndarray, gamma: float) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise inverse-gap-weighted distributions for an ``(n, K)`` prediction block."""
    preds = np.ascontiguousarray(preds, dtype=np.float64)
    return _ACTIVE["igw_probs"](preds, float(gamma))


def eps_greedy_probs(preds: np.ndarray, eps: float) -> tuple[np.ndarray, np.ndarray]:
    preds = np.ascontiguousarray(preds, dtype=np.float64)
    return _ACTIVE["eps_greedy_probs"](preds, float(eps))


def sample_cdf(probs: np.ndarray, u: np.ndarray) -> np.ndarray:
    """First action whose running CDF exceeds ``u``, per row."""
    return _ACTIVE["sample_cdf"](
        np.ascontiguousarray(probs, dtype=np.float64), np.ascontiguousarray(u, dtype=np.float64)
    )


def class_losses(tables: np.ndarray, xs: np.ndarray, acts: np.ndarray, ys: np.ndarray) -> np.ndarray:
    return _ACTIVE["class_losses"](
        np.ascontiguousarray(tables, dtype=np.float64),
        np.ascontiguousarray(xs, dtype=np.int64),
        np.ascontiguousarray(acts, dtype=np.int64),
        np.ascontiguousarray(ys, dtype=np.float64),
    )


def product_measure(kernel: np.ndarray, policies: np.ndarray) -> np.ndarray:
    return _ACTIVE["product_measure"](
        np.ascontiguousarray(kernel, dtype=np.float64), np.ascontiguousarray(policies, dtype=np.int64)
    )


def policy_values(table: np.ndarray, weights: np.ndarray, policies: np.ndarray) -> np.ndarray:
    return _ACTIVE["policy_values"](
        np.ascontiguousarray(table, dtype=np.float64),
        np.ascontiguousarray(weights, dtype=np.float64),
        np.ascontiguousarray(policies, dtype=np.int64),
    )
