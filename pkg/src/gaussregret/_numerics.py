"""Small numerical helpers shared across modules."""

from __future__ import annotations

import math

import numpy as np
from scipy.special import logsumexp

LOG_2PI = math.log(2.0 * math.pi)
SQRT_2PI = math.sqrt(2.0 * math.pi)
INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


class ConvergenceError(RuntimeError):
    """An iterative solver hit its iteration cap before meeting its tolerance."""


def derive_seed(master: int, *keys: int) -> int:
    """Sub-seed for (master, *keys).

    Counter scheme: ``SeedSequence(entropy=master, spawn_key=keys)``; the
    first 32-bit word of its state is the derived seed.
    """
    ss = np.random.SeedSequence(entropy=int(master), spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1)[0])


def rng_for(master: int, *keys: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=int(master), spawn_key=tuple(int(k) for k in keys)))


def log_mean_exp(values: np.ndarray) -> float:
    values = np.asarray(values, dtype=float)
    return float(logsumexp(values) - math.log(values.size))


def batch_sizes(samples: int, batches: int) -> list[int]:
    base, extra = divmod(samples, batches)
    return [base + (1 if b < extra else 0) for b in range(batches)]


def batch_means_se(means: np.ndarray, sizes: np.ndarray | None = None) -> tuple[float, float]:
    """Grand mean and batch-means standard error."""
    means = np.asarray(means, dtype=float)
    if sizes is None:
        sizes = np.ones_like(means)
    sizes = np.asarray(sizes, dtype=float)
    grand = float(np.sum(means * sizes) / np.sum(sizes))
    b = means.size
    if b < 2:
        return grand, float("nan")
    return grand, float(np.std(means, ddof=1) / math.sqrt(b))


def golden_section(f, lo, hi, tol: float = 1e-10, max_iter: int = 200):
    """Vectorized golden-section minimization of a unimodal ``f`` on [lo, hi].

    ``f`` maps an array of abscissae (same shape as ``lo``) to values.
    Returns (argmin, min value).
    """
    a = np.array(lo, dtype=float, copy=True)
    b = np.array(hi, dtype=float, copy=True)
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc = f(c)
    fd = f(d)
    for _ in range(max_iter):
        if np.all(np.abs(b - a) <= tol * (1.0 + np.abs(a) + np.abs(b))):
            break
        left = fc < fd
        # keep [a, d] where f(c) < f(d), else [c, b]
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        new_c = b - INV_PHI * (b - a)
        new_d = a + INV_PHI * (b - a)
        fd_next = np.where(left, fc, f(new_d))
        fc_next = np.where(left, f(new_c), fd)
        c, d, fc, fd = new_c, new_d, fc_next, fd_next
    x = np.where(fc < fd, c, d)
    fx = np.minimum(fc, fd)
    # endpoints can win for monotone objectives
    fa, fb = f(a), f(b)
    x = np.where(fa < fx, a, x)
    fx = np.minimum(fa, fx)
    x = np.where(fb < fx, b, x)
    fx = np.minimum(fb, fx)
    return x, fx
