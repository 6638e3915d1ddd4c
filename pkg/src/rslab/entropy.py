"""Entropy functionals and Renyi divergences with all limit orders.

The two-parameter entropy of a nonnegative f is

    Ent_{p,q}(f) = (p q / (p - q)) ln(||f||_p / ||f||_q),   p != q,

with limits: p = q gives the normalized entropy Ent(f^q)/E[f^q]; either
parameter 0 gives -ln pi(f > 0); an infinite parameter s' with the other
finite equal to s gives s ln(||f||_inf / ||f||_s); both infinite gives
-ln pi(f = max f).  The divergence identity Ent_{p,q}(f) = D_{p/q}(Q || pi)
with Q = f^q pi / E[f^q] holds throughout and is exercised by the tests.

All sums run in log space where overflow is a risk.  Convention 0 ln 0 = 0.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

INF = float("inf")


class EntropyError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Distribution:
    """Probability weights over X^n together with the reference law."""

    weights: np.ndarray
    base: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        b = np.asarray(self.base, dtype=float)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "base", b)
        if w.shape != b.shape:
            raise EntropyError("weights and base must have equal length")
        if np.any(w < 0):
            raise EntropyError("weights must be nonnegative")
        if abs(w.sum() - 1.0) > 1e-12 * max(1, w.size):
            raise EntropyError("weights must sum to 1")


def _coerce(f):
    # accept NonnegFunction or raw arrays
    v = np.asarray(getattr(f, "values", f), dtype=float)
    if np.any(v < 0) or not np.any(v > 0):
        raise EntropyError("f must be nonnegative and not identically zero")
    return v


def ent(f, pi) -> float:
    """Ent(f) = E[f ln f] - E[f] ln E[f], with 0 ln 0 = 0."""
    v = _coerce(f)
    pi = np.asarray(pi, dtype=float)
    pos = v > 0
    mean_flnf = float(np.sum(pi[pos] * v[pos] * np.log(v[pos])))
    mean_f = float(pi @ v)
    return mean_flnf - mean_f * np.log(mean_f)


def _log_norm(v, pi, s: float) -> float:
    """ln ||v||_s for s > 0 finite."""
    pos = v > 0
    if not np.any(pos):
        return -INF
    return logsumexp(np.log(pi[pos]) + s * np.log(v[pos])) / s


def ent_pq(f, pi, p, q) -> float:
    """Two-parameter entropy with every limit case handled exactly."""
    v = _coerce(f)
    pi = np.asarray(pi, dtype=float)
    if p < 0 or q < 0:
        raise EntropyError("orders must lie in [0, inf]")

    if p == 0 or q == 0:
        return float(-np.log(np.sum(pi[v > 0])))
    if np.isinf(p) and np.isinf(q):
        fmax = v.max()
        return float(-np.log(np.sum(pi[v == fmax])))
    if np.isinf(p) or np.isinf(q):
        s = q if np.isinf(p) else p
        return float(s * (np.log(v.max()) - _log_norm(v, pi, s)))
    if p == q:
        # exact p -> q limit: Ent(f^q) / E[f^q], no numerical limit taken
        fq = v ** q
        mean = float(pi @ fq)
        return ent(fq, pi) / mean
    val = (p * q / (p - q)) * (_log_norm(v, pi, p) - _log_norm(v, pi, q))
    return float(val)


def density_from_function(f, pi, q: float) -> Distribution:
    """The tilted law Q = f^q pi / E[f^q] appearing in the divergence identity."""
    v = _coerce(f)
    pi = np.asarray(pi, dtype=float)
    if q <= 0 or np.isinf(q):
        raise EntropyError("tilting requires finite q > 0")
    pos = v > 0
    logw = np.full(v.shape, -INF)
    logw[pos] = np.log(pi[pos]) + q * np.log(v[pos])
    logw -= logsumexp(logw)
    return Distribution(np.exp(logw), pi)


def renyi_divergence(Q, pi, gamma) -> float:
    """D_gamma(Q || pi) for gamma in [0, inf].

    gamma = 1 is relative entropy, gamma = 0 is -ln pi(Q > 0), gamma = inf is
    ln max Q/pi over the support (the limit of the finite-order formula).
    Absolute-continuity failure with gamma > 1 returns +inf.
    """
    w = np.asarray(getattr(Q, "weights", Q), dtype=float)
    pi = np.asarray(pi, dtype=float)
    if gamma < 0:
        raise EntropyError("order must lie in [0, inf]")
    sup = w > 0
    if np.any(pi[sup] == 0):
        if gamma >= 1:
            return INF
        sup = sup & (pi > 0)           # gamma < 1 ignores pi-null mass
        if not np.any(sup):
            return INF
    if gamma == 0:
        with np.errstate(divide="ignore"):
            return float(-np.log(np.sum(pi[w > 0])))
    if gamma == 1:
        return float(np.sum(w[sup] * np.log(w[sup] / pi[sup])))
    if np.isinf(gamma):
        return float(np.log(np.max(w[sup] / pi[sup])))
    val = logsumexp(gamma * np.log(w[sup]) + (1.0 - gamma) * np.log(pi[sup]))
    return float(val / (gamma - 1.0))
