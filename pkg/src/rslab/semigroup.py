"""Finite-state symmetric Markov generators and their Dirichlet forms.

A semigroup here is the family T_t = exp(tL) generated by a symmetric rate
matrix L (nonnegative off-diagonal, zero row sums) together with a strictly
positive stationary distribution pi.  Functions on the n-fold product space
are stored as dense vectors indexed lexicographically by tuples
(x_1, ..., x_n) with x_1 most significant.

The product generator acts coordinate-wise: L_prod f = sum_k L f(x^{not k}, .),
and the carre du champ / Dirichlet form pair is

    Gamma(f, g)(x) = 1/2 sum_y L[x, y] (f(y) - f(x)) (g(y) - g(x))
    E(f, g)        = <Gamma(f, g)>_pi = -<L f, g>_pi .
"""

from dataclasses import dataclass
from functools import reduce

import numpy as np

# dense product-space vectors are capped at this many entries
ENUMERATION_BUDGET = 1 << 20

STRUCT_TOL = 1e-12
IDENTITY_TOL = 1e-10


class SemigroupError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Semigroup:
    """Validated symmetric generator plus stationary distribution."""

    generator: np.ndarray
    stationary: np.ndarray

    @property
    def nstates(self) -> int:
        return self.generator.shape[0]


@dataclass(frozen=True, eq=False)
class NonnegFunction:
    """Nonnegative function on X^n, dense, lexicographic indexing."""

    values: np.ndarray
    base: int
    n: int

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if self.n < 1:
            raise SemigroupError("dimension n must be >= 1")
        size = self.base ** self.n
        if size > ENUMERATION_BUDGET:
            raise SemigroupError(
                f"|X|^n = {size} exceeds enumeration budget {ENUMERATION_BUDGET}")
        if v.shape != (size,):
            raise SemigroupError(f"expected vector of length {size}, got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise SemigroupError("function values must be finite")
        if np.any(v < 0):
            raise SemigroupError("function values must be nonnegative")
        if not np.any(v > 0):
            raise SemigroupError("function must not be identically zero")


def as_function(values, base: int) -> NonnegFunction:
    """Wrap a raw vector over X^n, inferring n from its length."""
    v = np.asarray(values, dtype=float)
    n = 1
    size = base
    while size < v.size:
        size *= base
        n += 1
    return NonnegFunction(v, base, n)


def validate_semigroup(L, pi=None) -> Semigroup:
    """Check generator structure and (if needed) solve for the stationary law.

    L must be symmetric with nonnegative off-diagonal entries and zero row
    sums.  When pi is omitted the uniform distribution is used (it is always
    stationary for a symmetric generator) after verification.
    """
    L = np.asarray(L, dtype=float)
    if L.ndim != 2 or L.shape[0] != L.shape[1]:
        raise SemigroupError("generator must be a square matrix")
    m = L.shape[0]
    if m < 2:
        raise SemigroupError("alphabet size must be >= 2")
    if not np.all(np.isfinite(L)):
        raise SemigroupError("generator entries must be finite")
    if np.max(np.abs(L - L.T)) > STRUCT_TOL:
        raise SemigroupError("generator must be symmetric")
    off = L - np.diag(np.diag(L))
    if np.min(off) < -STRUCT_TOL:
        raise SemigroupError("off-diagonal entries must be nonnegative")
    rowsum = L.sum(axis=1)
    if np.max(np.abs(rowsum)) > STRUCT_TOL * max(1.0, np.max(np.abs(L))):
        raise SemigroupError("row sums must vanish")

    if pi is None:
        pi = np.full(m, 1.0 / m)
    else:
        pi = np.asarray(pi, dtype=float)
        if pi.shape != (m,):
            raise SemigroupError("stationary vector has wrong length")
    if np.any(pi <= 0):
        raise SemigroupError("stationary distribution must be strictly positive")
    if abs(pi.sum() - 1.0) > STRUCT_TOL * m:
        raise SemigroupError("stationary distribution must sum to 1")
    if np.max(np.abs(pi @ L)) > IDENTITY_TOL:
        raise SemigroupError("pi^T L = 0 violated")
    return Semigroup(L, pi)


def binary_semigroup() -> Semigroup:
    """Two-point chain with rate 1/2 flips and uniform stationary law."""
    L = np.array([[-0.5, 0.5], [0.5, -0.5]])
    return validate_semigroup(L)


def load_generator(path):
    """Read a generator matrix from a whitespace-separated text file."""
    M = np.loadtxt(path, dtype=float, ndmin=2)
    return M


def _expm(S: Semigroup, t: float) -> np.ndarray:
    # symmetric eigendecomposition; valid for any real t (internal use)
    w, U = np.linalg.eigh(S.generator)
    return (U * np.exp(t * w)) @ U.T


def heat_operator(S: Semigroup, t: float) -> np.ndarray:
    """exp(tL) for t >= 0, row-stochastic up to 1e-10."""
    if t < 0:
        raise SemigroupError("heat operator requires t >= 0")
    return _expm(S, t)


def pi_product(S: Semigroup, n: int) -> np.ndarray:
    """Product stationary distribution pi^n over X^n (lexicographic)."""
    if S.nstates ** n > ENUMERATION_BUDGET:
        raise SemigroupError("product space exceeds enumeration budget")
    return reduce(np.kron, [S.stationary] * n)


def sequence_digits(m: int, n: int) -> np.ndarray:
    """(m^n, n) array: digits of every index in base m, x_1 most significant."""
    if m ** n > ENUMERATION_BUDGET:
        raise SemigroupError("product space exceeds enumeration budget")
    idx = np.arange(m ** n)
    out = np.empty((m ** n, n), dtype=np.int64)
    for k in range(n - 1, -1, -1):
        idx, out[:, k] = np.divmod(idx, m)
    return out


def _check_pair(S, f: NonnegFunction, g: NonnegFunction):
    if f.base != S.nstates or g.base != S.nstates:
        raise SemigroupError("function alphabet does not match semigroup")
    if f.n != g.n:
        raise SemigroupError("dimension mismatch between f and g")
    if f.n * S.nstates ** f.n > ENUMERATION_BUDGET:
        raise SemigroupError("n * |X|^n exceeds enumeration budget")


def _axis_apply(M: np.ndarray, values: np.ndarray, m: int, n: int, k: int):
    # contract matrix M against coordinate k of a dense tensor
    F = values.reshape((m,) * n)
    F = np.moveaxis(F, k, -1)
    out = F @ M.T
    return np.moveaxis(out, -1, k).reshape(-1)


def apply_generator(S: Semigroup, f: NonnegFunction) -> np.ndarray:
    """Product generator action (sum of per-coordinate L) as a raw vector."""
    m, n = S.nstates, f.n
    out = np.zeros_like(f.values)
    for k in range(n):
        out += _axis_apply(S.generator, f.values, m, n, k)
    return out


def carre_du_champ(S: Semigroup, f: NonnegFunction, g: NonnegFunction) -> np.ndarray:
    """Gamma(f, g) on X^n, summing the per-coordinate squared-field terms."""
    _check_pair(S, f, g)
    m, n = S.nstates, f.n
    L = S.generator
    F = f.values.reshape((m,) * n)
    G = g.values.reshape((m,) * n)
    out = np.zeros((m,) * n)
    for k in range(n):
        Fk = np.moveaxis(F, k, -1)
        Gk = np.moveaxis(G, k, -1)
        df = Fk[..., None, :] - Fk[..., :, None]   # (..., x, y) -> f(y) - f(x)
        dg = Gk[..., None, :] - Gk[..., :, None]
        gam = 0.5 * np.einsum("...xy,xy->...x", df * dg, L)
        out += np.moveaxis(gam, -1, k)
    return out.reshape(-1)


def dirichlet_form(S: Semigroup, f: NonnegFunction, g: NonnegFunction) -> float:
    """E(f, g) = <Gamma(f, g)>_{pi^n}."""
    gam = carre_du_champ(S, f, g)
    return float(pi_product(S, f.n) @ gam)


def dirichlet_form_raw(S: Semigroup, u: np.ndarray, v: np.ndarray, n: int) -> float:
    """Dirichlet form on raw vectors (u, v may take any real values)."""
    m = S.nstates
    L = S.generator
    pin = pi_product(S, n)
    U = u.reshape((m,) * n)
    V = v.reshape((m,) * n)
    total = 0.0
    for k in range(n):
        Uk = np.moveaxis(U, k, -1)
        Vk = np.moveaxis(V, k, -1)
        du = Uk[..., None, :] - Uk[..., :, None]
        dv = Vk[..., None, :] - Vk[..., :, None]
        gam = 0.5 * np.einsum("...xy,xy->...x", du * dv, L)
        total += pin @ np.moveaxis(gam, -1, k).reshape(-1)
    return float(total)


def normalized_dirichlet_form(S: Semigroup, f: NonnegFunction, q: float) -> float:
    """E(f, f^{q-1}) / <f^q>_{pi^n}.

    For q < 1 the power f^{q-1} needs strictly positive f; zeros are an error
    rather than silently regularized.
    """
    if q < 1 and np.any(f.values == 0):
        raise SemigroupError("q < 1 requires strictly positive f")
    fq1 = f.values ** (q - 1.0) if q != 1 else np.ones_like(f.values)
    pin = pi_product(S, f.n)
    denom = float(pin @ (f.values * fq1))
    if denom <= 0:
        raise SemigroupError("zero denominator <f^q>")
    num = dirichlet_form_raw(S, f.values, fq1, f.n)
    return num / denom


def product_heat_apply(S: Semigroup, t: float, values: np.ndarray, n: int) -> np.ndarray:
    """(T_t^{tensor n}) f as a raw vector; t may be negative (internal FD use)."""
    Tt = _expm(S, t)
    out = values
    for k in range(n):
        out = _axis_apply(Tt, out, S.nstates, n, k)
    return out


def derivative_check(S: Semigroup, f: NonnegFunction, q: float, h: float = 1e-4):
    """Central finite difference of phi(t) = -(1/n) ln ||T_t f||_q at t = 0
    against the analytic slope (1/n) E(f, f^{q-1}) / <f^q>.

    Returns the pair (finite_difference, analytic).  Agreement is O(h^2); the
    q-norm chain rule contributes a factor q that exactly cancels the 1/q in
    the norm, so no stray constant appears.
    """
    if not (0 < h <= 1e-4):
        raise SemigroupError("step h must satisfy 0 < h <= 1e-4")
    if q <= 1:
        raise SemigroupError("derivative check defined for q > 1")
    if np.any(f.values <= 0):
        raise SemigroupError("derivative check requires strictly positive f")
    n = f.n
    pin = pi_product(S, n)

    def phi(t):
        g = product_heat_apply(S, t, f.values, n)
        # ln ||g||_q = (1/q) ln sum pi g^q, g > 0 for |t| small
        return -(1.0 / n) * (1.0 / q) * np.log(float(pin @ g ** q))

    fd = (phi(h) - phi(-h)) / (2 * h)
    analytic = normalized_dirichlet_form(S, f, q) / n
    return fd, analytic
