"""Entropy-constrained Dirichlet minimization: the log-Sobolev curve family.

The central object is

    xi_q(alpha) = inf { (1/(q-1)) E(D^{1/q}, D^{1/q'}) :
                        D = Q/pi, Q a distribution, KL(Q || pi) >= alpha }

over a single-letter alphabet, together with its limit objectives

    q = 1:  E(D, ln D)            subject to  KL(Q || pi) >= alpha
    q = 0:  -E(D, 1/D)            subject to  Var_pi(ln D)/2 >= alpha

and the n-letter two-parameter version

    xi_pq_n(alpha) = inf { (1/((q-1) n)) E_n(D^{1/q}, D^{1/q'}) :
                           (1/n) D_{p/q}(Q || pi^n) >= alpha }.

Reported values are best-found upper bounds on the infimum: a dense simplex
grid restricted to feasible points is polished by Nelder-Mead restarts, with
extra starts obtained by bisecting rays from pi toward the simplex corners to
the constraint boundary (convexity of the divergence in Q makes each ray cross
it exactly once).

The two-point chain admits a closed form (binary_xi_q) used as an oracle, in
terms of y(alpha) = h^{-1}(ln 2 - alpha) on [0, 1/2]:

    q not in {0, 1}: (1 - y^{1/q}(1-y)^{1/q'} - y^{1/q'}(1-y)^{1/q}) / (2(q-1))
    q = 1:           (1/2 - y) ln((1-y)/y)
    q = 0:           (e^{2 sqrt(2 alpha)} + e^{-2 sqrt(2 alpha)})/4 - 1/2

The module also builds the finite-n extremal functions whose entropy and
Dirichlet rates exhibit the p <= q / p > q transition: products of typical-set
conditioned densities and mixtures with a point mass at a least-likely string.
"""

import math
from dataclasses import dataclass, field
from functools import reduce

import numpy as np
from scipy.optimize import minimize
from scipy.special import logsumexp

from .entropy import renyi_divergence
from .semigroup import (
    ENUMERATION_BUDGET,
    NonnegFunction,
    Semigroup,
    pi_product,
    sequence_digits,
)

INF = float("inf")
LN2 = math.log(2.0)


class SobolevError(ValueError):
    pass


# ---------------------------------------------------------------------------
# binary closed form


def hfun(y):
    """Binary entropy (natural log) with h(0) = h(1) = 0."""
    y = float(y)
    if y <= 0.0 or y >= 1.0:
        return 0.0
    return -y * math.log(y) - (1.0 - y) * math.log1p(-y)


def hinv(v):
    """Inverse of the binary entropy restricted to [0, 1/2], by bisection."""
    if not (-1e-15 <= v <= LN2 + 1e-15):
        raise SobolevError(f"h^-1 argument {v} outside [0, ln 2]")
    v = min(max(v, 0.0), LN2)
    lo, hi = 0.0, 0.5
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if hfun(mid) < v:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def binary_xi_q(q, alpha):
    """Two-point chain log-Sobolev curve, exact closed form."""
    if q < 0:
        raise SobolevError("order q must be nonnegative")
    if not (-1e-15 <= alpha <= LN2 + 1e-15):
        raise SobolevError(f"alpha {alpha} outside [0, ln 2]")
    alpha = min(max(alpha, 0.0), LN2)
    if alpha == 0.0:
        return 0.0      # level 0 admits the uniform density at every order
    if q == 0:
        u = 2.0 * math.sqrt(2.0 * alpha)
        return 0.25 * (math.exp(u) + math.exp(-u)) - 0.5
    y = hinv(LN2 - alpha)
    # near q = 1 the generic form divides an O(q-1) cancellation by q-1;
    # inside the window the limit formula is the accurate route
    if abs(q - 1.0) <= 3e-9:
        if y == 0.0:
            return INF
        return (0.5 - y) * math.log((1.0 - y) / y)
    if y == 0.0:
        return 1.0 / (2.0 * (q - 1.0)) if q > 1 else INF
    qp = q / (q - 1.0)
    # combined exponents: separate fractional powers underflow near the ends;
    # for q < 1 the exponent can pass 709, where the curve truly diverges
    ly, l1y = math.log(y), math.log1p(-y)
    ea = ly / q + l1y / qp
    eb = ly / qp + l1y / q
    a = math.exp(ea) if ea < 709.0 else INF
    b = math.exp(eb) if eb < 709.0 else INF
    return (1.0 - a - b) / (2.0 * (q - 1.0))


def binary_xi_hat(q, alpha):
    """(q-1)-scaled curve used by the subgraph bound (q > 1)."""
    if q <= 1:
        raise SobolevError("hat scaling defined for q > 1")
    return (q - 1.0) * binary_xi_q(q, alpha)


# ---------------------------------------------------------------------------
# sampled curves


@dataclass(frozen=True, eq=False)
class SampledCurve:
    grid: np.ndarray
    values: np.ndarray
    kind: str
    q: float
    p: float = None
    n: int = None
    nstates: int = None      # alphabet size behind the grid, when known

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "values", v)
        if g.ndim != 1 or g.shape != v.shape or g.size < 1:
            raise SobolevError("grid/values must be equal-length vectors")
        if np.any(np.diff(g) <= 0):
            raise SobolevError("grid must be strictly increasing")
        if self.kind not in ("xi_q", "conv_xi_q", "xi_pq_n", "inverse"):
            raise SobolevError(f"unknown curve kind {self.kind!r}")
        if self.kind == "conv_xi_q" and g.size >= 3:
            d2 = np.diff(v, 2)
            if np.min(d2) < -1e-9:
                raise SobolevError("convex-envelope curve fails convexity check")


def alpha_grid(pi, size=64):
    """Default grid: [0, -ln min pi - 1e-6), right endpoint excluded."""
    pi = np.asarray(getattr(pi, "stationary", pi), dtype=float)
    hi = -math.log(float(pi.min())) - 1e-6
    return np.linspace(0.0, hi, size, endpoint=False)


def sample_binary_curve(q, size=64, scale=1.0):
    """Closed-form two-point curve; scale 2.0 gives the unit-rate version
    generated by the graph Laplacian of a single edge."""
    grid = np.linspace(0.0, LN2 - 1e-6, size, endpoint=False)
    vals = scale * np.array([binary_xi_q(q, a) for a in grid])
    return SampledCurve(grid, vals, "xi_q", q, nstates=2)


def conv_envelope(curve: SampledCurve) -> SampledCurve:
    """Greatest convex minorant of the sampled points, re-sampled on the grid.

    Lower hull by monotone chain; the result is pointwise <= the input and
    convex along the grid.
    """
    g, v = curve.grid, curve.values
    if g.size < 2:
        raise SobolevError("need at least two points for an envelope")
    if not np.all(np.isfinite(v)):
        raise SobolevError("envelope requires finite curve values")
    hull = []
    for x, y in zip(g, v):
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            # drop the middle point when it lies on or above the chord
            if (y2 - y1) * (x - x1) >= (y - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append((x, y))
    hx = np.array([p[0] for p in hull])
    hy = np.array([p[1] for p in hull])
    out = np.minimum(np.interp(g, hx, hy), v)
    return SampledCurve(g, out, "conv_xi_q", curve.q, curve.p, curve.n,
                        curve.nstates)


def phi_pq(p, q, conv_curve: SampledCurve, alpha):
    """Transition function: envelope value when p <= q, zero when p > q."""
    if p > q:
        return 0.0
    g = conv_curve.grid
    if alpha < g[0] - 1e-12 or alpha > g[-1] + 1e-12:
        raise SobolevError(f"alpha {alpha} outside curve range")
    return float(np.interp(alpha, g, conv_curve.values))


def lsi_constant(curve: SampledCurve, q) -> float:
    """Optimal constant of the linear inequality alpha <= C * scale * value.

    Normalized so the two-point chain has optimal constant 2 at every order
    (scale q^2/4 for q != 0 and 1/4 for q = 0).
    """
    scale = q * q / 4.0 if q != 0 else 0.25
    best = 0.0
    for a, v in zip(curve.grid, curve.values):
        if a <= 0:
            continue
        if v <= 0:
            return INF
        best = max(best, a / (scale * v))
    return best


# ---------------------------------------------------------------------------
# simplex optimizer


@dataclass(frozen=True)
class SolverConfig:
    grid_step: float = 1.0 / 400     # dense grid for 2- and 3-letter alphabets
    grid_step4: float = 1.0 / 60     # coarser grid for 4-cell simplices
    multistart: int = 16
    polish_maxfev: int = 4000
    polish_restarts: int = 2


def _simplex_grid(m, step):
    N = int(round(1.0 / step))
    if m == 2:
        i = np.arange(N + 1)
        return np.column_stack([i, N - i]) / N
    if m == 3:
        i, j = np.meshgrid(np.arange(N + 1), np.arange(N + 1), indexing="ij")
        keep = i + j <= N
        i, j = i[keep], j[keep]
        return np.column_stack([i, j, N - i - j]) / N
    if m == 4:
        rows = []
        for i in range(N + 1):
            j, k = np.meshgrid(np.arange(N - i + 1), np.arange(N - i + 1),
                               indexing="ij")
            keep = j + k <= N - i
            j, k = j[keep], k[keep]
            rows.append(np.column_stack(
                [np.full(j.size, i), j, k, N - i - j - k]))
        return np.vstack(rows) / N
    raise SobolevError("dense grid supports alphabets of size 2..4 only")


def _batch_generator_apply(S: Semigroup, n, U):
    # product-generator action on a batch of row vectors
    m = S.nstates
    R = U.shape[0]
    T = U.reshape((R,) + (m,) * n)
    out = np.zeros_like(T)
    for k in range(n):
        Tk = np.moveaxis(T, k + 1, -1)
        out += np.moveaxis(Tk @ S.generator.T, -1, k + 1)
    return out.reshape(R, -1)


def _dirichlet_rows(S: Semigroup, n, U, V):
    """E_n(u_i, v_i) for each row pair; rows must be finite."""
    pin = pi_product(S, n)
    LU = _batch_generator_apply(S, n, U)
    return -np.einsum("x,rx,rx->r", pin, LU, V)


def _objective_rows(S: Semigroup, n, q, Ds):
    """Dirichlet objective of the density characterization, per row of Ds."""
    Ds = np.atleast_2d(Ds)
    R = Ds.shape[0]
    out = np.full(R, INF)
    if q == 1 or q < 1:
        ok = np.all(Ds > 0, axis=1)
    else:
        ok = np.ones(R, dtype=bool)
    if not np.any(ok):
        return out
    D = Ds[ok]
    with np.errstate(divide="ignore", invalid="ignore"):
        if q == 1:
            vals = _dirichlet_rows(S, n, D, np.log(D))
        elif q == 0:
            vals = -_dirichlet_rows(S, n, D, 1.0 / D)
        else:
            qp = q / (q - 1.0)
            vals = _dirichlet_rows(S, n, D ** (1.0 / q), D ** (1.0 / qp))
            vals = vals / (q - 1.0)
    out[ok] = vals
    return out


def _kl_rows(Qs, pin):
    Qs = np.atleast_2d(Qs)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(Qs > 0, Qs * (np.log(Qs) - np.log(pin)), 0.0)
    return t.sum(axis=1)


def _renyi_rows(Qs, pin, gamma):
    """D_gamma(Q || pin) per row, log-space."""
    Qs = np.atleast_2d(Qs)
    if gamma == 1:
        return _kl_rows(Qs, pin)
    if gamma == 0:
        return -np.log(np.where(Qs > 0, pin, 0.0).sum(axis=1))
    if np.isinf(gamma):
        with np.errstate(divide="ignore"):
            return np.log((Qs / pin).max(axis=1))
    with np.errstate(divide="ignore", invalid="ignore"):
        expo = np.where(Qs > 0,
                        gamma * np.log(Qs) + (1 - gamma) * np.log(pin), -INF)
    return logsumexp(expo, axis=1) / (gamma - 1.0)


def _logvar_rows(Qs, pin):
    """Var_pi(ln(Q/pi))/2 per row; rows with zeros are infeasible (inf)."""
    Qs = np.atleast_2d(Qs)
    out = np.full(Qs.shape[0], INF)
    ok = np.all(Qs > 0, axis=1)
    if np.any(ok):
        logd = np.log(Qs[ok]) - np.log(pin)
        mean = logd @ pin
        out[ok] = 0.5 * (((logd - mean[:, None]) ** 2) @ pin)
    return out


def _nelder_mead(fn, x0, cfg: SolverConfig):
    best_x, best_v = x0, fn(x0)
    for _ in range(cfg.polish_restarts + 1):
        with np.errstate(invalid="ignore"):    # inf barrier values
            res = minimize(fn, best_x, method="Nelder-Mead",
                           options={"xatol": 1e-12, "fatol": 1e-12,
                                    "maxfev": cfg.polish_maxfev})
        if res.fun < best_v:
            best_x, best_v = res.x, res.fun
        else:
            break
    return best_x, best_v


def _ray_seeds(pi_flat, constraint_rows, level, corners=None):
    """Bisect (1-t) pi + t delta_j to the constraint boundary, per corner j.

    The divergence constraints are convex in Q with value 0 at pi, so each ray
    crosses the level set at most once; the just-feasible point is returned.
    """
    N = pi_flat.size
    seeds = []
    idxs = range(N) if corners is None else corners
    for j in idxs:
        corner = np.zeros(N)
        corner[j] = 1.0
        if constraint_rows(corner[None, :])[0] < level:
            continue
        lo, hi = 0.0, 1.0
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            Qm = (1 - mid) * pi_flat + mid * corner
            if constraint_rows(Qm[None, :])[0] >= level:
                hi = mid
            else:
                lo = mid
        seeds.append((1 - hi) * pi_flat + hi * corner)
    return seeds


def _optimize_density(S, n, q, constraint_rows, level, cfg, extra_seeds=()):
    """Shared pipeline: feasible-restricted grid, ray seeds, Nelder-Mead."""
    m = S.nstates
    N = m ** n
    pin = pi_product(S, n)

    def full_objective(Qs):
        Qs = np.atleast_2d(Qs)
        vals = np.full(Qs.shape[0], INF)
        feas = constraint_rows(Qs) >= level - 1e-13
        if np.any(feas):
            vals[feas] = _objective_rows(S, n, q, Qs[feas] / pin)
        return vals

    candidates = []
    if N <= 4:
        step = cfg.grid_step if N <= 3 else cfg.grid_step4
        grid = _simplex_grid(N, step)
        vals = full_objective(grid)
        k = int(np.argmin(vals))     # ties resolve to the smallest index
        if np.isfinite(vals[k]):
            candidates.append((vals[k], grid[k]))

    seeds = [np.asarray(s, dtype=float) for s in extra_seeds]
    if candidates:
        seeds.append(candidates[0][1])
    seeds.extend(_ray_seeds(pin, constraint_rows, level))
    seeds = seeds[: cfg.multistart]

    def nm_objective(x):
        if np.any(x < 0) or x.sum() > 1.0:
            return INF
        Q = np.append(x, 1.0 - x.sum())
        return full_objective(Q[None, :])[0]

    for s in seeds:
        x0 = s[:-1]
        x, v = _nelder_mead(nm_objective, x0, cfg)
        if np.isfinite(v):
            Q = np.append(x, 1.0 - x.sum())
            candidates.append((v, Q))

    if not candidates:
        raise SobolevError("no feasible point found; constraint level too high")
    vbest = min(c[0] for c in candidates)
    Qbest = next(c[1] for c in candidates if c[0] == vbest)
    return vbest, Qbest


def xi_q(S: Semigroup, q, alpha, cfg: SolverConfig = SolverConfig(),
         return_witness=False):
    """Single-letter curve value at entropy level alpha (best-found bound)."""
    if q < 0 or np.isinf(q):
        raise SobolevError("order q must be finite and nonnegative")
    m = S.nstates
    if m > 4:
        raise SobolevError("dense simplex solver supports |X| <= 4")
    hi = -math.log(float(S.stationary.min()))
    if not (0 <= alpha < hi):
        raise SobolevError(f"alpha {alpha} outside [0, {hi})")
    if alpha == 0:
        return (0.0, S.stationary.copy()) if return_witness else 0.0
    pin = S.stationary

    if q == 0:
        constraint = lambda Qs: _logvar_rows(Qs, pin)
    else:
        constraint = lambda Qs: _kl_rows(Qs, pin)
    val, Q = _optimize_density(S, 1, q, constraint, alpha, cfg)
    return (val, Q) if return_witness else val


def sample_xi_curve(S, q, size=64, cfg=SolverConfig()):
    grid = alpha_grid(S.stationary, size)
    vals = np.array([xi_q(S, q, a, cfg) for a in grid])
    return SampledCurve(grid, vals, "xi_q", q, nstates=S.nstates)


def _support_masks(N, max_mass, pin):
    """Maximal support subsets with pi-mass <= max_mass, as index tuples."""
    mass = np.zeros(1 << N)
    for b in range(1, 1 << N):
        low = b & -b
        mass[b] = mass[b ^ low] + pin[low.bit_length() - 1]
    bits = [b for b in range(1, 1 << N) if mass[b] <= max_mass + 1e-12]
    if len(bits) > 4096:
        raise SobolevError("support enumeration too large at this alpha")
    bits.sort(key=lambda b: (-bin(b).count("1"), b))
    # drop non-maximal subsets: optimizing over a face covers its subfaces
    keep = []
    for b in bits:
        if not any(b & k == b for k in keep):
            keep.append(b)
    return [tuple(i for i in range(N) if b >> i & 1) for b in keep]


def xi_pq_n(S: Semigroup, p, q, n, alpha, cfg: SolverConfig = SolverConfig(),
            return_witness=False):
    """n-letter two-parameter curve value (best-found upper bound).

    The density characterization turns the functional problem into one over
    distributions Q on X^n: constraint (1/n) D_{p/q}(Q || pi^n) >= alpha,
    objective (1/((q-1) n)) E_n(D^{1/q}, D^{1/q'}) with D = Q/pi^n. For p = 0
    the constraint only restricts the support mass, so supports are enumerated
    and each face is optimized without constraint (q > 1 only: the limit
    objectives blow up on proper faces).
    """
    if q < 0 or np.isinf(q):
        raise SobolevError("order q must be finite and nonnegative")
    if q == 0:
        raise SobolevError("n-letter route undefined at q = 0; use xi_q")
    if p < 0:
        raise SobolevError("order p must be nonnegative")
    m = S.nstates
    N = m ** n
    if N > ENUMERATION_BUDGET:
        raise SobolevError("|X|^n exceeds enumeration budget")
    hi = -math.log(float(S.stationary.min()))
    if not (0 <= alpha < hi):
        raise SobolevError(f"alpha {alpha} outside [0, {hi})")
    if alpha == 0:
        pin = pi_product(S, n)
        return (0.0, pin.copy()) if return_witness else 0.0
    pin = pi_product(S, n)

    if p == 0:
        if q <= 1:
            raise SobolevError("support-constrained route requires q > 1")
        if N > 16:
            raise SobolevError("support enumeration capped at |X|^n <= 16")
        best, wit = INF, None
        for idx in _support_masks(N, math.exp(-n * alpha), pin):
            sub = np.array(idx)
            # optimize on the face through a reduced semigroup is not possible
            # (the generator does not restrict); embed face grids instead
            k = len(sub)
            if k == 1:
                Q = np.zeros(N)
                Q[sub[0]] = 1.0
                v = _objective_rows(S, n, q, (Q / pin)[None, :])[0]
            else:
                step = cfg.grid_step4 if k >= 4 else cfg.grid_step
                face = _simplex_grid(k, step) if k <= 4 else None
                seeds = []
                if face is not None:
                    grid = np.zeros((face.shape[0], N))
                    grid[:, sub] = face
                    vals = _objective_rows(S, n, q, grid / pin)
                    kk = int(np.argmin(vals))
                    seeds.append(grid[kk])
                unif = np.zeros(N)
                unif[sub] = pin[sub] / pin[sub].sum()
                seeds.append(unif)

                def nm_obj(x, sub=sub):
                    if np.any(x < 0) or x.sum() > 1.0:
                        return INF
                    Q = np.zeros(N)
                    Q[sub] = np.append(x, 1.0 - x.sum())
                    return _objective_rows(S, n, q, (Q / pin)[None, :])[0]

                v, Q = INF, None
                for s in seeds:
                    x, vv = _nelder_mead(nm_obj, s[sub][:-1], cfg)
                    if vv < v:
                        v = vv
                        Q = np.zeros(N)
                        Q[sub] = np.append(x, 1.0 - x.sum())
            if v < best:
                best, wit = v, Q
        if wit is None:
            raise SobolevError("no admissible support")
        val = best / n
        return (val, wit) if return_witness else val

    gamma = p / q
    constraint = lambda Qs: _renyi_rows(Qs, pin, gamma) / n

    extra = []
    if n >= 2 and m <= 4:
        # product of single-letter optimizers: matches the tensorized value
        try:
            _, Q1 = xi_q(S, q, alpha, cfg, return_witness=True)
            extra.append(reduce(np.kron, [Q1] * n))
        except SobolevError:
            pass

    val, Q = _optimize_density(S, n, q, constraint, alpha, cfg,
                               extra_seeds=extra)
    val = val / n
    return (val, Q) if return_witness else val


# ---------------------------------------------------------------------------
# extremal constructions


@dataclass(frozen=True, eq=False)
class ExtremalSpec:
    """Recipe for a finite-n near-extremal function.

    variant 'conditional-typical': product of two typical-set conditioned
    densities, Q on the first floor(lam*n) coordinates and R on the rest.
    variant 'product': same with unconditioned product densities.
    variant 'dirac-mixture': density of (1-e^{-n beta}) pi^n(.|T_eps(pi))
    + e^{-n beta} delta_{(z,...,z)} with z a least-likely letter.
    """

    variant: str
    n: int
    eps: float = 0.1
    Q: np.ndarray = None
    R: np.ndarray = None
    lam: float = 1.0
    beta: float = None
    z: int = None

    def __post_init__(self):
        if self.variant not in ("conditional-typical", "product",
                                "dirac-mixture"):
            raise SobolevError(f"unknown extremal variant {self.variant!r}")
        if not (0.0 <= self.lam <= 1.0):
            raise SobolevError("lam must lie in [0, 1]")
        if self.eps <= 0:
            raise SobolevError("eps must be positive")
        if self.n < 1:
            raise SobolevError("n must be >= 1")
        if self.variant == "dirac-mixture" and (self.beta is None
                                                or self.beta <= 0):
            raise SobolevError("dirac-mixture requires beta > 0")


def sequence_type_counts(m, k):
    """(m^k, m) letter-count table for all base-m sequences of length k."""
    digits = sequence_digits(m, k)
    counts = np.zeros((m ** k, m), dtype=np.int32)
    for a in range(m):
        counts[:, a] = (digits == a).sum(axis=1)
    return counts


def typical_mask(Qw, k, eps):
    """Sequences whose empirical measure is within relative eps of Q."""
    Qw = np.asarray(Qw, dtype=float)
    m = Qw.size
    counts = sequence_type_counts(m, k)
    emp = counts / k
    # small additive slack so exact boundary types are kept
    return np.all(np.abs(emp - Qw) <= eps * Qw + 1e-12, axis=1)


def _product_log_probs(Qw, k):
    Qw = np.asarray(Qw, dtype=float)
    counts = sequence_type_counts(Qw.size, k)
    with np.errstate(divide="ignore", invalid="ignore"):
        lq = np.where(Qw > 0, np.log(Qw), -INF)
        out = counts @ np.where(np.isfinite(lq), lq, 0.0)
        dead = counts[:, ~np.isfinite(lq)].sum(axis=1) > 0
    out[dead] = -INF
    return out


def _conditioned_density(Qw, pi, k, eps):
    """Q^k(. | T_eps(Q)) / pi^k as a dense vector over m^k sequences."""
    if k == 0:
        return np.ones(1)
    mask = typical_mask(Qw, k, eps)
    logp = _product_log_probs(Qw, k)
    keep = mask & np.isfinite(logp)
    if not np.any(keep):
        raise SobolevError("empty typical set: eps too small for this length")
    logZ = logsumexp(logp[keep])
    m = len(Qw)
    logpik = sequence_type_counts(m, k) @ np.log(pi)
    dens = np.zeros(m ** k)
    dens[keep] = np.exp(logp[keep] - logZ - logpik[keep])
    return dens


def _product_density(Qw, pi, k):
    """Q^k / pi^k as a dense vector over m^k sequences."""
    if k == 0:
        return np.ones(1)
    logp = _product_log_probs(Qw, k)
    logpik = sequence_type_counts(len(Qw), k) @ np.log(pi)
    out = np.zeros(len(logp))
    ok = np.isfinite(logp)
    out[ok] = np.exp(logp[ok] - logpik[ok])
    return out


def build_extremal(spec: ExtremalSpec, S: Semigroup) -> NonnegFunction:
    """Dense extremal density on X^n for the given recipe."""
    m = S.nstates
    pi = S.stationary
    n = spec.n
    if m ** n > ENUMERATION_BUDGET:
        raise SobolevError("|X|^n exceeds enumeration budget")

    if spec.variant == "dirac-mixture":
        mask = typical_mask(pi, n, spec.eps)
        z = spec.z if spec.z is not None else int(np.argmin(pi))
        zn = z * (m ** n - 1) // (m - 1)
        pin = pi_product(S, n)
        mass = float(pin[mask].sum())
        if mass <= 0:
            raise SobolevError("empty typical set: eps too small for this length")
        w = math.exp(-n * spec.beta)
        Qn = np.where(mask, (1.0 - w) * pin / mass, 0.0)
        Qn[zn] += w
        return NonnegFunction(Qn / pin, m, n)

    Qw = np.asarray(spec.Q, dtype=float) if spec.Q is not None else pi.copy()
    Rw = np.asarray(spec.R, dtype=float) if spec.R is not None else pi.copy()
    k = int(math.floor(spec.lam * n))
    if spec.variant == "conditional-typical":
        f1 = _conditioned_density(Qw, pi, k, spec.eps)
        f2 = _conditioned_density(Rw, pi, n - k, spec.eps)
    else:
        f1 = _product_density(Qw, pi, k)
        f2 = _product_density(Rw, pi, n - k)
    return NonnegFunction(np.kron(f1, f2), m, n)


@dataclass(frozen=True)
class ExtremalReport:
    ent_rate: float
    dirichlet_rate: float
    n: int
    p: float
    q: float


def extremal_report(spec: ExtremalSpec, S: Semigroup, p, q) -> ExtremalReport:
    """Entropy and Dirichlet rates of the built density.

    The built f is the density D of a distribution Q_n relative to pi^n; the
    report evaluates the canonical test function D^{1/q} of that distribution:
    ent_rate = (1/n) D_{p/q}(Q_n || pi^n) and dirichlet_rate the matching
    normalized Dirichlet objective (the q-norm of D^{1/q} is one by
    construction, so no denominator appears).
    """
    if q <= 0 or np.isinf(q):
        raise SobolevError("report requires finite q > 0")
    if p < 0:
        raise SobolevError("order p must be nonnegative")
    f = build_extremal(spec, S)
    n = spec.n
    pin = pi_product(S, n)
    Qn = f.values * pin
    Qn = Qn / Qn.sum()
    ent_rate = renyi_divergence(Qn, pin, p / q) / n
    D = (Qn / pin)[None, :]
    dirichlet_rate = _objective_rows(S, n, q, D)[0] / n
    return ExtremalReport(float(ent_rate) + 0.0, float(dirichlet_rate) + 0.0,
                          n, p, q)
