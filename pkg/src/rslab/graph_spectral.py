"""Rayleigh q-quotients, q-radii, Cartesian graph powers, Faber-Krahn maxima.

For a d-regular graph with adjacency A and a nonnegative f, the quotient

    R_q(A, f) = sum_xy f(x) A_{x,y} f(y)^{q-1} / sum_x f(x)^q

has limit branches at q in {0, 1, infinity} involving the support boundary
weight theta = sum_{x in supp(f), y not in supp(f)} f(x) A_{x,y}. Its maximum
over f is the q-radius rho_q(A): exactly the max row sum at q = 1, the max
column sum at q = infinity, the spectral radius at q = 2, and +infinity at
q = 0. For other q the maximum is found by reparametrizing f = Q^{1/q} over
distributions Q and iterating a multiplicative fixed-point update, so the
reported value is a best-found lower bound together with a certificate.

The size-constrained maximum over induced subgraphs,

    Lambda_q(m) = max { rho_q(G') : G' induced in G^n, |V'| <= m },

is computed exactly by subset enumeration at desk scale, and bounded through
the entropy curve of the chain generated by L = A - dI:

    Lambda_q(m) <= n (d - (q-1) conv Xi_q(alpha)),  alpha = ln|V| - ln(m)/n.

Note the unit-rate Laplacian convention: the single-edge graph generates the
two-point chain at twice the half-rate normalization, so its curve is twice
the closed form and the cube bound lands on the familiar shape
n * (y^{1/q}(1-y)^{1/q'} + y^{1/q'}(1-y)^{1/q}) with y = h^{-1}(ln(m)/n).
"""

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .semigroup import Semigroup, validate_semigroup
from .sobolev import SampledCurve

INF = float("inf")

# dense adjacency cap: every contracted use sits at or below 2^12 vertices
DENSE_VERTEX_BUDGET = 4096


class GraphError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Graph:
    adjacency: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.adjacency, dtype=float)
        object.__setattr__(self, "adjacency", A)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
            raise GraphError("adjacency must be square")
        if not np.array_equal(A, A.T):
            raise GraphError("adjacency must be symmetric")
        if np.any(np.diag(A) != 0):
            raise GraphError("adjacency must have zero diagonal")
        if not np.all((A == 0) | (A == 1)):
            raise GraphError("adjacency entries must be 0 or 1")
        deg = A.sum(axis=1)
        if not np.all(deg == deg[0]):
            raise GraphError("graph must be regular")

    @property
    def nvertices(self):
        return self.adjacency.shape[0]

    @property
    def degree(self):
        return int(self.adjacency[0].sum())


@dataclass(frozen=True, eq=False)
class SubgraphView:
    parent: Graph
    vertices: tuple

    def __post_init__(self):
        vs = tuple(sorted(set(int(v) for v in self.vertices)))
        object.__setattr__(self, "vertices", vs)
        if not vs:
            raise GraphError("vertex subset must be nonempty")
        if vs[0] < 0 or vs[-1] >= self.parent.nvertices:
            raise GraphError("vertex index out of range")

    @property
    def submatrix(self):
        idx = np.array(self.vertices)
        return self.parent.adjacency[np.ix_(idx, idx)]


def complete_graph(k):
    if k < 2:
        raise GraphError("complete graph needs >= 2 vertices")
    return Graph(np.ones((k, k)) - np.eye(k))


def cycle_graph(k):
    if k < 3:
        raise GraphError("cycle needs >= 3 vertices")
    A = np.zeros((k, k))
    for i in range(k):
        A[i, (i + 1) % k] = A[(i + 1) % k, i] = 1
    return Graph(A)


def hypercube_graph(n):
    return cartesian_power(complete_graph(2), n)


def load_graph(path) -> Graph:
    """Edge-list file: first line "|V| |E|", then one "u v" pair per line."""
    with open(path) as fh:
        tokens = fh.read().split()
    if len(tokens) < 2:
        raise GraphError("graph file too short")
    nv, ne = int(tokens[0]), int(tokens[1])
    if len(tokens) != 2 + 2 * ne:
        raise GraphError("edge count does not match header")
    A = np.zeros((nv, nv))
    for k in range(ne):
        u, v = int(tokens[2 + 2 * k]), int(tokens[3 + 2 * k])
        if not (0 <= u < nv and 0 <= v < nv) or u == v:
            raise GraphError(f"bad edge {u} {v}")
        A[u, v] = A[v, u] = 1.0
    return Graph(A)


def graph_generator(G: Graph) -> Semigroup:
    """Chain generated by L = A - dI with uniform stationary law."""
    d = G.degree
    L = G.adjacency - d * np.eye(G.nvertices)
    return validate_semigroup(L)


def cartesian_power(G: Graph, n: int) -> Graph:
    """n-fold Kronecker sum of the adjacency; first factor most significant."""
    if n < 1:
        raise GraphError("power must be >= 1")
    N = G.nvertices ** n
    if N > DENSE_VERTEX_BUDGET:
        raise GraphError("dense adjacency budget exceeded")
    A1 = G.adjacency
    out = A1
    for _ in range(n - 1):
        k = out.shape[0]
        out = np.kron(out, np.eye(A1.shape[0])) + np.kron(np.eye(k), A1)
    return Graph(out)


def _as_values(f):
    v = np.asarray(getattr(f, "values", f), dtype=float)
    if v.ndim != 1 or np.any(v < 0) or not np.any(v > 0):
        raise GraphError("f must be a nonnegative, nonzero vector")
    return v


def rayleigh_q(A, f, q) -> float:
    """The q-quotient with all five branches, extended-real valued."""
    A = np.asarray(A, dtype=float)
    v = _as_values(f)
    if v.size != A.shape[0]:
        raise GraphError("dimension mismatch")
    if q < 0:
        raise GraphError("order q must be nonnegative")
    sup = v > 0
    theta = float(v[sup] @ A[np.ix_(sup, ~sup)].sum(axis=1)) if (~sup).any() \
        else 0.0

    if q == 0:
        if theta > 0:
            return INF
        if theta < 0:
            # unreachable for nonnegative A; kept for general matrices
            assert (A < 0).any(), "negative boundary weight with A >= 0"
            return -INF
        As = A[np.ix_(sup, sup)]
        return float(v[sup] @ As @ (1.0 / v[sup])) / int(sup.sum())
    if np.isinf(q):
        f0 = v.max()
        top = np.flatnonzero(v == f0)
        return float((v / f0) @ A[:, top].sum(axis=1)) / top.size
    if q == 1:
        As = A[np.ix_(sup, sup)]
        return float(v[sup] @ As.sum(axis=1)) / float(v[sup].sum())
    if q > 1:
        num = float(v @ A @ np.where(sup, v, 0.0) ** (q - 1.0)) \
            if q != 2 else float(v @ A @ v)
        return num / float((v[sup] ** q).sum())
    # q in (0,1): boundary edges blow the quotient up
    if theta > 0:
        return INF
    As = A[np.ix_(sup, sup)]
    num = float(v[sup] @ As @ v[sup] ** (q - 1.0))
    return num / float((v[sup] ** q).sum())


@dataclass(frozen=True)
class RadiusConfig:
    starts: int = 16
    maxiter: int = 10000
    tol: float = 1e-12
    power_tol: float = 1e-10
    seed: int = 0


def _power_radius(A, tol):
    # spectral radius of a symmetric nonnegative matrix; the diagonal shift
    # keeps the iteration from oscillating on bipartite graphs
    n = A.shape[0]
    shift = float(A.sum(axis=1).max()) + 1.0
    B = A + shift * np.eye(n)
    # slight tilt keeps the start off any eigenspace boundary
    v = 1.0 + np.arange(n) / max(n, 2) ** 2
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(100000):
        w = B @ v
        nrm = np.linalg.norm(w)
        if nrm == 0:
            return 0.0, v
        v = w / nrm
        new = float(v @ B @ v)
        if abs(new - lam) <= tol:
            return new - shift, np.abs(v)
        lam = new
    return lam - shift, np.abs(v)


def _fixed_point_radius(A, q, cfg: RadiusConfig):
    """Best-found max of sum Q^{1/q} A Q^{1/q'} over distributions Q."""
    n = A.shape[0]
    qp = q / (q - 1.0)

    def value(Q):
        return float(Q ** (1.0 / q) @ A @ Q ** (1.0 / qp))

    rng = np.random.default_rng(cfg.seed)
    starts = [np.full(n, 1.0 / n)]
    starts += [rng.dirichlet(np.ones(n)) for _ in range(cfg.starts)]
    best, bestQ = 0.0, starts[0]
    for Q in starts:
        val = value(Q)
        for _ in range(cfg.maxiter):
            u, w = Q ** (1.0 / q), Q ** (1.0 / qp)
            upd = (u * (A @ w)) / q + (w * (A @ u)) / qp
            s = upd.sum()
            if s <= 0:
                break
            Q = upd / s
            new = value(Q)
            if abs(new - val) <= cfg.tol * max(1.0, abs(new)):
                val = new
                break
            val = new
        if val > best:
            best, bestQ = val, Q
    return best, bestQ


def q_radius(A, q, cfg: RadiusConfig = RadiusConfig(),
             return_witness=False):
    """max_f R_q(A, f) for q in [1, inf], plus the q = 0 convention."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise GraphError("matrix must be square")
    if np.any(A < 0) or not np.allclose(A, A.T, atol=0):
        raise GraphError("matrix must be nonnegative symmetric")
    if q == 0:
        return (INF, None) if return_witness else INF
    if q < 1:
        raise GraphError("q-radius defined for q in [1, inf] or q = 0")
    if q == 1:
        rows = A.sum(axis=1)
        val = float(rows.max())
        # near-maximizer: the quotient averages in-support degrees, so a
        # point mass alone scores zero; spread a vanishing tail elsewhere
        wit = np.full(A.shape[0], 1e-9)
        wit[int(rows.argmax())] = 1.0
        return (val, wit) if return_witness else val
    if np.isinf(q):
        cols = A.sum(axis=0)
        val = float(cols.max())
        # near-maximizer: the quotient averages over the argmax set of f, so
        # a flat witness only certifies the value on regular matrices
        wit = np.full(A.shape[0], 1.0 - 1e-9)
        wit[int(cols.argmax())] = 1.0
        return (val, wit) if return_witness else val
    if q == 2:
        val, wit = _power_radius(A, cfg.power_tol)
        return (val, wit) if return_witness else val
    val, Q = _fixed_point_radius(A, q, cfg)
    wit = Q ** (1.0 / q)
    return (val, wit) if return_witness else val


def subgraph_q_radius(view: SubgraphView, q,
                      cfg: RadiusConfig = RadiusConfig()):
    return q_radius(view.submatrix, q, cfg)


@dataclass(frozen=True)
class FaberKrahnResult:
    value: float
    witness: tuple


def faber_krahn_exact(G: Graph, n: int, q, m: int,
                      cfg: RadiusConfig = RadiusConfig()) -> FaberKrahnResult:
    """max rho_q over induced subgraphs of G^n with at most m vertices.

    Exhaustive over supports of size exactly m: enlarging the support can
    only increase the maximum of R_q. Subsets whose max induced degree does
    not beat the incumbent are pruned (rho_q <= max row sum for q in
    [1, inf]). Enumeration is unrestricted; connected-only enumeration is an
    optimization whose soundness for general q is not settled here.
    """
    if q != 2 and not (1 <= q < INF):
        raise GraphError("requires q in [1, inf)")
    An = cartesian_power(G, n).adjacency
    N = An.shape[0]
    cap = 20 if q == 2 else 16
    if N > cap:
        raise GraphError(f"enumeration budget |V|^n <= {cap} exceeded")
    if not (1 <= m <= N):
        raise GraphError("need 1 <= m <= |V|^n")
    if m == 1:
        return FaberKrahnResult(0.0, (0,))
    best, wit = 0.0, tuple(range(m))
    for subset in combinations(range(N), m):
        idx = np.array(subset)
        sub = An[np.ix_(idx, idx)]
        if sub.sum(axis=1).max() <= best + 1e-12:
            continue       # degree bound cannot beat the incumbent
        if q == 2:
            val = float(np.linalg.eigvalsh(sub)[-1])
        else:
            val = q_radius(sub, q, cfg)
        if val > best + 1e-12:
            best, wit = val, subset
    return FaberKrahnResult(best, wit)


def faber_krahn_bound(d: int, q, conv_curve: SampledCurve, n: int,
                      m: int) -> float:
    """Curve upper bound n(d - (q-1) conv Xi_q(alpha )), alpha from (|V|, m).

    The curve must come from the chain generated by L = A - dI on the base
    graph (uniform law), so |V| is read off the curve's alphabet size.
    """
    if q <= 1:
        raise GraphError("bound defined for q > 1")
    if conv_curve.kind != "conv_xi_q":
        raise GraphError("expected a convex-envelope curve")
    if conv_curve.nstates is None:
        raise GraphError("curve does not record its alphabet size")
    if n < 1 or m < 1:
        raise GraphError("need n >= 1 and m >= 1")
    alpha = math.log(conv_curve.nstates) - math.log(m) / n
    g = conv_curve.grid
    if alpha < g[0] - 1e-12 or alpha > g[-1] + 1e-12:
        raise GraphError(f"alpha {alpha:.6f} outside curve range")
    val = float(np.interp(alpha, g, conv_curve.values))
    return n * (d - (q - 1.0) * val)


def hamming_shell_subgraph(n: int, radii) -> SubgraphView:
    """Vertices of the n-cube whose Hamming weight lies in the radius set."""
    radii = set(int(r) for r in radii)
    if not radii or not radii.issubset(range(n + 1)):
        raise GraphError("radii must be a nonempty subset of 0..n")
    cube = hypercube_graph(n)
    weights = np.array([bin(x).count("1") for x in range(2 ** n)])
    verts = [int(x) for x in np.flatnonzero(np.isin(weights, sorted(radii)))]
    return SubgraphView(cube, tuple(verts))
