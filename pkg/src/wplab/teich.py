"""Weil-Petersson geometry of the once-punctured-torus Teichmueller space.

Points are Fenchel-Nielsen coordinates ``(l_alpha, tau)`` for the curve
``alpha`` of slope 1/0.  The metric is assembled from unfolded pairings of
length gradients: with ``G = <grad l_alpha, grad l_alpha>`` and ``X`` the tau
component of ``grad l_alpha``,

    g = [[(1 + X^2/4) / G, -X/4], [-X/4, G/4]],

which encodes ``J d/dtau = grad l_alpha / 2`` (twist-length duality).  ``X`` is
fitted from the pairings of ``alpha`` with test curves ``beta`` through
``<grad l_alpha, grad l_beta> = G d_l l_beta + X d_tau l_beta``.  All pairings
carry exact derivatives, so Christoffel symbols need no differencing of noisy
data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .fuchsian import (
    CurveClass,
    FNPoint,
    curve_length,
    group_from_fn,
    length_hessian,
    length_jet,
    primitive_class,
)
from .series import grad_pairing, pairing_jet

ALPHA = (1, 0)
TEST_CURVES = ((0, 1), (1, 1))
DEFAULT_MAX_LEN = 8
STRATUM_FLOOR = 1e-4


class MetricError(RuntimeError):
    pass


class ChartError(RuntimeError):
    pass


def _cls(c) -> CurveClass:
    return c if isinstance(c, CurveClass) else primitive_class(*c)


@dataclass
class MetricSample:
    """WP metric at a point, in the coordinate basis ``(d/dl, d/dtau)``."""

    point: FNPoint
    g: np.ndarray
    dg: np.ndarray | None = None          # dg[k] = d g / d x_k
    grad_alpha_sq: float = float("nan")   # G
    twist_component: float = float("nan")  # X
    method: str = "twist"
    dG: np.ndarray | None = field(default=None, repr=False)
    dX: np.ndarray | None = field(default=None, repr=False)

    @property
    def ginv(self) -> np.ndarray:
        return np.linalg.inv(self.g)

    def christoffel(self) -> np.ndarray:
        """``Gamma[k, i, j]`` of the Levi-Civita connection."""
        if self.dg is None:
            raise MetricError("metric derivatives not available for this sample")
        d = self.dg
        # first-kind symbols: [ij, l] = (d_i g_jl + d_j g_il - d_l g_ij) / 2
        first = 0.5 * (np.einsum("ijl->ijl", d) + np.einsum("jil->ijl", d) - np.einsum("lij->ijl", d))
        return np.einsum("kl,ijl->kij", self.ginv, first)

    @property
    def J(self) -> np.ndarray:
        """Complex structure in coordinates (columns are images of the basis vectors)."""
        G, X = self.grad_alpha_sq, self.twist_component
        return np.array([[-X / 2.0, G / 2.0], [-(2.0 + X * X / 2.0) / G, X / 2.0]])

    def norm(self, v) -> float:
        v = np.asarray(v, dtype=float)
        return float(math.sqrt(v @ self.g @ v))

    def beltrami_coefficient(self, v) -> complex:
        """``c`` with ``v`` represented by ``c nu_alpha``."""
        G, X = self.grad_alpha_sq, self.twist_component
        return v[0] * (2.0 + 1j * X) / (math.pi * G) - 1j * v[1] / math.pi


_METRIC_CACHE: dict = {}


def _cache_key(p: FNPoint, *rest):
    return (round(p.l_alpha, 13), round(p.tau, 13)) + rest


def metric_tensor(p: FNPoint, method: str = "twist", test_curves: Sequence = TEST_CURVES,
                  max_len: int = DEFAULT_MAX_LEN) -> MetricSample:
    """WP metric tensor at ``p``.

    ``method="twist"`` (default) uses the duality form above with exact
    derivatives.  ``method="matching"`` represents each coordinate vector by a
    harmonic Beltrami differential ``(x + i y) nu_alpha`` fitted so that the
    first variations of the test-curve lengths match their coordinate
    derivatives, and pairs the representatives.
    """
    key = _cache_key(p, method, tuple(tuple(c) if not isinstance(c, CurveClass) else (c.p, c.q)
                                      for c in test_curves), max_len)
    hit = _METRIC_CACHE.get(key)
    if hit is not None:
        return hit
    if method == "twist":
        out = _metric_twist_reduced(p, test_curves, max_len)
    elif method == "matching":
        # the Dehn twist about alpha shifts tau by l_alpha and is an isometry
        k = round(p.tau / p.l_alpha)
        q = FNPoint(p.l_alpha, p.tau - k * p.l_alpha)
        out = _pull_back_twist(_metric_matching(q, test_curves, max_len), p, k)
    else:
        raise ValueError(f"unknown method {method!r}")
    _METRIC_CACHE[key] = out
    return out


def _smoothstep(u: float) -> tuple[float, float]:
    """C^3 step from 0 at ``u <= 1/4`` to 1 at ``u >= 3/4``, with its derivative."""
    x = min(max(2.0 * (u - 0.25), 0.0), 1.0)
    val = x ** 4 * (35 - 84 * x + 70 * x * x - 20 * x ** 3)
    der = 140 * x ** 3 * (1 - x) ** 3 * 2.0
    return val, der


def _metric_twist_reduced(p, test_curves, max_len):
    """Twist-form metric assembled near ``tau = 0`` and pulled back by Dehn twists.

    The truncated sums are not exactly twist invariant, so switching between
    neighbouring representatives would make the metric jump at the truncation
    level.  Between them the two pulled-back samples are blended with a smooth
    step in ``u = tau / l - floor(tau / l)``.
    """
    ell, tau = p.l_alpha, p.tau
    k0 = math.floor(tau / ell)
    u = tau / ell - k0
    s, ds_du = _smoothstep(u)
    parts = []
    for k, w in ((k0, 1.0 - s), (k0 + 1, s)):
        if w == 0.0:
            parts.append(None)
            continue
        q = FNPoint(ell, tau - k * ell)
        parts.append(_shift_invariants(_metric_twist(q, test_curves, max_len), k))
    if parts[1] is None:
        G, X, dG, dX = parts[0]
    elif parts[0] is None:
        G, X, dG, dX = parts[1]
    else:
        (G0, X0, dG0, dX0), (G1, X1, dG1, dX1) = parts
        ds = ds_du * np.array([-tau / ell ** 2, 1.0 / ell])
        G = G0 + s * (G1 - G0)
        X = X0 + s * (X1 - X0)
        dG = dG0 + s * (dG1 - dG0) + ds * (G1 - G0)
        dX = dX0 + s * (dX1 - dX0) + ds * (X1 - X0)
    return _assemble_twist(p, G, X, dG, dX)


def _shift_invariants(m: MetricSample, k: int):
    """``(G, X, dG, dX)`` at the point ``k`` twists beyond the sample's point."""
    D = np.array([[1.0, 0.0], [-float(k), 1.0]])  # Jacobian of (l, tau) -> (l, tau - k l)
    G = m.grad_alpha_sq
    X = m.twist_component + k * G
    return G, X, D.T @ m.dG, D.T @ (m.dX + k * m.dG)


def _assemble_twist(p, G, X, dG, dX) -> MetricSample:
    g = np.array([[(1 + X * X / 4) / G, -X / 4], [-X / 4, G / 4]])
    dg = np.empty((2, 2, 2))
    for k in range(2):
        a = (X * dX[k] / 2) / G - (1 + X * X / 4) * dG[k] / G ** 2
        dg[k] = [[a, -dX[k] / 4], [-dX[k] / 4, dG[k] / 4]]
    return MetricSample(p, g, dg, G, X, "twist", np.asarray(dG), np.asarray(dX))


def _pull_back_twist(m: MetricSample, p: FNPoint, k: int) -> MetricSample:
    """Metric at ``p`` from the sample at ``p`` shifted by ``-k`` twists."""
    D = np.array([[1.0, 0.0], [-float(k), 1.0]])  # Jacobian of the shift
    g = D.T @ m.g @ D
    dg = None
    if m.dg is not None:
        dg = np.einsum("ba,ij,bjl,lm->aim", D, D.T, m.dg, D)
    X = m.twist_component + k * m.grad_alpha_sq
    return MetricSample(p, g, dg, m.grad_alpha_sq, X, m.method)


def _metric_twist(p, test_curves, max_len):
    G, dG = pairing_jet(p, ALPHA, ALPHA, max_len)
    num, den = 0.0, 0.0
    dnum, dden = np.zeros(2), np.zeros(2)
    for c in test_curves:
        beta = _cls(c)
        Gb, dGb = pairing_jet(p, ALPHA, beta, max_len)
        _, gb = length_jet(p, beta)
        Hb = length_hessian(p, beta)
        r = Gb - G * gb[0]
        dr = dGb - dG * gb[0] - G * Hb[0]
        t, dt = gb[1], Hb[1]
        num += t * r
        den += t * t
        dnum += dt * r + t * dr
        dden += 2 * t * dt
    if den < 1e-12:
        raise MetricError("test curves have no twist dependence here; choose curves crossing alpha")
    X = num / den
    dX = (dnum - X * dden) / den
    return _assemble_twist(p, G, X, dG, dX)


def _metric_matching(p, test_curves, max_len):
    if len(test_curves) != 2:
        raise ValueError("matching uses exactly two test curves")
    G = group_from_fn(p)
    saa = grad_pairing(G, ALPHA, ALPHA, max_len)
    rows, rhs = [], []
    for c in test_curves:
        beta = _cls(c)
        ps = grad_pairing(G, ALPHA, beta, max_len)
        # first variations of l_beta along nu_alpha and i nu_alpha
        rows.append([math.pi / 2 * ps.value, -math.pi * ps.imag_sum])
        rhs.append(length_jet(p, beta)[1])
    M = np.array(rows)
    if np.linalg.cond(M) > 1e6:
        raise MetricError("matching system is ill-conditioned; use different test curves")
    XY = np.linalg.solve(M, np.array(rhs))  # column j: (x_j, y_j) for d/dx_j
    norm_alpha = math.pi ** 2 / 4 * saa.value
    g = norm_alpha * (XY.T @ XY)
    g = 0.5 * (g + g.T)
    # recover G and X from the representatives for the complex structure
    c_l = complex(XY[0, 0], XY[1, 0])
    Gv = 2.0 / (math.pi * c_l.real)
    Xv = c_l.imag * math.pi * Gv
    return MetricSample(p, g, None, Gv, Xv, "matching")


def length_differential(beta, p: FNPoint) -> np.ndarray:
    return length_jet(p, _cls(beta))[1]


def grad_norm_sq(beta, p: FNPoint, **kw) -> float:
    """``<grad l_beta, grad l_beta>`` from the metric tensor."""
    m = metric_tensor(p, **kw)
    d = length_differential(beta, p)
    return float(d @ m.ginv @ d)


# -- geodesics ----------------------------------------------------------------

@dataclass
class WPPath:
    samples: list = field(default_factory=list)   # (s, FNPoint, velocity)
    flag: str | None = None

    @property
    def s(self) -> np.ndarray:
        return np.array([x[0] for x in self.samples])

    @property
    def points(self) -> list[FNPoint]:
        return [x[1] for x in self.samples]

    @property
    def end(self) -> FNPoint:
        return self.samples[-1][1]


def _rhs(y, metric_kw):
    p = FNPoint(y[0], y[1])
    v = y[2:]
    Gam = metric_tensor(p, **metric_kw).christoffel()
    acc = -np.einsum("kij,i,j->k", Gam, v, v)
    return np.concatenate([v, acc])


def geodesic_shoot(p: FNPoint, v, length: float, step: float = 0.05, floor: float = STRATUM_FLOOR,
                   stratum_steps: bool = True, stratum_fraction: float = 0.2, until: Callable | None = None, **metric_kw) -> WPPath:
    """Integrate the geodesic through ``(p, v)`` for the given arc length (RK4).

    ``v`` must have unit WP norm.  With ``stratum_steps`` the step is also kept
    below ``0.2 (2 pi l_alpha)^(1/2)``, the scale of the metric singularity.
    Integration stops with flag ``"approached stratum"`` once ``l_alpha`` falls
    below ``floor``.  ``until(path)`` may end the integration early.
    """
    v = np.asarray(v, dtype=float)
    speed = metric_tensor(p, **metric_kw).norm(v)
    if abs(speed - 1.0) > 1e-8:
        raise ValueError(f"initial velocity has WP norm {speed}, expected 1")
    path = WPPath([(0.0, p, v.copy())])
    y = np.array([p.l_alpha, p.tau, v[0], v[1]])
    s = 0.0
    sign = math.copysign(1.0, length) if length else 1.0
    total = abs(length)
    while s < total - 1e-14:
        h = min(step, total - s)
        if stratum_steps:
            h = min(h, stratum_fraction * math.sqrt(2 * math.pi * y[0]))
        try:
            k1 = _rhs(y, metric_kw)
            k2 = _rhs(y + 0.5 * h * sign * k1, metric_kw)
            k3 = _rhs(y + 0.5 * h * sign * k2, metric_kw)
            k4 = _rhs(y + h * sign * k3, metric_kw)
        except ValueError:
            path.flag = "approached stratum"
            break
        y = y + h * sign / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        s += h
        if y[0] <= 0:
            path.flag = "approached stratum"
            break
        path.samples.append((sign * s, FNPoint(y[0], y[1]), y[2:].copy()))
        if y[0] < floor:
            path.flag = "approached stratum"
            break
        if until is not None and until(path):
            break
    return path


def unit_vector(p: FNPoint, v, **metric_kw) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return v / metric_tensor(p, **metric_kw).norm(v)


def speed_drift(path: WPPath, **metric_kw) -> float:
    return max(abs(metric_tensor(q, **metric_kw).norm(u) - 1.0) for _, q, u in path.samples)


# -- Hessians -------------------------------------------------------------------

def _length_along(beta, path: WPPath) -> np.ndarray:
    b = _cls(beta)
    return np.array([length_jet(q, b)[0] for q in path.points])


def hessian_fd(beta, p: FNPoint, v, h: float = 0.08, **metric_kw) -> float:
    """Second derivative of ``l_beta`` along the geodesic through ``(p, v)``.

    Five-point stencils with steps ``h`` and ``h/2`` combined by Richardson
    extrapolation; the geodesic is integrated with step ``h/2``.
    """
    b = _cls(beta)
    f = {0: length_jet(p, b)[0]}  # keyed by multiples of h/2
    for sign in (1, -1):
        path = geodesic_shoot(p, sign * np.asarray(v, dtype=float), 2 * h, step=h / 2,
                              stratum_steps=False, **metric_kw)
        if path.flag or len(path.samples) != 5:
            raise ChartError("stencil left the coordinate chart")
        for i, q in enumerate(path.points[1:], start=1):
            f[sign * i] = length_jet(q, b)[0]

    def stencil(k, step):
        return (-f[2 * k] + 16 * f[k] - 30 * f[0] + 16 * f[-k] - f[-2 * k]) / (12 * step ** 2)

    coarse = stencil(2, h)
    fine = stencil(1, h / 2)
    return float((16 * fine - coarse) / 15)


def hessian_covariant(beta, p: FNPoint, v, **metric_kw) -> float:
    """``v^T (D^2 l - Gamma^k d_k l) v`` at ``p``."""
    b = _cls(beta)
    m = metric_tensor(p, **metric_kw)
    v = np.asarray(v, dtype=float)
    H = length_hessian(p, b)
    d = length_jet(p, b)[1]
    Hcov = H - np.einsum("kij,k->ij", m.christoffel(), d)
    return float(v @ Hcov @ v)


def complex_hessian(beta, p: FNPoint, v, route: Callable = hessian_covariant, **metric_kw) -> float:
    """Levi form ``(Hess(v, v) + Hess(Jv, Jv)) / 4``."""
    m = metric_tensor(p, **metric_kw)
    v = np.asarray(v, dtype=float)
    return 0.25 * (route(beta, p, v, **metric_kw) + route(beta, p, m.J @ v, **metric_kw))


def holomorphic_differential(beta, p: FNPoint, v, **metric_kw) -> complex:
    """``(d l(v) - i d l(Jv)) / 2``."""
    m = metric_tensor(p, **metric_kw)
    d = length_differential(beta, p)
    v = np.asarray(v, dtype=float)
    return 0.5 * complex(d @ v, -(d @ (m.J @ v)))


def hessian_from_modes(beta, p: FNPoint, v, N: int = 32, max_word_len: int = 8, **metric_kw) -> float:
    """Riemannian Hessian of ``l_beta`` along ``v`` from the Fourier route.

    Represents ``v`` by ``c nu_alpha``, expands it on the cylinder cover of
    ``beta`` and applies the closed-form mode formula.
    """
    from .domain import dirichlet_domain
    from .series import build_coset_sum, theta_beltrami
    from .strip import fourier_analyze, hessian_riemannian

    m = metric_tensor(p, **metric_kw)
    c = m.beltrami_coefficient(np.asarray(v, dtype=float))
    G = group_from_fn(p)
    fd = dirichlet_domain(G)
    nu = theta_beltrami(build_coset_sum(G, _cls(ALPHA), max_word_len), fd) * c
    csb = build_coset_sum(G, _cls(beta), max_word_len)
    fa = fourier_analyze(nu, csb, N=N, alias_tol=1.0)
    return hessian_riemannian(fa.modes)


# -- convexity ------------------------------------------------------------------

@dataclass
class ConvexityReport:
    second_differences: np.ndarray
    min_value: float
    noise_floor: float
    convex: bool
    degenerate: bool = False


def length_functional(kind: str, curves) -> Callable[[FNPoint], float]:
    """``"length"``: l_beta; ``"sqrt"``: l_beta^(1/2); ``"sqrt_sum"``: (sum l)^(1/2); ``"one"``: 1."""
    if kind == "one":
        return lambda q: 1.0
    cl = [_cls(c) for c in (curves if isinstance(curves, (list, tuple)) and curves and
                            isinstance(curves[0], (list, tuple, CurveClass)) else [curves])]
    total = lambda q: sum(length_jet(q, c)[0] for c in cl)
    if kind == "length":
        return total
    if kind in ("sqrt", "sqrt_sum"):
        return lambda q: math.sqrt(total(q))
    raise ValueError(f"unknown functional {kind!r}")


def convexity_probe(path: WPPath, f: Callable[[FNPoint], float]) -> ConvexityReport:
    """Centered second differences of ``f`` along an (equally spaced) path."""
    s = path.s
    if len(s) == 1 or np.all(s == s[0]):
        # zero-length geodesic: nothing to probe
        return ConvexityReport(np.zeros(0), 0.0, 0.0, False, degenerate=True)
    if len(path.samples) < 9:
        raise ValueError("convexity probe needs at least 9 samples")
    ds = np.diff(s)
    vals = np.array([f(q) for q in path.points])
    h = float(np.mean(ds))
    if np.max(np.abs(ds - h)) > 1e-9 * h:
        raise ValueError("path samples must be equally spaced")
    d2 = (vals[2:] - 2 * vals[1:-1] + vals[:-2]) / h ** 2
    floor = 64 * np.finfo(float).eps * float(np.max(np.abs(vals))) / h ** 2
    return ConvexityReport(d2, float(d2.min()), floor, bool(d2.min() > floor))


# -- stratum ----------------------------------------------------------------------

@dataclass
class StratumDistance:
    distance: float
    angle: float
    path: WPPath
    bound: float


def _descent_frame(p: FNPoint, **metric_kw):
    m = metric_tensor(p, **metric_kw)
    grad = m.ginv @ length_differential(ALPHA, p)
    e1 = -grad / m.norm(grad)
    e2 = m.J @ e1
    return e1, e2


def _collar_bound(ell: float) -> float:
    # distance from l_alpha = ell to the stratum, leading order of the collar metric
    return math.sqrt(2 * math.pi * ell)


def _shot_distance(p, theta, floor, step, budget, stratum_fraction=0.05, **metric_kw):
    """Upper bound ``min_s (s + d(q_s, stratum))`` along the geodesic shot at angle ``theta``."""
    e1, e2 = _descent_frame(p, **metric_kw)
    v = math.cos(theta) * e1 + math.sin(theta) * e2

    def rebounded(path):
        ells = [q.l_alpha for q in path.points]
        return ells[-1] > 2.0 * min(ells) and ells[-1] > ells[-2]

    path = geodesic_shoot(p, v, budget, step=step, floor=floor, stratum_fraction=stratum_fraction,
                          until=rebounded, **metric_kw)
    vals = [s + _collar_bound(q.l_alpha) for s, q, _ in path.samples]
    j = int(np.argmin(vals))
    return vals[j], j, path


def _twist_momentum(path: WPPath, **metric_kw) -> float:
    """``(g v)_tau`` at the closest approach; nearly conserved in the collar."""
    k = int(np.argmin([q.l_alpha for q in path.points]))
    _, q, v = path.samples[k]
    return float((metric_tensor(q, **metric_kw).g @ v)[1])


def distance_to_stratum(p: FNPoint, floor: float = STRATUM_FLOOR, step: float = 0.05,
                        bracket: float = 0.6, bisect_tol: float = 1e-3, angle_tol: float = 1e-6,
                        max_len: int = 6, stratum_fraction: float = 0.05,
                        **metric_kw) -> StratumDistance:
    """WP distance from ``p`` to the stratum ``l_alpha = 0``.

    Geodesics are shot in directions ``cos(t) e1 + sin(t) e2`` with ``e1`` the
    unit steepest descent of ``l_alpha`` and ``e2 = J e1``.  Each shot gives the
    upper bound ``s + (2 pi l_alpha(s))^(1/2)`` at every sample (triangle
    inequality with the collar estimate), which is continuous in ``t``.  Only
    the geodesic with vanishing twist momentum reaches the stratum; the others
    are turned back inside the collar.  So ``t`` is first bracketed by
    bisection on the sign of the twist momentum, then the bound is minimised
    by golden-section search inside the bracket.
    """
    metric_kw = dict(metric_kw, max_len=max_len)
    bound = _collar_bound(p.l_alpha)
    budget = 3.0 * bound + 1.0
    cache = {}

    def shot(t):
        if t not in cache:
            cache[t] = _shot_distance(p, t, floor, step, budget, stratum_fraction, **metric_kw)
        return cache[t]

    def sign(t):
        return math.copysign(1.0, _twist_momentum(shot(t)[2], **metric_kw))

    a, b = -bracket, bracket
    if sign(a) == sign(b):
        raise ChartError("twist momentum does not change sign over the angle bracket")
    sa = sign(a)
    while b - a > bisect_tol:
        c = 0.5 * (a + b)
        if sign(c) == sa:
            a = c
        else:
            b = c

    gr = (math.sqrt(5) - 1) / 2
    c, e = b - gr * (b - a), a + gr * (b - a)
    while b - a > angle_tol:
        if shot(c)[0] < shot(e)[0]:
            b, e = e, c
            c = b - gr * (b - a)
        else:
            a, c = c, e
            e = a + gr * (b - a)
    best = min(cache, key=lambda t: cache[t][0])
    dist, j, path = cache[best]
    path.samples = path.samples[:j + 1]
    return StratumDistance(dist, best, path, bound)


@dataclass
class BusemannReport:
    derivatives: np.ndarray
    min_derivative: float
    beta_monotonicity: str


def busemann_monotonicity(p: FNPoint, result: StratumDistance | None = None, **kw) -> BusemannReport:
    """``d/ds (2 pi l_alpha)^(1/2)`` along the realizing path, oriented from the stratum."""
    res = result or distance_to_stratum(p, **kw)
    der = []
    for _, q, v in res.path.samples:
        dl = length_differential(ALPHA, q) @ v
        der.append(-math.sqrt(2 * math.pi) * dl / (2 * math.sqrt(q.l_alpha)))
    der = np.array(der[::-1])
    return BusemannReport(der, float(der.min()),
                          "not applicable: no simple class disjoint from alpha on the punctured torus")


# -- systole and injectivity radius -------------------------------------------

def systole(p: FNPoint) -> tuple[float, tuple[int, int]]:
    """Shortest closed geodesic by descent in the Farey graph of slopes."""
    G = group_from_fn(p)
    L = lambda s: curve_length(G, primitive_class(*s))
    tri = [(1, 0), (0, 1), (1, 1)]
    while True:
        lens = [L(s) for s in tri]
        k = int(np.argmax(lens))
        a, b = [tri[i] for i in range(3) if i != k]
        flip = _farey_other(a, b, tri[k])
        if L(flip) < lens[k] - 1e-12:
            tri[k] = flip
        else:
            j = int(np.argmin(lens))
            return lens[j], tri[j]


def _farey_other(a, b, c):
    """The slope completing the other Farey triangle on edge ``(a, b)``."""
    s1 = (a[0] + b[0], a[1] + b[1])
    s2 = (a[0] - b[0], a[1] - b[1])
    canon = lambda s: s if (s[1] > 0 or (s[1] == 0 and s[0] > 0)) else (-s[0], -s[1])
    c = canon(c)
    return canon(s2) if canon(s1) == c else canon(s1)


def systole_brute_force(p: FNPoint, bound: int = 12) -> tuple[float, tuple[int, int]]:
    G = group_from_fn(p)
    best = (math.inf, None)
    for q in range(0, bound + 1):
        for pp in range(-bound, bound + 1):
            if math.gcd(pp, q) != 1 or (q == 0 and pp != 1):
                continue
            ell = curve_length(G, primitive_class(pp, q))
            if ell < best[0]:
                best = (ell, (pp, q))
    return best


@dataclass
class InjectivityReport:
    points: list
    ratios: np.ndarray
    min_ratio: float
    max_ratio: float


def injectivity_comparability(sample: Sequence[FNPoint], **kw) -> InjectivityReport:
    """Ratios of the distance to the stratum and the square root of the systole."""
    ratios = []
    for p in sample:
        d = distance_to_stratum(p, **kw).distance
        ratios.append(d / math.sqrt(systole(p)[0]))
    r = np.array(ratios)
    return InjectivityReport(list(sample), r, float(r.min()), float(r.max()))
