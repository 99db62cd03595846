"""Fourier analysis of harmonic Beltrami differentials on the cylinder cover.

A closed geodesic of length ``l`` has the annular cover ``H / <t -> e^l t>``.
The strip ``S = {0 < Im z < pi}`` covers it via ``t = e^z``, with hyperbolic
metric ``|dz| / sin(Im z)`` and the core geodesic on ``Im z = pi/2``.  A
harmonic Beltrami differential lifted to the strip is

    nu(z) = -4 sin(y)^2 conj(sum_n a_n exp(eps n z)),   eps = 2 pi i / l,

and corresponds to the quadratic differential ``phi(t) = sum_n a_n t^(eps n - 2)``
on the t-plane.

Coefficients are also handled in the balanced form ``b_n = a_n exp(-pi kappa_n / 2)``
with ``kappa_n = 2 pi n / l``; these are the Fourier coefficients along the core
geodesic and keep every quantity below finite for large ``|n|``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

# Constant ``c`` in ``phi = c * sum a_n t^(eps n - 2)`` relating the strip modes to the
# t-plane differential that enters A and Q.  Fixed by the exact term-by-term
# evaluation of the second variation (see ``hessian_direct``) and confirmed
# against geodesic finite differences in ``wplab.teich``.
MODE_NORMALIZATION = 1.0


class AliasingError(RuntimeError):
    pass


@dataclass
class FourierModes:
    """Coefficients ``a_n`` for ``n = -N..N`` of a strip Beltrami differential."""

    ell: float
    coeffs: np.ndarray
    # balanced coefficients when known exactly; a_n may overflow for large |kappa_n|
    core: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        if self.core is not None:
            self.core = np.asarray(self.core, dtype=complex)
        if self.ell <= 0:
            raise ValueError("ell must be positive")
        if self.coeffs.ndim != 1 or self.coeffs.size % 2 != 1:
            raise ValueError("coeffs must have odd length 2N+1")

    @property
    def N(self) -> int:
        return self.coeffs.size // 2

    @property
    def n(self) -> np.ndarray:
        return np.arange(-self.N, self.N + 1)

    @property
    def eps(self) -> complex:
        return 2j * math.pi / self.ell

    @property
    def kappa(self) -> np.ndarray:
        return 2 * math.pi * self.n / self.ell

    def core_coeffs(self) -> np.ndarray:
        """Balanced coefficients ``b_n = a_n exp(-pi kappa_n / 2)``."""
        if self.core is not None:
            return self.core
        with np.errstate(over="ignore", invalid="ignore"):
            b = self.coeffs * np.exp(-0.5 * math.pi * self.kappa)
        return np.where(self.coeffs == 0, 0.0, b)

    @classmethod
    def from_core(cls, ell: float, b) -> "FourierModes":
        b = np.asarray(b, dtype=complex)
        N = b.size // 2
        kappa = 2 * math.pi * np.arange(-N, N + 1) / ell
        with np.errstate(over="ignore", invalid="ignore"):
            a = b * np.exp(0.5 * math.pi * kappa)
        return cls(ell, np.where(b == 0, 0.0, a), core=b)

    @classmethod
    def single(cls, ell: float, n: int, value: complex = 1.0, N: int | None = None) -> "FourierModes":
        N = abs(n) if N is None else N
        c = np.zeros(2 * N + 1, dtype=complex)
        c[n + N] = value
        return cls(ell, c)

    def __add__(self, other: "FourierModes") -> "FourierModes":
        if other.ell != self.ell:
            raise ValueError("mode sets on different cylinders")
        N = max(self.N, other.N)
        core = None
        if self.core is not None and other.core is not None:
            core = _pad(self.core, N) + _pad(other.core, N)
        return FourierModes(self.ell, _pad(self.coeffs, N) + _pad(other.coeffs, N), core)

    def __mul__(self, c) -> "FourierModes":
        return FourierModes(self.ell, c * self.coeffs, None if self.core is None else c * self.core)

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return not np.any(self.coeffs)


def _pad(c, N):
    k = c.size // 2
    out = np.zeros(2 * N + 1, dtype=complex)
    out[N - k:N + k + 1] = c
    return out


@dataclass(frozen=True)
class StripPoint:
    x: float
    y: float

    def __post_init__(self):
        if not (0.0 < self.y < math.pi):
            raise ValueError("strip points need 0 < y < pi")

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)


@dataclass
class AnnulusQD:
    """Quadratic differential ``sum_n c_n t^(eps n - 2)`` invariant under ``t -> e^l t``."""

    ell: float
    modes: np.ndarray

    def __post_init__(self):
        self.modes = np.asarray(self.modes, dtype=complex)

    @classmethod
    def from_modes(cls, m: FourierModes) -> "AnnulusQD":
        return cls(m.ell, MODE_NORMALIZATION * m.coeffs)

    @property
    def n(self) -> np.ndarray:
        N = self.modes.size // 2
        return np.arange(-N, N + 1)

    def __call__(self, t):
        t = np.asarray(t, dtype=complex)
        return self.times_t2(t) / (t * t)

    def times_t2(self, t):
        """``t^2 phi(t) = sum c_n t^(eps n)``, bounded near ``t = 0``."""
        t = np.asarray(t, dtype=complex)
        e = 2j * math.pi / self.ell * self.n
        return np.sum(self.modes * np.exp(np.multiply.outer(np.log(t), e)), axis=-1)


def _z(z):
    return z.z if isinstance(z, StripPoint) else np.asarray(z, dtype=complex)


def _exp_modes(m: FourierModes, z):
    z = np.asarray(z, dtype=complex)
    return np.exp(np.multiply.outer(z, m.eps * m.n))


def beltrami_eval(m: FourierModes, z):
    """``-4 sin(y)^2 conj(sum a_n e^(eps n z))`` at strip points."""
    z = _z(z)
    s = np.sum(m.coeffs * _exp_modes(m, z), axis=-1)
    return -4.0 * np.sin(np.imag(z)) ** 2 * np.conj(s)


def potential_solution_fz(m: FourierModes, z):
    """``f_z`` for the solution of ``f_zbar = nu`` built mode by mode.

    ``f_z = 2 (e^z Re sum a_n e^((eps n - 1) z)/(eps n - 1)
             - e^-z Re sum a_n e^((eps n + 1) z)/(eps n + 1))``.
    """
    z = _z(z)
    s = m.eps * m.n
    E = _exp_modes(m, z)
    ez = np.exp(z)
    lower = np.sum(m.coeffs * E / (s - 1.0), axis=-1) / ez
    upper = np.sum(m.coeffs * E / (s + 1.0), axis=-1) * ez
    return 2.0 * (ez * lower.real - upper.real / ez)


def potential_solution(m: FourierModes, z):
    """A potential ``f`` with ``f_zbar = nu`` whose ``f_z`` is :func:`potential_solution_fz`."""
    z = np.asarray(_z(z), dtype=complex)
    zb = np.conj(z)
    a = m.coeffs
    ab = np.conj(a)
    s = m.eps * m.n
    zero = s == 0
    sn = np.where(zero, 2.0, s)
    # antiholomorphic integral of nu = conj(a) e^(-s zb) (e^(z - zb) - 2 + e^(zb - z))
    Em = np.exp(np.multiply.outer(zb, -s))
    Ep = np.exp(np.multiply.outer(z, s))
    up, dn = np.exp(z - zb), np.exp(zb - z)
    out = up * (Em @ (-ab / (1 + s))) + dn * (Em @ (ab / (1 - s)))
    out = out + Em @ np.where(zero, 0.0, 2.0 * ab / sn) + Ep @ np.where(zero, 0.0, 2.0 * a / (sn * (sn * sn - 1.0)))
    a0 = a[zero].sum()
    return out - 2.0 * np.conj(a0) * zb - 2.0 * a0 * z


# central-difference weights for the first derivative
_STENCILS = {
    2: np.array([-1 / 2, 0, 1 / 2]),
    4: np.array([1 / 12, -2 / 3, 0, 2 / 3, -1 / 12]),
    6: np.array([-1 / 60, 3 / 20, -3 / 4, 0, 3 / 4, -3 / 20, 1 / 60]),
    8: np.array([1 / 280, -4 / 105, 1 / 5, -4 / 5, 0, 4 / 5, -1 / 5, 4 / 105, -1 / 280]),
}


def check_potential(m: FourierModes, grid_res: int = 256, order: int = 8, margin: float = 0.1) -> float:
    """Largest ``|d/dzbar f - nu|`` on a grid, relative to ``max(1, max |nu|)``.

    ``f`` is the reconstructed potential and the derivative uses central
    differences of the given order with the grid spacing as step.  The grid
    covers one period in x and ``margin <= y <= pi - margin``.
    """
    if m.is_zero():
        return 0.0
    w = _STENCILS[order]
    k = np.arange(w.size) - w.size // 2
    x = np.linspace(0.0, m.ell, grid_res, endpoint=False)
    y = np.linspace(margin, math.pi - margin, grid_res)
    hx, hy = x[1] - x[0], y[1] - y[0]
    X, Y = np.meshgrid(x, y, indexing="ij")
    Z = X + 1j * Y
    fx = sum(wi * potential_solution(m, Z + ki * hx) for wi, ki in zip(w, k) if wi) / hx
    fy = sum(wi * potential_solution(m, Z + 1j * ki * hy) for wi, ki in zip(w, k) if wi) / hy
    dbar = 0.5 * (fx + 1j * fy)
    nu = beltrami_eval(m, Z)
    return float(np.max(np.abs(dbar - nu)) / max(1.0, float(np.max(np.abs(nu)))))


# -- operator A and the form Q ------------------------------------------------

def operator_A(phi: AnnulusQD, zeta):
    """``A[phi](zeta) = zeta^-1 int_0^zeta t^2 phi(t) dt`` mode by mode: ``zeta^(eps n)/(eps n + 1)``."""
    zeta = np.asarray(zeta, dtype=complex)
    e = 2j * math.pi / phi.ell * phi.n
    powers = np.exp(np.multiply.outer(np.log(zeta), e))
    return np.sum(phi.modes * powers / (e + 1.0), axis=-1)


def operator_A_quadrature(phi: AnnulusQD, zeta: complex) -> complex:
    """``A[phi]`` by integrating along the ray from 0 (checks the closed form)."""
    zeta = complex(zeta)

    # t = s zeta with s = exp(-u): the modes s^(eps n) stop oscillating infinitely often near 0
    def g(u, part):
        s = math.exp(-u)
        v = phi.times_t2(s * zeta) * s
        return v.real if part == 0 else v.imag

    # the integrand decays like exp(-u); beyond u = 60 it is below 1e-26 of the total
    re = integrate.quad(lambda u: g(u, 0), 0.0, 60.0, limit=400, epsabs=1e-14, epsrel=1e-12)[0]
    im = integrate.quad(lambda u: g(u, 1), 0.0, 60.0, limit=400, epsabs=1e-14, epsrel=1e-12)[0]
    return complex(re, im)


def q_weight(t, ell: float, weight: str = "invariant"):
    """Area weight of the form Q on the half-annulus.

    ``"invariant"`` uses ``(Im t)^2 / |t|^4``, invariant under ``t -> e^l t``;
    ``"literal"`` uses ``(Im t)^2``.
    """
    t = np.asarray(t, dtype=complex)
    if weight == "invariant":
        return t.imag ** 2 / np.abs(t) ** 4
    if weight == "literal":
        return t.imag ** 2
    raise ValueError(f"unknown weight {weight!r}")


def form_Q(beta, delta, ell: float, weight: str = "invariant", order: int = 96, panels: int = 4) -> complex:
    """``int_{1<|t|<e^l, Im t>0} beta conj(delta) w(t) dA_euclid`` in polar coordinates."""
    s, ws = _composite(order, panels, 0.0, ell)          # s = log r
    th, wth = _composite(order, panels, 0.0, math.pi)
    S, TH = np.meshgrid(s, th, indexing="ij")
    t = np.exp(S + 1j * TH)
    jac = np.exp(2 * S)                                    # r dr = r^2 ds
    W = np.outer(ws, wth) * jac * q_weight(t, ell, weight)
    return complex(np.sum(W * beta(t) * np.conj(delta(t))))


def _composite(n, panels, a, b):
    x, w = np.polynomial.legendre.leggauss(n)
    edges = np.linspace(a, b, panels + 1)
    xs = np.concatenate([0.5 * (hi - lo) * x + 0.5 * (hi + lo) for lo, hi in zip(edges[:-1], edges[1:])])
    ws = np.concatenate([0.5 * (hi - lo) * w for lo, hi in zip(edges[:-1], edges[1:])])
    return xs, ws


def _S(kappa):
    """``sinh(pi k) / (2 k (1 + k^2))`` with the limit ``pi/2`` at 0; inf on overflow."""
    kappa = np.abs(np.asarray(kappa, dtype=float))
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        v = np.sinh(np.pi * kappa) / (2 * kappa * (1 + kappa ** 2))
    return np.where(kappa < 1e-8, np.pi / 2, v)


def angular_J(kappa):
    """``int_0^pi exp(-2 k th) sin(th)^2 d th = (1 - e^(-2 pi k)) / (4 k (k^2 + 1))``."""
    kappa = np.asarray(kappa, dtype=float)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        v = -np.expm1(-2 * np.pi * kappa) / (4 * kappa * (kappa ** 2 + 1))
    return np.where(np.abs(kappa) < 1e-8, np.pi / 2, v)


def q_modes(m: FourierModes):
    """Closed forms of ``Q(A, A)`` and ``Q(A, conj A)`` (invariant weight).

    The form is diagonal in the modes: ``Q(A_m, A_n) = delta_mn l J(k_n) / (1 + k_n^2)``
    and ``Q(A, conj A) = (l pi / 2) sum a_n a_-n / (1 + k_n^2)``.
    """
    b = MODE_NORMALIZATION * m.core_coeffs()
    k = m.kappa
    qaa = m.ell * np.sum(_S(k) * np.abs(b) ** 2 / (1 + k ** 2))
    qab = m.ell * math.pi / 2 * np.sum(b * b[::-1] / (1 + k ** 2))
    return float(qaa), complex(qab)


@dataclass
class ModeContribution:
    n: int                 # pairs {n, -n}, n >= 0
    hessian: float         # contribution to the Riemannian Hessian
    complex_hessian: float
    ratio: float           # hessian / complex_hessian, in [1, 3]


def _inv_S(kappa: float) -> float:
    """``1 / S(kappa) = 2 k (1 + k^2) / sinh(pi k)`` without overflow."""
    k = abs(kappa)
    if k < 1e-8:
        return 2 / math.pi
    return 4 * k * (1 + k * k) * math.exp(-math.pi * k) / -math.expm1(-2 * math.pi * k)


def pair_contribution(ell: float, n: int, c_plus: complex, c_minus: complex = 0.0) -> ModeContribution:
    """Hessian formula restricted to the modes ``{n, -n}``, in Q-normalised coefficients.

    ``c_n = b_n sqrt(S(kappa_n))`` makes ``Q(A_n, A_n) = l |c_n|^2 / (1 + kappa_n^2)``, so
    the contribution stays finite for every ``kappa`` (``b_n`` itself over- or
    underflows once ``pi |kappa| / 2`` exceeds ~700).  For ``n = 0`` only ``c_plus``
    is used.
    """
    n = abs(n)
    k = 2 * math.pi * n / ell
    cp, cm = complex(c_plus), complex(c_minus)
    if n == 0:
        mass, cross = abs(cp) ** 2, (cp * cp).real
    else:
        mass, cross = abs(cp) ** 2 + abs(cm) ** 2, 2.0 * (cp * cm).real
    if mass == 0:
        return ModeContribution(n, 0.0, 0.0, float("nan"))
    cross *= _inv_S(k)                          # Re b_n b_-n scaled by the same factor
    qaa = ell * mass / (1 + k * k)
    qab = ell * math.pi / 2 * cross / (1 + k * k)
    hess = 32 / math.pi * qaa - 16 / math.pi * qab
    cplx = 16 / math.pi * qaa
    return ModeContribution(n, hess, cplx, 2.0 - (math.pi / 2) * cross / mass)


def mode_contributions(m: FourierModes) -> list[ModeContribution]:
    """Per-Laurent-pair split of the Hessian formula."""
    b = MODE_NORMALIZATION * m.core_coeffs()
    N = m.N
    out = []
    for n in range(0, N + 1):
        k = 2 * math.pi * n / m.ell
        S = float(_S(k))
        bp, bm = b[N + n], b[N - n]
        if math.isfinite(S):
            root = math.sqrt(S)
            out.append(pair_contribution(m.ell, n, bp * root, bm * root))
            continue
        # contribution overflows; only the ratio is meaningful
        part = pair_contribution(m.ell, n, bp, bm)
        inf = math.inf if part.complex_hessian > 0 else 0.0
        out.append(ModeContribution(n, inf, inf, 2.0 if inf else float("nan")))
    return out


def hessian_riemannian(m: FourierModes) -> float:
    """``(32/pi) Q(A, A) - (16/pi) Re Q(A, conj A)`` with ``A = A[phi]`` (closed form)."""
    if m.is_zero():
        return 0.0
    qaa, qab = q_modes(m)
    return 32 / math.pi * qaa - 16 / math.pi * qab.real


def hessian_riemannian_quadrature(m: FourierModes, **kw) -> float:
    """The same formula with Q evaluated by quadrature of ``A`` on the half-annulus."""
    if m.is_zero():
        return 0.0
    phi = AnnulusQD.from_modes(m)
    A = lambda t: operator_A(phi, t)
    Ab = lambda t: np.conj(operator_A(phi, t))
    qaa = form_Q(A, A, m.ell, **kw)
    qab = form_Q(A, Ab, m.ell, **kw)
    return 32 / math.pi * qaa.real - 16 / math.pi * qab.real


def hessian_direct(m: FourierModes, order: int = 64, panels: int = 4) -> float:
    """Second variation ``(2/pi) Re int_F nu f_z i dz dzbar`` over one period of the strip."""
    x, wx = _composite(order, panels, 0.0, m.ell)
    y, wy = _composite(order, panels, 0.0, math.pi)
    X, Y = np.meshgrid(x, y, indexing="ij")
    Z = X + 1j * Y
    val = np.sum(np.outer(wx, wy) * beltrami_eval(m, Z) * potential_solution_fz(m, Z))
    return float(4.0 / math.pi * val.real)  # i dz dzbar = 2 dx dy


def rotate(m: FourierModes, c: complex) -> FourierModes:
    """Modes of ``c * nu``: the coefficients transform by ``conj(c)``."""
    return m * np.conj(c)


def hessian_complex(m: FourierModes) -> float:
    """Levi form ``ddbar l(nu, nu) = (Hess(nu) + Hess(i nu)) / 4 = (16/pi) Q(A, A)``."""
    if m.is_zero():
        return 0.0
    qaa, _ = q_modes(m)
    return 16 / math.pi * qaa


def hessian_complex_two_route(m: FourierModes) -> float:
    """``(Hess(nu) + Hess(i nu)) / 4`` from two evaluations of the Riemannian formula."""
    return 0.25 * (hessian_riemannian(m) + hessian_riemannian(rotate(m, 1j)))


def petersson_weight(m: FourierModes) -> float:
    """``int_{1<|t|<e^l} |phi|^2 (Im t)^4 |t|^-2 dA_euclid`` (closed form, diagonal)."""
    b = MODE_NORMALIZATION * m.core_coeffs()
    k = m.kappa
    return float(m.ell * np.sum(np.abs(b) ** 2 * _sin4_weight(k)))


def _sin4_weight(kappa):
    """``e^(pi k) int_0^pi e^(-2 k th) sin(th)^4 d th`` (balanced, even in k)."""
    kappa = np.abs(np.asarray(kappa, dtype=float))
    # int_0^pi e^{-a th} sin^4 = 24 (1 - e^{-a pi}) / (a (a^2 + 4)(a^2 + 16)), a = 2k
    a = 2 * kappa
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        v = 48 * np.sinh(np.pi * kappa) / (a * (a * a + 4) * (a * a + 16))
    return np.where(kappa < 1e-8, 3 * np.pi / 8, v)


@dataclass
class HermitianComparison:
    lhs: float
    rhs: float
    per_mode_ratio: np.ndarray   # lhs_n / rhs_n for each n = -N..N
    band: tuple[float, float]


def hermitian_comparison(m: FourierModes) -> HermitianComparison:
    """``Q(A, A)`` against the weighted Petersson integral of ``phi``, mode by mode."""
    k = m.kappa
    # S / (1 + k^2) over the sin^4 weight; the sinh factors cancel
    ratio = (k ** 2 + 4) / (3 * (k ** 2 + 1))
    if m.is_zero():
        return HermitianComparison(0.0, 0.0, ratio, (float(ratio.min()), float(ratio.max())))
    qaa, _ = q_modes(m)
    return HermitianComparison(qaa, petersson_weight(m), ratio, (float(ratio.min()), float(ratio.max())))


def hermitian_comparison_quadrature(m: FourierModes, **kw) -> tuple[float, float]:
    phi = AnnulusQD.from_modes(m)
    A = lambda t: operator_A(phi, t)
    lhs = form_Q(A, A, m.ell, **kw).real
    s, ws = _composite(96, 4, 0.0, m.ell)
    th, wth = _composite(96, 4, 0.0, math.pi)
    S, TH = np.meshgrid(s, th, indexing="ij")
    t = np.exp(S + 1j * TH)
    W = np.outer(ws, wth) * np.exp(2 * S) * t.imag ** 4 / np.abs(t) ** 2
    rhs = float(np.sum(W * np.abs(phi(t)) ** 2))
    return lhs, rhs


# -- lifting surface differentials to the cylinder -----------------------------

@dataclass
class FourierAnalysis:
    modes: FourierModes
    reconstruction_error: float
    samples: int


def _strip_line(nu, Nm, ell, y, M):
    """``Theta_s`` on ``Im z = y`` at ``M`` equispaced points of one period."""
    from .domain import inv2, apply

    x = np.arange(M) * ell / M
    t = np.exp(x + 1j * y)
    Ninv = inv2(Nm)
    cz = Ninv[1, 0] * t + Ninv[1, 1]
    nu_t = np.asarray(nu(apply(Ninv, t))) * (cz * cz / np.conj(cz * cz))
    nu_s = nu_t * np.exp(-2j * y)
    return x, np.conj(nu_s) / math.sin(y) ** 2


def _line_coeffs(vals, N):
    M = vals.size
    c = np.fft.fft(vals) / M
    freqs = np.fft.fftfreq(M, d=1.0 / M).astype(int)
    out = np.zeros(2 * N + 1, dtype=complex)
    keep = np.abs(freqs) <= N
    out[freqs[keep] + N] = c[keep]
    return out, c, freqs


def fourier_analyze(nu, cs, N: int = 32, samples: int | None = None, alias_tol: float = 1e-6,
                    depth: float = 6.0) -> FourierAnalysis:
    """Fourier coefficients of ``nu`` on the cylinder cover of ``cs.curve``.

    ``nu`` is a callable Beltrami differential on the upper half-plane (original
    coordinates).  The expansion ``Theta_s = sum a_n exp(eps n z)`` is read off
    along horizontal lines of the strip: the core geodesic for low modes and,
    for ``|kappa_n| > 2 depth / pi``, the line at distance ``depth / |kappa_n|``
    from the boundary the mode is concentrated on.  This keeps the balanced
    coefficients well conditioned.  Aliasing is checked on the core line.
    """
    from .series import _normaliser, curve_matrix

    Nm = _normaliser(curve_matrix(cs.group, cs.curve))
    ell = cs.ell
    M = samples or max(8 * N, 64)
    x, core = _strip_line(nu, Nm, ell, 0.5 * math.pi, M)
    # Theta_s = -4 sum a_n exp(eps n z)
    b, c, freqs = _line_coeffs(core / -4.0, N)
    scale = max(float(np.max(np.abs(c))), 1e-300)
    beyond = np.abs(c[np.abs(freqs) > N])
    if beyond.size and np.any(core) and beyond.max() > alias_tol * scale:
        raise AliasingError(f"modes beyond N={N} carry {beyond.max() / scale:.2e} of the spectrum; raise N")
    n = np.arange(-N, N + 1)
    kappa = 2 * math.pi * n / ell
    lines: dict[float, list[int]] = {}
    for j, k in enumerate(kappa):
        if abs(k) > 2 * depth / math.pi:
            y = depth / abs(k) if k > 0 else math.pi - depth / abs(k)
            lines.setdefault(round(y, 12), []).append(j)
    for y, idx in lines.items():
        _, vals = _strip_line(nu, Nm, ell, y, M)
        cy = _line_coeffs(vals / -4.0, N)[0]
        # coefficient on Im z = y is a_n exp(-kappa y); balance to the core line
        b[idx] = cy[idx] * np.exp(kappa[idx] * (y - 0.5 * math.pi))
    recon = np.sum(b[None, :] * np.exp(1j * np.outer(x, kappa)), axis=1)
    err = float(np.max(np.abs(recon - core / -4.0)) / scale) if np.any(core) else 0.0
    return FourierAnalysis(FourierModes.from_core(ell, b), err, M)


def modes_field(m: FourierModes, Nm: np.ndarray):
    """Beltrami differential on H (original coordinates) of a pure strip expansion.

    ``Nm`` maps the original coordinates to ones where the cylinder axis is ``(0, inf)``.
    """
    from .domain import apply

    def nu(u):
        u = np.asarray(u, dtype=complex)
        t = apply(Nm, u)
        z = np.log(t)
        nu_s = beltrami_eval(m, z)
        nu_t = nu_s * np.exp(2j * z.imag)           # undo conj(t')/t' = exp(-2 i y)
        cz = Nm[1, 0] * u + Nm[1, 1]
        return nu_t * (cz * cz / np.conj(cz * cz))
    return nu
