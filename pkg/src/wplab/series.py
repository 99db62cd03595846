"""Coset sums over a punctured-torus group.

Lifts of a simple closed geodesic ``sigma`` are the images ``w . axis(S)`` for
``w`` ranging over coset representatives of ``Gamma / <S>``.  With a free basis
``(S, T)`` of the group whose first element is the curve word, these are the
reduced words in ``S, T`` that do not end in ``S^{+-1}``; every lift appears
exactly once.  The truncation parameter ``max_word_len`` counts letters in
that basis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fuchsian import (
    CurveClass,
    PuncturedTorusGroup,
    free_basis,
    length_from_trace,
    primitive_class,
)
from .hyperbolic import GeodesicEnds, HPoint, _exp_m2d, _omega
from .words import nielsen_is_basis, reduced_words
from .domain import FundamentalDomain, SaturatedLifts, SurfaceRule, apply, inv2, surface_rule


class ConvergenceError(RuntimeError):
    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


@dataclass
class SeriesValue:
    value: float | complex
    tail_bound: float
    terms_used: int


def fixed_points_h(m: np.ndarray) -> np.ndarray:
    """Homogeneous fixed points of hyperbolic matrices, shape ``(..., 2, 2)``.

    Column 0 is the repelling and column 1 the attracting fixed point.
    """
    m = np.asarray(m, dtype=float)
    p, q, r, s = m[..., 0, 0], m[..., 0, 1], m[..., 1, 0], m[..., 1, 1]
    tr = p + s
    root = np.sqrt(tr * tr - 4.0) * np.sign(tr)
    out = np.empty(m.shape)
    small = np.abs(r) <= 1e-14 * np.maximum(np.abs(p), np.abs(s))
    # generic case: t = (p - s -+ root) / (2 r)
    with np.errstate(invalid="ignore", divide="ignore"):
        out[..., 0, 0] = p - s - root
        out[..., 1, 0] = 2.0 * r
        out[..., 0, 1] = p - s + root
        out[..., 1, 1] = 2.0 * r
    if np.any(small):
        # upper triangular: fixed points q / (s - p) and infinity
        sm = small
        big_first = np.abs(p[sm]) > np.abs(s[sm])
        fin = np.stack([q[sm], s[sm] - p[sm]], axis=-1)
        inf = np.stack([np.ones(sm.sum()), np.zeros(sm.sum())], axis=-1)
        col0 = np.where(big_first[:, None], fin, inf)
        col1 = np.where(big_first[:, None], inf, fin)
        out[sm, :, 0] = col0
        out[sm, :, 1] = col1
    return out


def axis_h(m: np.ndarray) -> np.ndarray:
    return fixed_points_h(m)


def curve_matrix(G: PuncturedTorusGroup, curve: CurveClass) -> np.ndarray:
    return G.word_matrix(curve.word)


def _basis_mats(G: PuncturedTorusGroup, curve: CurveClass):
    S, T = free_basis(curve.p, curve.q)
    return G.word_matrix(S), G.word_matrix(T)


def _ends_from_h(h: np.ndarray):
    return h[..., 0, 0], h[..., 1, 0], h[..., 0, 1], h[..., 1, 1]


@dataclass
class CosetSum:
    """The lifted leaf family of a simple closed geodesic.

    ``reps`` are coset representatives and ``ends`` the homogeneous endpoints
    of the corresponding lifts ``rep . axis(sigma)``.
    """

    curve: CurveClass
    group: PuncturedTorusGroup
    max_word_len: int
    reps: np.ndarray
    ends: np.ndarray
    levels: np.ndarray
    weight: float = 1.0
    ell: float = field(init=False)

    def __post_init__(self):
        self.ell = length_from_trace(curve_matrix(self.group, self.curve))

    @property
    def terms(self) -> int:
        return self.reps.shape[0]

    def lifts(self) -> list[GeodesicEnds]:
        out = []
        for a1, a2, b1, b2 in zip(*_ends_from_h(self.ends)):
            ea = a1 / a2 if a2 != 0 else math.inf
            eb = b1 / b2 if b2 != 0 else math.inf
            out.append(GeodesicEnds(ea, eb))
        return out

    # -- sums ---------------------------------------------------------------

    def _level_sums(self, z, fn):
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        L = self.max_word_len
        by_level = np.zeros((L + 1,) + z.shape, dtype=complex if fn is _omega else float)
        a1, a2, b1, b2 = _ends_from_h(self.ends)
        chunk = max(1, 2_000_000 // max(1, z.size))
        for start in range(0, self.terms, chunk):
            sl = slice(start, start + chunk)
            vals = fn(z[..., None], a1[sl], a2[sl], b1[sl], b2[sl])
            lev = self.levels[sl]
            for k in np.unique(lev):
                by_level[k] += vals[..., lev == k].sum(axis=-1)
        return by_level

    @staticmethod
    def _tail(by_level):
        mags = np.abs(by_level)
        last, prev = mags[-1], mags[-2] if mags.shape[0] > 1 else mags[-1]
        with np.errstate(invalid="ignore", divide="ignore"):
            ratio = np.where(prev > 0, last / prev, 0.0)
        ratio = np.clip(ratio, 0.0, 0.95)
        return last * ratio / (1.0 - ratio)

    def p_values(self, z):
        """P_sigma at points ``z`` (complex array); returns ``(values, tail_bounds)``."""
        lv = self._level_sums(z, _exp_m2d)
        return self.weight * lv.sum(axis=0), self.weight * self._tail(lv)

    def theta_values(self, z):
        """Relative Poincaré series ``sum_L (a-b)^2/((z-a)(z-b))^2`` at ``z``."""
        lv = self._level_sums(z, _omega)
        return self.weight * lv.sum(axis=0), self.weight * self._tail(lv)

    def scaled(self, weight: float) -> "CosetSum":
        out = CosetSum(self.curve, self.group, self.max_word_len, self.reps, self.ends, self.levels,
                       self.weight * weight)
        return out


def build_coset_sum(G: PuncturedTorusGroup, curve: CurveClass | tuple, max_word_len: int = 8) -> CosetSum:
    if not isinstance(curve, CurveClass):
        curve = primitive_class(*curve)
    S, T = _basis_mats(G, curve)
    mats, first, last, length = reduced_words(S, T, max_word_len)
    keep = (last != 0) & (last != 2)  # drop words ending in S^{+-1}
    mats, length = mats[keep], length[keep]
    ends = np.einsum("nij,jk->nik", mats, axis_h(S))
    return CosetSum(curve, G, max_word_len, mats, ends, length)


def p_sigma(z, cs: CosetSum, tol: float | None = None) -> SeriesValue:
    zz = z.z if isinstance(z, HPoint) else complex(z)
    val, tail = cs.p_values(np.array([zz]))
    out = SeriesValue(float(val[0]), float(tail[0]), cs.terms)
    if tol is not None and out.tail_bound > tol:
        raise ConvergenceError(f"P_sigma tail {out.tail_bound:.3g} exceeds {tol:.3g}", out)
    return out


def p_multicurve(z, curves, tol: float | None = None) -> SeriesValue:
    """Weighted sum of P over ``(CosetSum, weight)`` pairs."""
    value, tail, terms = 0.0, 0.0, 0
    for cs, w in curves:
        if w <= 0:
            raise ValueError("weights must be positive")
        sv = p_sigma(z, cs)
        value += w * sv.value
        tail += w * sv.tail_bound
        terms += sv.terms_used
    out = SeriesValue(value, tail, terms)
    if tol is not None and tail > tol:
        raise ConvergenceError(f"P tail {tail:.3g} exceeds {tol:.3g}", out)
    return out


def converged_coset_sum(G, curve, z, start_len: int = 4, rtol: float = 1e-4, cap: int = 11) -> CosetSum:
    """Increase the truncation until P at ``z`` changes by less than ``rtol``."""
    L = start_len
    prev = build_coset_sum(G, curve, L)
    pv = prev.p_values(np.atleast_1d(z))[0]
    while L < cap:
        L = min(cap, L + 2)
        cur = build_coset_sum(G, curve, L)
        cv = cur.p_values(np.atleast_1d(z))[0]
        if np.max(np.abs(cv - pv) / np.abs(cv)) < rtol:
            return cur
        prev, pv = cur, cv
    raise ConvergenceError(f"P_sigma not converged at max_word_len={cap}", prev)


# -- unfolded pairing of theta series -----------------------------------------

def riemann_kernel(u):
    """``u log|(u+1)/(u-1)| - 2``: real part of the half-plane pairing of two
    lift differentials, divided by pi/2, as a function of their position
    invariant ``u`` (cos of the angle, or cosh of the distance)."""
    u = np.asarray(u, dtype=float)
    out = np.empty_like(u)
    far = u >= 4.0
    near = ~far
    uf = u[far]
    inv2 = 1.0 / (uf * uf)
    acc = np.zeros_like(uf)
    term = inv2.copy()
    for k in range(1, 30):
        acc += 2.0 * term / (2 * k + 1)
        term *= inv2
    out[far] = acc
    un = u[near]
    with np.errstate(divide="ignore"):
        out[near] = un * np.log(np.abs((un + 1.0) / (un - 1.0))) - 2.0
    return out


def position_invariant(X: np.ndarray, M: np.ndarray) -> np.ndarray:
    """``|2 tr(XM) - tr X tr M| / sqrt((tr X^2 - 4)(tr M^2 - 4))`` for axes of X and M."""
    trX = np.trace(X)
    trM = M[..., 0, 0] + M[..., 1, 1]
    trXM = np.einsum("ij,nji->n", X, M)
    return np.abs(2.0 * trXM - trX * trM) / np.sqrt((trX * trX - 4.0) * (trM * trM - 4.0))


def _normaliser(X: np.ndarray) -> np.ndarray:
    """Unit-determinant map sending the axis of ``X`` to ``(0, inf)``."""
    fx = fixed_points_h(X)
    N = np.linalg.inv(np.array([[fx[0, 0], fx[0, 1]], [fx[1, 0], fx[1, 1]]]))
    d = np.linalg.det(N)
    if d < 0:
        N = np.diag([-1.0, 1.0]) @ N
        d = -d
    return N / math.sqrt(d)


def _signed_cosines(X: np.ndarray, ends: np.ndarray) -> np.ndarray:
    """``(a + b)/(b - a)`` for lifts crossing the axis of X (in coordinates where it is
    ``(0, inf)``), zero for disjoint ones.  This is the cosine of the counterclockwise
    angle from the axis to the lift, which does not depend on orientations."""
    N = _normaliser(X)
    h = np.einsum("ij,njk->nik", N, ends)
    a = h[:, 0, 0] / h[:, 1, 0]
    b = h[:, 0, 1] / h[:, 1, 1]
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    crossing = (lo < 0) & (hi > 0)
    return np.where(crossing, (lo + hi) / (hi - lo), 0.0)


@dataclass
class PairingSum:
    """Unfolded pairing of two theta series.

    ``value`` is the WP inner product of the length gradients; ``imag_sum`` is the
    sum of signed intersection cosines (the twist derivative of one length along
    the other).
    """

    value: float
    diagonal: float
    invariants: np.ndarray
    method: str
    imag_sum: float = 0.0

    @property
    def terms(self) -> int:
        return self.invariants.size

    def beltrami_pairing(self) -> complex:
        """``<nu_1, nu_2>`` for the harmonic Beltrami differentials of the two curves."""
        return complex(math.pi ** 2 / 4.0 * self.value, math.pi ** 2 / 2.0 * self.imag_sum)


def _conj_many(w: np.ndarray, Y: np.ndarray) -> np.ndarray:
    return np.einsum("nij,jk,nkl->nil", w, Y, inv_many(w))


def inv_many(w: np.ndarray) -> np.ndarray:
    winv = np.empty_like(w)
    winv[..., 0, 0], winv[..., 1, 1] = w[..., 1, 1], w[..., 0, 0]
    winv[..., 0, 1], winv[..., 1, 0] = -w[..., 0, 1], -w[..., 1, 0]
    return winv


def double_coset_lifts(G: PuncturedTorusGroup, c1: CurveClass, c2: CurveClass, max_len: int):
    """Representatives of ``<c1> \\ Gamma / <c2>`` as lift endpoints of c2.

    Returns ``(X, ends, method)``: the c1 matrix and homogeneous endpoints of one
    c2-lift per double coset (the identity coset is excluded when the classes agree).
    """
    same = (c1.p, c1.q) == (c2.p, c2.q)
    if same:
        S, T = _basis_mats(G, c1)
        mats, first, last, length = reduced_words(S, T, max_len, include_empty=False)
        keep = (first != 0) & (first != 2) & (last != 0) & (last != 2)
        return S, np.einsum("nij,jk->nik", mats[keep], fixed_points_h(S)), "normal-form"
    if nielsen_is_basis(c1.word, c2.word):
        Xm, Ym = G.word_matrix(c1.word), G.word_matrix(c2.word)
        mats, first, last, length = reduced_words(Xm, Ym, max_len)
        keep = (first != 0) & (first != 2) & (last != 1) & (last != 3)
        return Xm, np.einsum("nij,jk->nik", mats[keep], fixed_points_h(Ym)), "normal-form"
    X, Y = curve_matrix(G, c1), curve_matrix(G, c2)
    return X, _double_coset_ends_dedupe(G, X, Y, max_len), "dedupe"


def _double_coset_ends_dedupe(G, X, Y, max_len):
    A, B = G.gen_a.matrix, G.gen_b.matrix
    mats, *_ = reduced_words(A, B, max_len)
    N = _normaliser(X)
    lx = length_from_trace(X)
    ends = np.einsum("njk,kl->njl", mats, fixed_points_h(Y))
    h = np.einsum("ij,njk->nik", N, ends)
    with np.errstate(divide="ignore", invalid="ignore"):
        a, b = h[:, 0, 0] / h[:, 1, 0], h[:, 0, 1] / h[:, 1, 1]
    ok = np.isfinite(a) & np.isfinite(b) & (np.abs(a) > 1e-300) & (np.abs(b) > 1e-300)
    idx_ok = np.flatnonzero(ok)
    a, b = a[ok], b[ok]
    u = np.abs((a + b) / (b - a))
    ticks = 10 ** 5
    phase = np.round(0.5 * np.log(np.abs(a * b)) / lx * ticks).astype(np.int64) % ticks
    sign = np.sign(a) + 2 * np.sign(b)
    key = np.stack([np.round(np.log(u) * 1e6), phase, sign], axis=1)
    _, idx = np.unique(key, axis=0, return_index=True)
    return ends[idx_ok[np.sort(idx)]]


def double_coset_invariants(G: PuncturedTorusGroup, c1: CurveClass, c2: CurveClass, max_len: int):
    """Position invariants ``u`` of the double cosets (see :func:`double_coset_lifts`)."""
    X, ends, method = double_coset_lifts(G, c1, c2, max_len)
    N = _normaliser(X)
    h = np.einsum("ij,njk->nik", N, ends)
    a = h[:, 0, 0] / h[:, 1, 0]
    b = h[:, 0, 1] / h[:, 1, 1]
    return np.abs((a + b) / (b - a)), method


def grad_pairing(G: PuncturedTorusGroup, c1, c2, max_len: int = 8) -> PairingSum:
    """WP pairing of length gradients by unfolding the theta series.

    ``<grad l1, grad l2> = (2/pi) (delta * l1 + sum R(u))`` over double cosets.
    """
    c1 = c1 if isinstance(c1, CurveClass) else primitive_class(*c1)
    c2 = c2 if isinstance(c2, CurveClass) else primitive_class(*c2)
    X, ends, method = double_coset_lifts(G, c1, c2, max_len)
    N = _normaliser(X)
    h = np.einsum("ij,njk->nik", N, ends)
    a = h[:, 0, 0] / h[:, 1, 0]
    b = h[:, 0, 1] / h[:, 1, 1]
    u = np.abs((a + b) / (b - a))
    cs = _signed_cosines(X, ends)
    diag = length_from_trace(curve_matrix(G, c1)) if (c1.p, c1.q) == (c2.p, c2.q) else 0.0
    total = diag + float(np.sort(riemann_kernel(u))[::-1].sum())
    return PairingSum(2.0 / math.pi * total, 2.0 / math.pi * diag, u, method, float(cs.sum()))


def riemann_kernel_derivative(u):
    """``d/du`` of :func:`riemann_kernel`."""
    u = np.asarray(u, dtype=float)
    out = np.empty_like(u)
    far = u >= 4.0
    uf = u[far]
    inv2 = 1.0 / (uf * uf)
    acc = np.zeros_like(uf)
    term = inv2 / uf
    for k in range(1, 30):
        acc -= 4.0 * k * term / (2 * k + 1)
        term *= inv2
    out[far] = acc
    un = u[~far]
    with np.errstate(divide="ignore"):
        out[~far] = np.log(np.abs((un + 1.0) / (un - 1.0))) - 2.0 * un / (un * un - 1.0)
    return out


def _word_jets(X, dX, Y, dY, max_len: int, include_empty: bool = True):
    """:func:`reduced_words` carrying first derivatives (leading derivative axis of length 2)."""
    from .fuchsian import adjugate

    gens = np.stack([X, Y, adjugate(X), adjugate(Y)])
    dgens = np.stack([dX, dY, adjugate(dX), adjugate(dY)])
    mats, dmats, first, last = [np.eye(2)[None]], [np.zeros((1, 2, 2, 2))], [np.array([-1])], [np.array([-1])]
    cur, dcur, cf, cl = gens.copy(), dgens.copy(), np.arange(4), np.arange(4)
    inv_letter = np.array([2, 3, 0, 1])
    for k in range(1, max_len + 1):
        mats.append(cur)
        dmats.append(dcur)
        first.append(cf)
        last.append(cl)
        if k == max_len:
            break
        n = cur.shape[0]
        letters = np.tile(np.arange(4), n)
        parent = np.repeat(np.arange(n), 4)
        keep = letters != inv_letter[cl[parent]]
        letters, parent = letters[keep], parent[keep]
        dcur = (np.einsum("nkij,njl->nkil", dcur[parent], gens[letters])
                + np.einsum("nij,nkjl->nkil", cur[parent], dgens[letters]))
        cur = np.einsum("nij,njk->nik", cur[parent], gens[letters])
        cf, cl = cf[parent], letters
    out = [np.concatenate(a) for a in (mats, dmats, first, last)]
    if not include_empty:
        out = [a[1:] for a in out]
    return out


def pairing_jet(fn, c1, c2, max_len: int = 8) -> tuple[float, np.ndarray]:
    """``<grad l1, grad l2>`` and its exact gradient in FN coordinates.

    Uses the same double-coset truncation as :func:`grad_pairing` (normal-form
    pairs only) and differentiates each term through the trace form of the
    position invariant.
    """
    from .fuchsian import adjugate, length_jet, word_jet

    c1 = c1 if isinstance(c1, CurveClass) else primitive_class(*c1)
    c2 = c2 if isinstance(c2, CurveClass) else primitive_class(*c2)
    same = (c1.p, c1.q) == (c2.p, c2.q)
    if same:
        sw, tw = free_basis(c1.p, c1.q)
        S, dS = word_jet(fn, sw)
        T, dT = word_jet(fn, tw)
        w, dw, first, last = _word_jets(S, dS, T, dT, max_len, include_empty=False)
        keep = (first != 0) & (first != 2) & (last != 0) & (last != 2)
        X, dX, Y, dY = S, dS, S, dS
    elif nielsen_is_basis(c1.word, c2.word):
        X, dX = word_jet(fn, c1.word)
        Y, dY = word_jet(fn, c2.word)
        w, dw, first, last = _word_jets(X, dX, Y, dY, max_len)
        keep = (first != 0) & (first != 2) & (last != 1) & (last != 3)
    else:
        raise ValueError("pairing_jet needs equal classes or a Nielsen basis pair")
    w, dw = w[keep], dw[keep]
    wi = adjugate(w)
    M = np.einsum("nij,jk,nkl->nil", w, Y, wi)
    dwi = adjugate(dw)  # derivative of the inverse word
    dM = (np.einsum("nkij,jl,nlm->nkim", dw, Y, wi)
          + np.einsum("nij,kjl,nlm->nkim", w, dY, wi)
          + np.einsum("nij,jl,nklm->nkim", w, Y, dwi))
    trX, dtrX = np.trace(X), np.trace(dX, axis1=1, axis2=2)
    trY, dtrY = np.trace(Y), np.trace(dY, axis1=1, axis2=2)
    trXM = np.einsum("ij,nji->n", X, M)
    dtrXM = np.einsum("kij,nji->nk", dX, M) + np.einsum("ij,nkji->nk", X, dM)
    num = 2.0 * trXM - trX * trY
    dnum = 2.0 * dtrXM - (dtrX * trY + trX * dtrY)[None, :]
    # tr^2 - 4 = 4 sinh^2(l/2), formed from lengths to avoid cancellation
    lX, dlX = length_jet(fn, c1)
    lY, dlY = (lX, dlX) if same else length_jet(fn, c2)
    sX, sY = 2.0 * math.sinh(lX / 2.0), 2.0 * math.sinh(lY / 2.0)
    den = sX * sY
    dden = math.cosh(lX / 2.0) * dlX * sY + sX * math.cosh(lY / 2.0) * dlY
    u = np.abs(num) / den
    du = np.sign(num)[:, None] * dnum / den - (u / den)[:, None] * dden[None, :]
    R = riemann_kernel(u)
    dR = riemann_kernel_derivative(u)
    total = float(np.sort(R)[::-1].sum())
    dtotal = np.einsum("n,nk->k", dR, du)
    if same:
        ell, dell = length_jet(fn, c1)
        total += ell
        dtotal = dtotal + dell
    return 2.0 / math.pi * total, 2.0 / math.pi * dtotal


def theta_pairing_real(G, c1, c2, max_len: int = 8) -> float:
    """Real part of the WP pairing of the two harmonic Beltrami differentials."""
    return math.pi ** 2 / 4.0 * grad_pairing(G, c1, c2, max_len).value


# -- evaluation on a fundamental domain ---------------------------------------

SWITCH_HEIGHT = 1.0  # chart height above which cusp-saturated sums are used


class SurfaceSeries:
    """A coset sum evaluated on a fundamental domain.

    Raw truncated sums are used in the thick part and sums closed under the
    cusp stabilizer high in the cusp.
    """

    def __init__(self, cs: CosetSum, fd: FundamentalDomain):
        self.cs = cs
        self.fd = fd
        self.sat = SaturatedLifts.from_ends(cs.ends, fd.base_chart, cs.weight)

        self._rule_values: dict = {}

    def p_surface(self, z):
        return self.cs.p_values(z)[0]

    def theta_surface(self, z):
        return self.cs.theta_values(z)[0]

    def on_rule(self, kind: str, order: int, panels: int):
        """Values of ``theta`` or ``p`` at all nodes of a surface rule, cached.

        Returned in rule order: thick nodes, then cusp nodes.  Cusp nodes below
        the switch height are evaluated at their domain points.  Theta values
        there are converted to the chart coordinate so that invariant products
        can be formed uniformly.
        """
        key = (kind, order, panels)
        if key in self._rule_values:
            return self._rule_values[key]
        rule = cached_rule(self.fd, order, panels)
        high = rule.cusp_zeta.imag >= SWITCH_HEIGHT
        if kind == "p":
            thick = self.cs.p_values(rule.thick_z)[0]
            cusp = np.empty(rule.cusp_zeta.shape)
            cusp[~high] = self.cs.p_values(rule.cusp_z[~high])[0]
            cusp[high] = self.sat.p_values(rule.cusp_zeta[high])
        else:
            # store nu = Im^2 conj(theta) in the coordinate of each node
            thick = rule.thick_z.imag ** 2 * np.conj(self.cs.theta_values(rule.thick_z)[0])
            cusp = np.empty(rule.cusp_zeta.shape, dtype=complex)
            zl = rule.cusp_z[~high]
            cusp[~high] = zl.imag ** 2 * np.conj(self.cs.theta_values(zl)[0])
            zh = rule.cusp_zeta[high]
            cusp[high] = zh.imag ** 2 * np.conj(self.sat.theta_values(zh))
        out = (np.concatenate([thick, cusp]), np.concatenate([rule.thick_w, rule.cusp_w]))
        self._rule_values[key] = out
        return out


_SERIES_CACHE: dict = {}
_RULE_CACHE: dict = {}


def surface_series(cs: CosetSum, fd: FundamentalDomain) -> SurfaceSeries:
    key = (id(cs), id(fd))
    hit = _SERIES_CACHE.get(key)
    if hit is None or hit.cs is not cs or hit.fd is not fd:
        hit = SurfaceSeries(cs, fd)
        _SERIES_CACHE[key] = hit
    return hit


def cached_rule(fd: FundamentalDomain, order: int, panels: int) -> SurfaceRule:
    key = (id(fd), order, panels)
    hit = _RULE_CACHE.get(key)
    if hit is None or hit[0] is not fd:
        hit = (fd, surface_rule(fd, order, panels))
        _RULE_CACHE[key] = hit
    return hit[1]


def integrate_invariant(fd: FundamentalDomain, thick_fn, cusp_fn, tail_per_width: float = 0.0,
                        order: int = 16, panels: int = 2):
    """Integrate a Gamma-invariant function over the surface against hyperbolic area.

    ``thick_fn`` takes points of H; ``cusp_fn`` takes base cusp-chart points.
    """
    rule = cached_rule(fd, order, panels)
    high = rule.cusp_zeta.imag >= SWITCH_HEIGHT
    total = np.sum(rule.thick_w * thick_fn(rule.thick_z))
    if np.any(~high):
        total = total + np.sum(rule.cusp_w[~high] * thick_fn(rule.cusp_z[~high]))
    if np.any(high):
        total = total + np.sum(rule.cusp_w[high] * cusp_fn(rule.cusp_zeta[high]))
    return total + rule.cusp_width * tail_per_width


def p_surface_integral(cs: CosetSum, fd: FundamentalDomain, order: int = 16, panels: int = 2) -> float:
    """Direct quadrature of P_sigma over the fundamental domain."""
    ss = surface_series(cs, fd)
    v, w = ss.on_rule("p", order, panels)
    rule = cached_rule(fd, order, panels)
    return float(np.sum(w * v) + rule.cusp_width * ss.sat.p_zero_mode_tail(fd.cusp_cutoff))


def l1_norm_p_sigma(cs: CosetSum, order: int = 48) -> float:
    """``int_R P_sigma dA`` unfolded to one period of the cylinder about the axis.

    In polar coordinates about the axis ``(0, inf)`` the period is
    ``1 <= |z| < e^l`` and ``exp(-2 d) = tan(theta/2)^2`` depends only on the angle
    from the axis, so the integral is ``l * int_0^pi tan(theta/2)^2 / sin(theta)^2``
    folded to ``[0, pi/2]``.  The angle integral is done numerically.
    """
    from scipy.integrate import quad

    def f(th):
        c = abs(math.cos(th))
        e = (1.0 - c) / (1.0 + c)  # exp(-2 d) from the axis at angle th
        return e / math.sin(th) ** 2

    val, err = quad(f, 0.0, math.pi / 2, epsabs=1e-13, epsrel=1e-13, limit=200)
    if err > 1e-9:
        raise ConvergenceError("unfolded L1 quadrature did not converge", val)
    return 2.0 * cs.ell * val


# -- harmonic Beltrami differentials ------------------------------------------

def _beltrami_factor(m: np.ndarray, z):
    """``conj(M'(z)) / M'(z)`` for ``M`` acting on ``z``."""
    cz = m[..., 1, 0] * z + m[..., 1, 1]
    return cz * cz / np.conj(cz * cz)


class BeltramiField:
    """Linear combination ``sum c_k nu_k`` of harmonic Beltrami differentials.

    ``nu_k = Im(z)^2 conj(Theta_k(z))`` for the theta series of a weighted curve.
    """

    def __init__(self, terms=(), fd: FundamentalDomain | None = None):
        self.terms = [(complex(c), cs) for c, cs in terms]
        self.fd = fd

    # linear structure
    def __add__(self, other: "BeltramiField") -> "BeltramiField":
        return BeltramiField(self.terms + other.terms, self.fd or other.fd)

    def __mul__(self, c) -> "BeltramiField":
        return BeltramiField([(c * k, cs) for k, cs in self.terms], self.fd)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    @property
    def is_zero(self) -> bool:
        return all(c == 0 for c, _ in self.terms)

    def theta(self, z):
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        out = np.zeros(z.shape, dtype=complex)
        for c, cs in self.terms:
            out += np.conj(c) * cs.theta_values(z)[0]
        return out

    def theta_tail(self, z):
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        out = np.zeros(z.shape)
        for c, cs in self.terms:
            out += abs(c) * cs.theta_values(z)[1]
        return out

    def theta_chart(self, zeta):
        zeta = np.atleast_1d(np.asarray(zeta, dtype=complex))
        out = np.zeros(zeta.shape, dtype=complex)
        for c, cs in self.terms:
            out += np.conj(c) * surface_series(cs, self.fd).sat.theta_values(zeta)
        return out

    def surface(self, z):
        """Values at points of H by direct truncated summation."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        return z.imag ** 2 * np.conj(self.theta(z))

    def chart(self, zeta):
        """Values in base cusp-chart coordinates."""
        zeta = np.atleast_1d(np.asarray(zeta, dtype=complex))
        return zeta.imag ** 2 * np.conj(self.theta_chart(zeta))

    def __call__(self, z):
        """``nu(z)``; with a domain attached, points are reduced first and cusp
        neighbourhoods use the saturated sums."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        if self.fd is None:
            return self.surface(z)
        fd = self.fd
        w, M = fd.reduce(z)
        out = self.surface(w)
        for vid in np.flatnonzero(fd.ideal):
            D = fd.vertex_chart(int(vid))
            zeta = apply(D, w)
            high = zeta.imag >= SWITCH_HEIGHT
            if np.any(high):
                out[high] = self.chart(zeta[high]) * _beltrami_factor(D, w[high])
        return out * _beltrami_factor(M, z)


def theta_beltrami(cs: CosetSum, fd: FundamentalDomain | None = None) -> BeltramiField:
    """Harmonic Beltrami differential of the weighted curve ``cs``."""
    return BeltramiField([(1.0, cs)], fd)


def _rule_nu(nu: BeltramiField, fd, order, panels):
    vals, w = None, None
    for c, cs in nu.terms:
        v, w = surface_series(cs, fd).on_rule("theta", order, panels)
        vals = c * v if vals is None else vals + c * v
    return vals, w


def wp_pairing(nu: BeltramiField, rho: BeltramiField, fd: FundamentalDomain | None = None,
               order: int = 16, panels: int = 2) -> complex:
    """``int_R nu conj(rho) dA`` by quadrature over the fundamental domain.

    Invariant products are formed node by node (a node may be expressed in a
    cusp chart); the region above the cutoff contributes ``O(Y^4 exp(-4 pi Y))``
    and is dropped.
    """
    fd = fd or nu.fd or rho.fd
    if fd is None:
        raise ValueError("a fundamental domain is required")
    if nu.is_zero or rho.is_zero:
        return 0j
    a, w = _rule_nu(nu, fd, order, panels)
    b, _ = _rule_nu(rho, fd, order, panels)
    return complex(np.sum(w * a * np.conj(b)))


def _theta_type(nu: BeltramiField, cs: CosetSum) -> bool:
    return all(k.group is cs.group for _, k in nu.terms)


def first_variation(nu: BeltramiField, cs: CosetSum, fd: FundamentalDomain | None = None,
                    method: str = "auto", max_len: int = 8, **quad) -> float:
    """Derivative of the length of ``cs.curve`` along the deformation ``nu``.

    Equals ``(2/pi) Re <nu, nu_sigma>``.  Combinations of theta series are unfolded
    along each term's curve; anything else uses surface quadrature.
    """
    if nu.is_zero:
        return 0.0
    if method == "auto":
        method = "unfold" if _theta_type(nu, cs) else "quadrature"
    if method == "unfold":
        total = 0j
        for c, k in nu.terms:
            pair = grad_pairing(k.group, k.curve, cs.curve, max_len).beltrami_pairing()
            total += c * k.weight * cs.weight * pair
        return 2.0 / math.pi * total.real
    sigma = theta_beltrami(cs, fd or nu.fd)
    return 2.0 / math.pi * wp_pairing(nu, sigma, fd, **quad).real


def abs_nu_p_integral(nu: BeltramiField, cs: CosetSum, fd: FundamentalDomain, order: int = 16,
                      panels: int = 2) -> float:
    """``int_R |nu| P_sigma dA``."""
    a, w = _rule_nu(nu, fd, order, panels)
    pv, _ = surface_series(cs, fd).on_rule("p", order, panels)
    return float(np.sum(w * np.abs(a) * pv))
