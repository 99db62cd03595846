"""Dirichlet fundamental domain centred at ``i`` and quadrature over it.

The polygon is built in the Klein model, where hyperbolic half-planes are
Euclidean half-planes, by clipping with the bisectors of orbit points.  Ideal
vertices are orbit images of the parabolic fixed point of the commutator; each
carries a cusp chart in which the stabilizer acts by ``z -> z + 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fuchsian import PuncturedTorusGroup, enumerate_elements, invert_word, reduce_word
from .hyperbolic import GeometryError


class DomainError(RuntimeError):
    pass


# -- model conversions --------------------------------------------------------

def h_to_disk(z):
    z = np.asarray(z, dtype=complex)
    return (z - 1j) / (z + 1j)


def disk_to_h(w):
    w = np.asarray(w, dtype=complex)
    return 1j * (1 + w) / (1 - w)


def disk_to_klein(w):
    w = np.asarray(w, dtype=complex)
    return 2 * w / (1 + np.abs(w) ** 2)


def klein_to_disk(k):
    k = np.asarray(k, dtype=complex)
    r2 = np.clip(np.abs(k) ** 2, 0.0, 1.0)
    return k / (1 + np.sqrt(1 - r2))


def h_to_klein(z):
    return disk_to_klein(h_to_disk(z))


def klein_to_h(k):
    return disk_to_h(klein_to_disk(k))


def hyperboloid(z):
    """Hyperboloid coordinates ``(X0, X1, X2)`` of points of H."""
    w = h_to_disk(z)
    r2 = np.abs(w) ** 2
    return np.stack([(1 + r2) / (1 - r2), 2 * w.real / (1 - r2), 2 * w.imag / (1 - r2)], axis=-1)


def orbit_hyperboloid(m):
    """Hyperboloid coordinates of ``m . i`` straight from matrix entries."""
    m = np.asarray(m, dtype=float)
    a, b, c, d = m[..., 0, 0], m[..., 0, 1], m[..., 1, 0], m[..., 1, 1]
    return np.stack([(a * a + b * b + c * c + d * d) / 2, ((a * a + b * b) - (c * c + d * d)) / 2,
                     -(a * c + b * d)], axis=-1)


def apply(m, z):
    m = np.asarray(m)
    return (m[..., 0, 0] * z + m[..., 0, 1]) / (m[..., 1, 0] * z + m[..., 1, 1])


def inv2(m):
    m = np.asarray(m, dtype=float)
    out = np.empty_like(m)
    out[..., 0, 0], out[..., 1, 1] = m[..., 1, 1], m[..., 0, 0]
    out[..., 0, 1], out[..., 1, 0] = -m[..., 0, 1], -m[..., 1, 0]
    return out


def parabolic_fixed_point(P: np.ndarray) -> float:
    (p, q), (r, s) = P
    return (p - s) / (2.0 * r)


def cusp_chart(P: np.ndarray, c: float) -> np.ndarray:
    """Unit-determinant map sending ``c`` to infinity and conjugating ``P`` to ``z -> z + 1``."""
    C0 = np.array([[0.0, -1.0], [1.0, -c]])
    Q = C0 @ P @ inv2(C0)
    t = Q[0, 1] / Q[1, 1]  # translation length, sign included
    s = 1.0 / math.sqrt(abs(t))
    S = np.array([[s, 0.0], [0.0, 1.0 / s]])
    return S @ C0  # translation by +1 or -1; both generate the stabilizer


# -- polygon clipping ---------------------------------------------------------

def _clip(poly, labels, normal, rhs, new_label, eps=1e-13):
    out_p, out_l = [], []
    n = len(poly)
    f = poly @ normal - rhs
    for i in range(n):
        j = (i + 1) % n
        P, Q = poly[i], poly[j]
        inP, inQ = f[i] <= eps, f[j] <= eps
        if inP:
            out_p.append(P)
            out_l.append(labels[i])
            if not inQ:
                t = f[i] / (f[i] - f[j])
                out_p.append(P + t * (Q - P))
                out_l.append(new_label)
        elif inQ:
            t = f[i] / (f[i] - f[j])
            out_p.append(P + t * (Q - P))
            out_l.append(labels[i])
    return np.array(out_p), out_l


def _merge_short(poly, labels, tol=1e-9):
    keep_p, keep_l = [], []
    n = len(poly)
    for i in range(n):
        j = (i + 1) % n
        if np.linalg.norm(poly[j] - poly[i]) < tol:
            continue
        keep_p.append(poly[i])
        keep_l.append(labels[i])
    return np.array(keep_p), keep_l


@dataclass
class FundamentalDomain:
    """Dirichlet polygon of a punctured-torus group centred at ``i``.

    Side ``k`` runs from vertex ``k`` to vertex ``k+1`` (counterclockwise in
    the disk) and lies on the bisector of ``i`` and ``side_mats[k] . i``.
    """

    group: PuncturedTorusGroup
    klein: np.ndarray              # (n, 2) vertex coordinates
    ideal: np.ndarray              # (n,) bool
    side_words: list[str]
    side_mats: np.ndarray          # (n, 2, 2)
    partner: np.ndarray            # (n,) index of the paired side
    cusp_point: float
    cusp_cutoff: float = 10.0
    vertex_maps: dict = field(default_factory=dict)  # ideal vertex -> word g with g(cusp) = v

    @property
    def n_sides(self) -> int:
        return len(self.side_words)

    @property
    def vertices(self) -> list[complex]:
        """Vertices in the upper half-plane model (ideal ones on the real axis)."""
        k = self.klein[:, 0] + 1j * self.klein[:, 1]
        z = klein_to_h(k)
        return [complex(v.real, 0.0) if i else complex(v) for v, i in zip(z, self.ideal)]

    def interior_angles(self) -> np.ndarray:
        w = klein_to_disk(self.klein[:, 0] + 1j * self.klein[:, 1])
        n = len(w)
        ang = np.zeros(n)
        for i in range(n):
            if self.ideal[i]:
                continue
            v = w[i]
            def move(u):
                return (u - v) / (1 - np.conj(v) * u)
            a, b = move(w[i - 1]), move(w[(i + 1) % n])
            # tangent direction at the origin after moving v there
            ang[i] = abs(np.angle(b / a))
        return ang

    def area(self) -> float:
        """Hyperbolic area from Gauss-Bonnet for a geodesic polygon."""
        return (self.n_sides - 2) * math.pi - float(self.interior_angles().sum())

    # -- membership and reduction ------------------------------------------

    def _halfplanes(self):
        q = orbit_hyperboloid(self.side_mats)
        return q[:, 1:], q[:, 0] - 1.0

    def excess(self, z) -> np.ndarray:
        """Largest bisector violation; ``<= 0`` inside the domain."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        kk = h_to_klein(z)
        kv = np.stack([kk.real, kk.imag], axis=-1)
        nrm, rhs = self._halfplanes()
        return (kv @ nrm.T - rhs).max(axis=-1)

    def contains(self, z, tol=1e-10) -> np.ndarray:
        return self.excess(z) <= tol

    def reduce(self, z, max_steps: int = 200):
        """Map points into the domain.

        Returns ``(w, M)`` with ``w = M z`` inside the domain, ``M`` a group
        element stored as a matrix.
        """
        z = np.atleast_1d(np.asarray(z, dtype=complex)).copy()
        M = np.broadcast_to(np.eye(2), z.shape + (2, 2)).copy()
        nrm, rhs = self._halfplanes()
        invs = inv2(self.side_mats)
        for _ in range(max_steps):
            kk = h_to_klein(z)
            kv = np.stack([kk.real, kk.imag], axis=-1)
            viol = kv @ nrm.T - rhs
            worst = viol.argmax(axis=-1)
            bad = viol[np.arange(z.size), worst] > 1e-12
            if not bad.any():
                return z, M
            g = invs[worst[bad]]
            z[bad] = apply(g, z[bad])
            M[bad] = np.einsum("nij,njk->nik", g, M[bad])
        raise DomainError("reduction did not terminate")

    # -- cusp charts --------------------------------------------------------

    def vertex_chart(self, idx: int) -> np.ndarray:
        """Chart for ideal vertex ``idx``: sends it to infinity with unit translations."""
        g = self.group.word_matrix(self.vertex_maps[idx])
        return self.base_chart @ inv2(g)

    @property
    def base_chart(self) -> np.ndarray:
        return cusp_chart(self.group.commutator(), self.cusp_point)


def dirichlet_domain(G: PuncturedTorusGroup, max_word_len: int = 4, cap: int = 8,
                     cusp_cutoff: float = 10.0) -> FundamentalDomain:
    """Dirichlet polygon centred at ``i`` from orbit points of words up to ``max_word_len``."""
    if max_word_len < 4:
        raise ValueError("max_word_len must be >= 4")
    L = max_word_len
    while True:
        try:
            return _build(G, L, cusp_cutoff)
        except DomainError:
            if L >= cap:
                raise DomainError(f"Dirichlet polygon not closed with words up to {cap}; raise the cap")
            L += 1


def _vertex_cycles(mats, partner):
    """Classify vertices by the product of side pairings around their cycle.

    A finite vertex closes up with the identity; an ideal one with a parabolic.
    """
    n = len(mats)
    ideal = np.zeros(n, dtype=bool)
    maps = {}
    for v0 in range(n):
        M = np.eye(2)
        v = v0
        for _ in range(n + 1):
            M = inv2(mats[v]) @ M
            v = (partner[v] + 1) % n
            if v == v0:
                break
        else:
            raise DomainError("vertex cycle did not close")
        dev = min(np.abs(M - np.eye(2)).max(), np.abs(M + np.eye(2)).max())
        if dev > 1e-6 * max(1.0, np.abs(M).max()):
            if abs(abs(np.trace(M)) - 2.0) > 1e-6 * np.abs(M).max() ** 2:
                raise DomainError("vertex cycle is neither elliptic-trivial nor parabolic")
            ideal[v0] = True
            maps[v0] = M
    return ideal, maps


def _build(G, max_len, cusp_cutoff):
    elems = enumerate_elements(G, max_len, cap=max(max_len, 16))
    # dedupe words giving the same element up to sign (commutator relations)
    seen = {}
    for w, m in elems:
        key = tuple(np.round(np.sign(m[0, 0] if abs(m[0, 0]) > 1e-12 else m[1, 0]) * m.ravel(), 8))
        if key not in seen:
            seen[key] = (w, m)
    items = list(seen.values())
    items = [(w, m) for w, m in items if np.sum(m * m) > 2 + 1e-12]
    q = orbit_hyperboloid(np.array([m for _, m in items]))
    order = np.argsort(q[:, 0], kind="stable")  # nearest orbit points first
    poly = np.array([[-1.5, -1.5], [1.5, -1.5], [1.5, 1.5], [-1.5, 1.5]])
    labels = [-1] * 4
    for idx in order:
        poly, labels = _clip(poly, labels, q[idx, 1:], q[idx, 0] - 1.0, int(idx))
        if len(poly) == 0:
            raise DomainError("empty polygon")
    poly, labels = _merge_short(poly, labels)
    r = np.hypot(poly[:, 0], poly[:, 1])
    if np.any(np.array(labels) < 0) or np.any(r > 1 + 1e-7):
        raise DomainError("polygon not closed")
    # counterclockwise orientation
    xs, ys = poly[:, 0], poly[:, 1]
    if np.sum(xs * np.roll(ys, -1) - np.roll(xs, -1) * ys) < 0:
        poly, labels = poly[::-1].copy(), labels[::-1]
        labels = labels[1:] + labels[:1]
    words = [items[i][0] for i in labels]
    mats = np.array([items[i][1] for i in labels])
    # side pairings: the side of g is paired with the side of g^{-1}
    n = len(words)
    partner = np.full(n, -1)
    for i in range(n):
        gi = inv2(mats[i])
        for j in range(n):
            if np.allclose(mats[j], gi, atol=1e-8) or np.allclose(mats[j], -gi, atol=1e-8):
                partner[i] = j
    if np.any(partner < 0):
        raise DomainError("unpaired side")
    ideal, cycle_maps = _vertex_cycles(mats, partner)
    P = G.commutator()
    c = parabolic_fixed_point(P)
    fd = FundamentalDomain(G, poly, ideal, words, mats, partner, c, cusp_cutoff)
    # ideal vertices: exact fixed points of their cycle transformations
    for i in np.flatnonzero(ideal):
        v = parabolic_fixed_point(cycle_maps[i])
        best = None
        for w, m in [("", np.eye(2))] + elems:
            den = m[1, 0] * c + m[1, 1]
            if abs(den) < 1e-14:
                continue
            x = (m[0, 0] * c + m[0, 1]) / den
            err = abs(x - v) / (1 + abs(v))
            if best is None or err < best[0]:
                best = (err, w, x)
        if best[0] > 1e-8:
            raise DomainError("ideal vertex is not a cusp image")
        fd.vertex_maps[int(i)] = best[1]
        kx = h_to_klein(v + 0j)
        fd.klein[i] = [kx.real, kx.imag]
    return fd


# -- cusp-saturated lift families ---------------------------------------------

@dataclass
class SaturatedLifts:
    """A lift family in cusp-chart coordinates, closed under ``z -> z + 1``.

    Each lift is stored once by its centre mod 1 and radius; sums run over
    ``|k| <= K`` translates with analytic corrections for the rest.
    """

    centre: np.ndarray
    radius: np.ndarray
    weight: float = 1.0

    @classmethod
    def from_ends(cls, ends: np.ndarray, chart: np.ndarray, weight: float = 1.0, rtol: float = 1e-6):
        h = np.einsum("ij,njk->nik", chart, ends)
        a1, a2, b1, b2 = h[:, 0, 0], h[:, 1, 0], h[:, 0, 1], h[:, 1, 1]
        # the determinant is preserved exactly by the chart and the coset words
        r = 0.5 * np.abs(a1 * b2 - a2 * b1) / np.abs(a2 * b2)
        c = np.mod(0.5 * (a1 * b2 + a2 * b1) / (a2 * b2), 1.0)
        keep = _cluster_lifts(c, r, rtol)
        return cls(c[keep], r[keep], weight)

    small_radius = 1e-3  # lifts below this are summed over translates in closed form
    n_modes = 12

    @staticmethod
    def _span(y):
        return int(math.ceil(8.0 * float(np.max(y)) + 16.0))

    def _split(self):
        small = self.radius < self.small_radius
        return ~small, small

    def _groups(self, zeta):
        spans = np.ceil(8.0 * zeta.imag + 16.0).astype(int)
        for K in np.unique(spans):
            yield K, np.flatnonzero(spans == K)

    def _moments(self, small):
        m = np.arange(self.n_modes + 1)
        r2 = self.radius[small] ** 2
        return np.exp(-2j * np.pi * np.outer(m, self.centre[small])) @ r2

    def p_values(self, zeta):
        """Sum of ``exp(-2 d)`` over the translated family at chart points."""
        zeta = np.atleast_1d(np.asarray(zeta, dtype=complex))
        flat = zeta.ravel()
        out = np.zeros(flat.shape)
        big, small = self._split()
        if np.any(small) and flat.imag.min() < 10 * self.small_radius:
            big, small = np.ones_like(big), np.zeros_like(small)
        c, r = self.centre[big], self.radius[big]
        for K, idx in self._groups(flat):
            z = flat[idx][:, None, None]
            k = np.arange(-K, K + 1)[None, :, None]
            x = z.real - c[None, None, :] - k
            y = z.imag
            sh = np.abs(x * x + y * y - r * r) / (2.0 * r * y)
            e = 1.0 / (np.sqrt(1.0 + sh * sh) + sh)
            tail = 2.0 * (r[None, None, :] * y) ** 2 / (3.0 * (K + 0.5) ** 3)
            out[idx] = (e * e).sum(axis=(1, 2)) + tail[:, 0, :].sum(axis=-1)
        if np.any(small):
            # Poisson summation of r^2 y^2 / ((x - k)^2 + y^2)^2 over k
            mu = self._moments(small)
            m = np.arange(1, self.n_modes + 1)
            x, y = flat.real[:, None], flat.imag[:, None]
            osc = (mu[1:] * (1 + 2 * np.pi * m * y) * np.exp(-2 * np.pi * m * y)
                   * np.exp(2j * np.pi * m * x)).sum(axis=1)
            out += np.pi / (2.0 * flat.imag) * (mu[0].real + 2.0 * osc.real)
        return self.weight * out.reshape(zeta.shape)

    def theta_values(self, zeta):
        """Quadratic-differential coefficient of the translated theta series."""
        zeta = np.atleast_1d(np.asarray(zeta, dtype=complex))
        flat = zeta.ravel()
        out = np.zeros(flat.shape, dtype=complex)
        big, small = self._split()
        if np.any(small) and flat.imag.min() < 10 * self.small_radius:
            big, small = np.ones_like(big), np.zeros_like(small)
        c, r = self.centre[big], self.radius[big]
        a, b = c - r, c + r
        D = a - b

        def F(u):
            # antiderivative of D^2/((u-a)(u-b))^2 vanishing at infinity, as a series in
            # rho = r/(u-c); |u - c| >= K >> r so this avoids cancellation for tiny lifts
            m = u - c
            rho2 = (r / m) ** 2
            acc = np.zeros_like(m)
            term = rho2
            for j in range(1, 40):
                acc = acc + term * (2.0 * j / (2.0 * j + 1.0))
                term = term * rho2
                if np.max(np.abs(term)) < 1e-18:
                    break
            return -2.0 / m * acc

        def dG(u):
            g = (D / ((u - a) * (u - b))) ** 2
            return -2.0 * g * (1.0 / (u - a) + 1.0 / (u - b))

        for K, idx in self._groups(flat):
            z = flat[idx][:, None]
            k = np.arange(-K, K + 1)[None, :, None]
            u = z[:, :, None] - k
            val = (D / ((u - a) * (u - b))) ** 2
            uR, uL = z - K - 0.5, z + K + 0.5
            tail = F(uR) - F(uL) + (dG(uL) - dG(uR)) / 24.0  # midpoint Euler-Maclaurin correction
            out[idx] = val.sum(axis=(1, 2)) + tail.sum(axis=-1)
        if np.any(small):
            # sum_k (z - k)^-4 = (8 pi^4 / 3) sum_n n^3 q^n, q = exp(2 pi i z)
            mu = self._moments(small)
            n = np.arange(1, self.n_modes + 1)
            q = np.exp(2j * np.pi * np.outer(flat, n))
            out += 4.0 * (8.0 * np.pi ** 4 / 3.0) * (q * (n ** 3 * mu[1:])).sum(axis=1)
        return self.weight * out.reshape(zeta.shape)

    def p_zero_mode_tail(self, Y: float) -> float:
        """``int_Y^inf (mean over x of P) dy / y^2`` per unit width."""
        eta0 = Y / self.radius
        # mean of exp(-2d) over a period is r J(y/r) with J(eta) ~ pi/(2 eta)(1 - 1/eta^2 ...)
        return self.weight * float(np.sum(_j_tail(eta0)))


def _cluster_lifts(c, r, rtol):
    """Indices of distinct lifts given centres mod 1 and radii.

    Distinct lifts of a simple closed geodesic are separated by its collar, so
    agreement to ``rtol`` relative to the radius identifies a duplicate.
    """
    order = np.argsort(r, kind="stable")
    lr = np.log(r[order])
    keep = []
    start = 0
    n = len(order)
    while start < n:
        stop = start + 1
        while stop < n and lr[stop] - lr[stop - 1] < rtol:
            stop += 1
        grp = order[start:stop]
        cg = c[grp]
        srt = np.argsort(cg, kind="stable")
        grp, cg = grp[srt], cg[srt]
        tol = rtol * r[grp].max() + 1e-12
        new = np.ones(len(grp), dtype=bool)
        new[1:] = np.diff(cg) > tol
        if len(grp) > 1 and (cg[0] + 1.0 - cg[-1]) <= tol:
            new[0] = False  # wraps around with the last one
        keep.extend(grp[new].tolist())
        start = stop
    return np.sort(np.array(keep, dtype=int))


def _j_profile(eta):
    """``J(eta) = int_R exp(-2 d(t + i eta, unit semicircle)) dt``."""
    from scipy.integrate import quad

    def f(t):
        sh = abs(t * t + eta * eta - 1.0) / (2.0 * eta)
        e = 1.0 / (math.sqrt(1.0 + sh * sh) + sh)
        return e * e

    v, _ = quad(f, 0.0, math.inf, limit=200)
    return 2.0 * v


def _j_tail(eta0):
    """``int_{eta0}^inf J(eta) / eta^2 d eta`` via the large-eta expansion of J."""
    eta0 = np.asarray(eta0, dtype=float)
    # J(eta) = pi/(2 eta) + pi/(8 eta^3) + O(eta^-5)
    return np.pi / (4.0 * eta0 ** 2) + _J_C3 / (4.0 * eta0 ** 4)


_J_C3 = math.pi / 8.0


# -- surface quadrature -------------------------------------------------------

def _gl(n, a, b):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * x + 0.5 * (a + b), 0.5 * (b - a) * w


def _composite(n, panels, a, b):
    edges = np.linspace(a, b, panels + 1)
    xs, ws = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        x, w = _gl(n, lo, hi)
        xs.append(x)
        ws.append(w)
    return np.concatenate(xs), np.concatenate(ws)


@dataclass
class SurfaceRule:
    """Nodes and weights (hyperbolic area) covering the fundamental domain.

    ``thick_z`` are points of H inside the domain; ``cusp_zeta`` are points in
    the base cusp chart.  ``cusp_width`` is the total chart width above the
    cutoff height, which is 1 for a once-punctured torus.
    """

    thick_z: np.ndarray
    thick_w: np.ndarray
    cusp_zeta: np.ndarray
    cusp_w: np.ndarray
    cusp_width: float
    cutoff: float
    cusp_z: np.ndarray | None = None  # the same cusp nodes as points of the domain

    @property
    def size(self) -> int:
        return self.thick_z.size + self.cusp_zeta.size

    def integrate(self, thick_fn, cusp_fn, tail_per_width: float = 0.0):
        v = np.sum(self.thick_w * thick_fn(self.thick_z)) + np.sum(self.cusp_w * cusp_fn(self.cusp_zeta))
        return v + self.cusp_width * tail_per_width

    def area(self) -> float:
        return float(self.thick_w.sum() + self.cusp_w.sum() + self.cusp_width / self.cutoff)


def surface_rule(fd: FundamentalDomain, order: int = 16, panels: int = 2) -> SurfaceRule:
    """Tensor Gauss-Legendre rule on the fan of triangles from the centre."""
    parts = [_side_rule(fd, s, order, panels) for s in range(fd.n_sides)]
    cat = lambda k, dt: np.concatenate([p[k] for p in parts if p[k].size]) if any(p[k].size for p in parts) \
        else np.zeros(0, dtype=dt)
    width = sum(p[4] for p in parts)
    return SurfaceRule(cat(0, complex), cat(1, float), cat(2, complex), cat(3, float), width, fd.cusp_cutoff,
                       cat(5, complex))


def _side_rule(fd: FundamentalDomain, s: int, order: int, panels: int):
    n = fd.n_sides
    Y = fd.cusp_cutoff
    kv = fd.klein
    empty_c, empty_f = np.zeros(0, dtype=complex), np.zeros(0)
    i, j = s, (s + 1) % n
    if fd.ideal[i] and fd.ideal[j]:
        raise DomainError("adjacent ideal vertices are not supported")
    if not fd.ideal[i] and not fd.ideal[j]:
        # hyperbolic polar coordinates about the centre, dA = sinh(rho) d rho d phi,
        # with the angle driven by arclength sg along the side measured from the
        # foot of the perpendicular: tan(phi) = tanh(sg) / sinh(p)
        A, B = kv[i], kv[j]
        edge = (B - A) / np.linalg.norm(B - A)
        nrm = np.array([edge[1], -edge[0]])
        dist = float(A @ nrm)
        if dist < 0:
            nrm, dist = -nrm, -dist
        foot = dist * nrm
        p = math.atanh(dist)
        sp = math.sinh(p)
        sg_a = math.atanh(float((A - foot) @ edge) / dist * sp)
        sg_b = math.atanh(float((B - foot) @ edge) / dist * sp)
        sg, wsg = _composite(order, panels, sg_a, sg_b)
        th = np.tanh(sg)
        dphi = (1.0 - th * th) / sp / (1.0 + (th / sp) ** 2)
        phi = np.arctan(th / sp)
        rmax = np.arccosh(math.cosh(p) * np.cosh(sg))
        u, wu = _composite(order, panels, 0.0, 1.0)
        rho = np.outer(rmax, u)
        W = np.outer(wsg * dphi * rmax, wu) * np.sinh(rho)
        base_dir = complex(nrm[0], nrm[1]) * np.exp(1j * phi * np.sign(float(nrm[0] * edge[1] - nrm[1] * edge[0])))
        k = np.tanh(rho) * base_dir[:, None]
        return klein_to_h(k).ravel(), W.ravel(), empty_c, empty_f, 0.0, empty_c
    vid, fid = (j, i) if fd.ideal[j] else (i, j)
    D = fd.vertex_chart(vid)
    O = complex(apply(D, 1j))
    V = complex(apply(D, complex(klein_to_h(kv[fid, 0] + 1j * kv[fid, 1]))))
    xa, xb = sorted([O.real, V.real])
    c0 = (abs(O) ** 2 - abs(V) ** 2) / (2.0 * (O.real - V.real))
    R = abs(O - c0)
    if max(O.imag, V.imag, R) >= Y:
        raise DomainError("cusp cutoff below the compact part; raise cusp_cutoff")
    # parametrise the arc by its angle so the lower limit is smooth: x = c0 + R cos(th)
    th_o = math.acos(np.clip((O.real - c0) / R, -1, 1))
    th_v = math.acos(np.clip((V.real - c0) / R, -1, 1))
    th, wth = _composite(order, panels, min(th_o, th_v), max(th_o, th_v))
    x = c0 + R * np.cos(th)
    yarc = R * np.sin(th)
    t, wt = _composite(order, panels, 0.0, 1.0)
    lo, hi = 1.0 / Y, 1.0 / yarc
    T = lo + np.outer(hi - lo, t)
    Wt = np.outer((1.0 - yarc / Y) * wth, wt)  # (hi - lo) * |dx/dth|
    # dA = dx dy / y^2 = dx dt with t = 1 / y
    zeta = (x[:, None] + 1j / T).ravel()
    return empty_c, empty_f, zeta, Wt.ravel(), xb - xa, apply(inv2(D), zeta)
