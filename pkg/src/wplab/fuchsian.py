"""Marked once-punctured-torus groups in Fenchel–Nielsen coordinates.

Words are strings over ``A, B`` with lower-case letters for inverses
(``a = A^-1``, ``b = B^-1``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .hyperbolic import GeodesicEnds, GeometryError, MoebiusMap

WORD_LEN_CAP = 16
INVERSE = {"A": "a", "a": "A", "B": "b", "b": "B"}
LETTERS = ("A", "B", "a", "b")


class ResourceError(RuntimeError):
    pass


@dataclass(frozen=True)
class FNPoint:
    l_alpha: float
    tau: float

    def __post_init__(self):
        if not (math.isfinite(self.l_alpha) and math.isfinite(self.tau)) or self.l_alpha <= 0:
            raise ValueError(f"invalid Fenchel–Nielsen point ({self.l_alpha}, {self.tau})")

    def as_array(self) -> np.ndarray:
        return np.array([self.l_alpha, self.tau])


SQUARE_POINT = FNPoint(2.0 * math.acosh(1.5), 0.0)


@dataclass(frozen=True)
class CurveClass:
    p: int
    q: int
    word: str

    @property
    def slope(self) -> Fraction | str:
        return "1/0" if self.q == 0 else Fraction(self.p, self.q)

    def __str__(self):
        return f"{self.p}/{self.q}"


@dataclass(frozen=True, eq=False)
class PuncturedTorusGroup:
    gen_a: MoebiusMap
    gen_b: MoebiusMap
    fn: FNPoint

    def traces(self) -> tuple[float, float, float]:
        A, B = self.gen_a.matrix, self.gen_b.matrix
        return float(np.trace(A)), float(np.trace(B)), float(np.trace(A @ B))

    def generators(self) -> dict[str, np.ndarray]:
        A, B = self.gen_a.matrix, self.gen_b.matrix
        return {"A": A, "B": B, "a": _inv(A), "b": _inv(B)}

    def word_matrix(self, word: str) -> np.ndarray:
        gens = self.generators()
        m = np.eye(2)
        for ch in word:
            m = m @ gens[ch]
        return m

    def commutator(self) -> np.ndarray:
        return self.word_matrix("ABab")


def adjugate(m: np.ndarray) -> np.ndarray:
    """Adjugate of 2x2 matrices (last two axes)."""
    out = np.empty_like(m)
    out[..., 0, 0], out[..., 1, 1] = m[..., 1, 1], m[..., 0, 0]
    out[..., 0, 1], out[..., 1, 0] = -m[..., 0, 1], -m[..., 1, 0]
    return out


def _inv(m: np.ndarray) -> np.ndarray:
    return np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]])


# -- construction -------------------------------------------------------------

def _section_entries(l_alpha: float):
    """Entries of B on the tau = 0 section and their l_alpha-derivatives."""
    lam = math.exp(l_alpha / 2.0)
    x = lam + 1.0 / lam
    xm2 = (lam - 1.0) ** 2 / lam  # x - 2 without cancellation
    y = x / math.sqrt(xm2)
    dx = (lam - 1.0 / lam) / 2.0
    dy = dx * (x - 4.0) / (2.0 * xm2 ** 1.5)
    dlam = lam / 2.0
    p = y / (lam + 1.0)
    s = y - p
    dp = (dy * (lam + 1.0) - y * dlam) / (lam + 1.0) ** 2
    ds = dy - dp
    q = p * s - 1.0
    dq = dp * s + p * ds
    return np.array([[p, q], [1.0, s]]), np.array([[dp, dq], [0.0, ds]])


def generator_jets(fn: FNPoint):
    """Generator matrices and their exact partial derivatives in (l_alpha, tau).

    Returns ``A, dA, B, dB`` where ``dA``/``dB`` have a leading axis of length 2
    holding the derivatives with respect to ``l_alpha`` and ``tau``.
    """
    l, tau = fn.l_alpha, fn.tau
    lam = math.exp(l / 2.0)
    A = np.diag([lam, 1.0 / lam])
    dA = np.zeros((2, 2, 2))
    dA[0] = np.diag([lam / 2.0, -1.0 / (2.0 * lam)])
    B0, dB0 = _section_entries(l)
    mu = math.exp(tau / 2.0)
    T = np.diag([mu, 1.0 / mu])
    B = T @ B0
    dB = np.zeros((2, 2, 2))
    dB[0] = T @ dB0
    dB[1] = np.diag([mu / 2.0, -1.0 / (2.0 * mu)]) @ B0
    return A, dA, B, dB


def _balancer(B: np.ndarray) -> np.ndarray:
    """Dilation ``K`` such that the axis of ``K B K^-1`` crosses the imaginary axis at ``i``."""
    (p, q), (r, s) = B
    root = math.sqrt((p + s) ** 2 - 4.0)
    e1, e2 = (p - s - root) / (2 * r), (p - s + root) / (2 * r)
    if e1 * e2 >= 0:
        return np.eye(2)
    h = math.sqrt(-e1 * e2)
    return np.diag([1.0 / math.sqrt(h), math.sqrt(h)])


def _balance(B: np.ndarray) -> np.ndarray:
    """Conjugate by a dilation so the axis of ``B`` crosses the imaginary axis at ``i``.

    Dilations commute with the diagonal ``A``, so all traces are unchanged.
    """
    K = _balancer(B)
    return K @ B @ _inv(K)


def group_from_fn(p: FNPoint) -> PuncturedTorusGroup:
    """Group at an FN point, normalised so both generator axes pass through ``i``."""
    A, _, B, _ = generator_jets(p)
    B = _balance(B)
    G = PuncturedTorusGroup(MoebiusMap.from_array(A), MoebiusMap.from_array(B), p)
    x, y, z = G.traces()
    markov = x * x + y * y + z * z - x * y * z
    assert abs(markov) <= 1e-9 * max(1.0, x * y * z), "Markov relation violated"
    return G


# -- words --------------------------------------------------------------------

def reduce_word(word: str) -> str:
    out: list[str] = []
    for ch in word:
        if out and out[-1] == INVERSE[ch]:
            out.pop()
        else:
            out.append(ch)
    return "".join(out)


def invert_word(word: str) -> str:
    return "".join(INVERSE[ch] for ch in reversed(word))


def substitute(word: str, images: dict[str, str]) -> str:
    """Apply an endomorphism given on ``A`` and ``B``."""
    full = dict(images)
    full["a"] = invert_word(images["A"])
    full["b"] = invert_word(images["B"])
    return reduce_word("".join(full[ch] for ch in word))


def enumerate_elements(G: PuncturedTorusGroup, max_len: int, cap: int = WORD_LEN_CAP):
    """All reduced words of length 1..max_len with their matrices.

    Order is by length, then lexicographic in the letter order ``A, B, a, b``.
    """
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    if max_len > cap:
        raise ResourceError(f"max_len {max_len} exceeds the configured cap {cap}")
    gens = G.generators()
    out = []
    level = [("", np.eye(2))]
    for _ in range(max_len):
        nxt = []
        for w, m in level:
            for ch in LETTERS:
                if w and w[-1] == INVERSE[ch]:
                    continue
                nxt.append((w + ch, m @ gens[ch]))
        out.extend(nxt)
        level = nxt
    return out


def christoffel_word(p: int, q: int) -> str:
    """Lower Christoffel word with ``p`` letters A and ``q`` letters B (p, q >= 0)."""
    n = p + q
    letters = []
    for k in range(1, n + 1):
        letters.append("B" if (k * q) // n > ((k - 1) * q) // n else "A")
    return "".join(letters)


def _normalise_slope(p: int, q: int) -> tuple[int, int]:
    if math.gcd(p, q) != 1:
        raise ValueError(f"slope {p}/{q} is not in lowest terms")
    if q < 0 or (q == 0 and p < 0):
        p, q = -p, -q
    return p, q


@lru_cache(maxsize=None)
def primitive_class(p: int, q: int) -> CurveClass:
    """Primitive word for the simple closed curve of slope ``p/q``.

    ``p`` counts occurrences of A and ``q`` of B; negative ``p`` uses A^-1.
    """
    p, q = _normalise_slope(p, q)
    word = christoffel_word(abs(p), q)
    if p < 0:
        word = word.replace("A", "a")
    return CurveClass(p, q, word)


def farey_parents(p: int, q: int) -> tuple[tuple[int, int], tuple[int, int]]:
    """Farey neighbours ``(p1,q1), (p2,q2)`` with ``p1+p2 = p``, ``q1+q2 = q`` (p, q > 0)."""
    for q1 in range(0, q + 1):
        for p1 in range(0, p + 1):
            p2, q2 = p - p1, q - q1
            if (p1, q1) in ((0, 0), (p, q)):
                continue
            if p1 * q2 - p2 * q1 == -1 and p1 >= 0 and p2 >= 0:
                return (p1, q1), (p2, q2)
    raise ValueError(f"no Farey parents for {p}/{q}")


@lru_cache(maxsize=None)
def free_basis(p: int, q: int) -> tuple[str, str]:
    """A free basis ``(S, T)`` of the rank-2 free group whose first element is the curve word."""
    c = primitive_class(p, q)
    ap, q = abs(c.p), c.q
    if (ap, q) == (1, 0):
        S, T = "A", "B"
    elif (ap, q) == (0, 1):
        S, T = "B", "A"
    else:
        (p1, q1), (p2, q2) = farey_parents(ap, q)
        w1, w2 = christoffel_word(p1, q1), christoffel_word(p2, q2)
        if w1 + w2 == christoffel_word(ap, q):
            S, T = w1 + w2, w2
        elif w2 + w1 == christoffel_word(ap, q):
            S, T = w2 + w1, w1
        else:  # pragma: no cover - standard factorisation always exists
            raise AssertionError("Christoffel factorisation failed")
    if c.p < 0:
        S, T = S.replace("A", "a"), T.replace("A", "a")
    return S, T


def slopes_up_to(n: int) -> list[tuple[int, int]]:
    """Slopes ``p/q`` in lowest terms with ``|p|, |q| <= n``, one per curve."""
    out = {(1, 0), (0, 1)}
    for q in range(1, n + 1):
        for p in range(-n, n + 1):
            if p != 0 and math.gcd(p, q) == 1:
                out.add((p, q))
    return sorted(out)


# -- traces and lengths ---------------------------------------------------------

def length_from_trace(M) -> float:
    m = M.matrix if isinstance(M, MoebiusMap) else np.asarray(M)
    t = abs(float(m[0, 0] + m[1, 1]))
    if t <= 2.0 + 1e-12:
        raise GeometryError("parabolic or elliptic element")
    return 2.0 * math.acosh(t / 2.0)


def axis(M) -> GeodesicEnds:
    m = M.matrix if isinstance(M, MoebiusMap) else np.asarray(M)
    tr = m[0, 0] + m[1, 1]
    if abs(tr) <= 2.0 + 1e-12:
        raise GeometryError("axis requires a hyperbolic element")
    a, b, c, d = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
    root = math.sqrt(tr * tr - 4.0)
    if abs(c) <= 1e-14 * max(abs(a), abs(d)):
        # fixed points infinity and b / (d - a)
        return GeodesicEnds(b / (d - a), math.inf)
    return GeodesicEnds((a - d - root) / (2.0 * c), (a - d + root) / (2.0 * c))


def curve_length(G: PuncturedTorusGroup, curve: CurveClass | str) -> float:
    word = curve.word if isinstance(curve, CurveClass) else curve
    return length_from_trace(G.word_matrix(word))


def word_jet(fn: FNPoint, word: str):
    """Matrix of ``word`` in the balanced group and the exact gradient of its
    conjugacy class data (traces) in (l_alpha, tau)."""
    A, dA, B, dB = generator_jets(fn)
    # work in the balanced group: conjugation keeps traces, and differentiating
    # the balanced matrix avoids cancellation between very unequal entries
    K = _balancer(B)
    if K[0, 0] != 1.0:
        # K = diag(exp(-k/2), exp(k/2)) with k = log(q/r)/2
        dk = 0.5 * (dB[:, 0, 1] / B[0, 1] - dB[:, 1, 0] / B[1, 0])
        Ki = _inv(K)
        B = K @ B @ Ki
        D = np.zeros((2, 2, 2))
        D[:, 0, 0], D[:, 1, 1] = -dk / 2, dk / 2
        dB = np.einsum("ij,kjl,lm->kim", K, dB, Ki) + np.einsum("kij,jl->kil", D, B) - np.einsum("ij,kjl->kil", B, D)
    # unit determinant: the inverse is the adjugate, which is linear in the entries
    jets = {
        "A": (A, dA),
        "B": (B, dB),
        "a": (adjugate(A), adjugate(dA)),
        "b": (adjugate(B), adjugate(dB)),
    }
    M = np.eye(2)
    dM = np.zeros((2, 2, 2))
    for ch in word:
        G, dG = jets[ch]
        dM = np.einsum("kij,jl->kil", dM, G) + np.einsum("ij,kjl->kil", M, dG)
        M = M @ G
    return M, dM


def length_jet(fn: FNPoint, curve: CurveClass | str) -> tuple[float, np.ndarray]:
    """Geodesic length of a curve and its exact gradient in FN coordinates."""
    word = curve.word if isinstance(curve, CurveClass) else curve
    if word in ("A", "a"):
        # the FN length itself; avoids acosh cancellation for short alpha
        return fn.l_alpha, np.array([1.0, 0.0])
    M, dM = word_jet(fn, word)
    t = M[0, 0] + M[1, 1]
    dt = dM[:, 0, 0] + dM[:, 1, 1]
    if abs(t) <= 2.0 + 1e-12:
        raise GeometryError("parabolic or elliptic element")
    ell = 2.0 * math.acosh(abs(t) / 2.0)
    grad = math.copysign(1.0, t) * dt / math.sqrt(t * t / 4.0 - 1.0)
    return ell, grad


def length_hessian(fn: FNPoint, curve, rel_step: float = 1e-3) -> np.ndarray:
    """Coordinate Hessian of a length function from central differences of the
    exact gradient, Richardson-extrapolated over steps ``h`` and ``h/2``."""
    h = rel_step * min(1.0, fn.l_alpha)
    base = fn.as_array()

    def central(step):
        H = np.zeros((2, 2))
        for i in range(2):
            e = np.zeros(2)
            e[i] = step
            gp = length_jet(FNPoint(*(base + e)), curve)[1]
            gm = length_jet(FNPoint(*(base - e)), curve)[1]
            H[:, i] = (gp - gm) / (2.0 * step)
        return H

    H = (4.0 * central(h / 2) - central(h)) / 3.0
    return 0.5 * (H + H.T)
