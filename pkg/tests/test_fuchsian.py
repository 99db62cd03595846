import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wplab.fuchsian import (
    SQUARE_POINT,
    FNPoint,
    ResourceError,
    axis,
    curve_length,
    enumerate_elements,
    free_basis,
    group_from_fn,
    length_from_trace,
    length_hessian,
    length_jet,
    primitive_class,
    reduce_word,
    substitute,
    word_jet,
)
from wplab.hyperbolic import (
    GeodesicEnds,
    GeometryError,
    HPoint,
    MoebiusMap,
    dist_point_geodesic,
    hyperbolic_distance,
    mobius_apply,
)
from wplab.words import nielsen_is_basis

fn_points = st.builds(FNPoint, st.floats(0.2, 5.0), st.floats(-3.0, 3.0))
SAMPLE_WORDS = ["A", "B", "AB", "ABB", "AAB", "aB", "ABaB", "AABAB", "BBa", "AbAB"]


def _random_words(rng, n, max_len=6):
    out = []
    while len(out) < n:
        w = reduce_word("".join(rng.choice(list("ABab"), size=rng.integers(1, max_len + 1))))
        if w:
            out.append(w)
    return out


def test_square_point_traces():
    # Markov oracle: tr B = tr AB = x / sqrt(x - 2) at x = tr A = 3
    x, y, z = group_from_fn(SQUARE_POINT).traces()
    assert x == pytest.approx(3.0, rel=1e-13)
    assert abs(y) == pytest.approx(3 / math.sqrt(3 - 2), rel=1e-12)
    assert abs(z) == pytest.approx(3.0, rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(fn_points)
def test_group_invariants(p):
    G = group_from_fn(p)
    x, y, z = G.traces()
    assert x == pytest.approx(2 * math.cosh(p.l_alpha / 2), rel=1e-13)
    assert x * x + y * y + z * z == pytest.approx(x * y * z, rel=1e-9)
    assert np.trace(G.commutator()) == pytest.approx(-2.0, abs=1e-9 * max(1, x * y * z))
    assert curve_length(G, "A") == pytest.approx(p.l_alpha, rel=1e-10)
    A = G.gen_a.matrix
    assert A[0, 1] == 0 and A[1, 0] == 0


@settings(max_examples=20, deadline=None)
@given(fn_points)
def test_full_twist_is_dehn_twist(p):
    G0 = group_from_fn(p)
    G1 = group_from_fn(FNPoint(p.l_alpha, p.tau + p.l_alpha))
    for w in SAMPLE_WORDS:
        t1 = abs(np.trace(G1.word_matrix(w)))
        t0 = abs(np.trace(G0.word_matrix(substitute(w, {"A": "A", "B": "AB"}))))
        assert t1 == pytest.approx(t0, rel=1e-9)


def test_enumeration_counts_and_determinants():
    G = group_from_fn(SQUARE_POINT)
    assert len(enumerate_elements(G, 1)) == 4
    els = enumerate_elements(G, 2)
    assert len(els) == 16
    assert len({w for w, _ in els}) == 16
    assert all(reduce_word(w) == w for w, _ in els)
    for _, m in enumerate_elements(G, 4):
        assert np.linalg.det(m) == pytest.approx(1.0, abs=1e-10)
    assert [w for w, _ in els] == [w for w, _ in enumerate_elements(G, 2)]
    with pytest.raises(ResourceError):
        enumerate_elements(G, 17)


def test_primitive_class_conventions():
    assert primitive_class(1, 0).word == "A"
    assert primitive_class(0, 1).word == "B"
    assert primitive_class(1, 1).word == "AB"
    with pytest.raises(ValueError):
        primitive_class(2, 4)


def test_slope_half_matches_brute_force():
    # the simple class is the shortest class with abelianisation (1, 2)
    G = group_from_fn(SQUARE_POINT)
    w = primitive_class(1, 2).word
    assert len(w) == 3
    best = math.inf
    for n in range(1, 4):
        for letters in itertools.product("ABab", repeat=n):
            cand = "".join(letters)
            if reduce_word(cand) != cand:
                continue
            ea = cand.count("A") - cand.count("a")
            eb = cand.count("B") - cand.count("b")
            if (ea, eb) in ((1, 2), (-1, -2)):
                best = min(best, abs(np.trace(G.word_matrix(cand))))
    assert abs(np.trace(G.word_matrix(w))) == pytest.approx(best, rel=1e-12)


@pytest.mark.parametrize("slope", [(1, 0), (0, 1), (1, 1), (1, 2), (2, 3), (-1, 2), (3, 5)])
def test_free_basis_is_basis(slope):
    S, T = free_basis(*slope)
    assert S == primitive_class(*slope).word
    assert nielsen_is_basis(S, T)


def test_length_from_trace_examples():
    assert length_from_trace(MoebiusMap(math.e, 0, 0, 1 / math.e)) == pytest.approx(2.0, rel=1e-14)
    assert length_from_trace(np.array([[3.0, 1.0], [-1.0, 0.0]])) == pytest.approx(1.9248473002384139, rel=1e-14)
    with pytest.raises(GeometryError, match="parabolic"):
        length_from_trace(np.array([[1.0, 1.0], [0.0, 1.0]]))


def test_axis_examples():
    assert axis(MoebiusMap(math.e, 0, 0, 1 / math.e)) == GeodesicEnds(0, math.inf)
    P = np.array([[1.0, 1.0], [0.0, 1.0]])
    D = np.diag([math.e, 1 / math.e])
    assert axis(P @ D @ np.linalg.inv(P)) == GeodesicEnds(1, math.inf)
    with pytest.raises(GeometryError):
        axis(P)


@settings(max_examples=40, deadline=None)
@given(fn_points, st.sampled_from(SAMPLE_WORDS[2:]), st.floats(-2, 2), st.floats(0.2, 3))
def test_axis_is_translated(p, w, x, y):
    M = group_from_fn(p).word_matrix(w)
    g = axis(M)
    z = HPoint(x, y)
    Mz = mobius_apply(MoebiusMap.from_array(M / math.sqrt(np.linalg.det(M))), z)
    assert dist_point_geodesic(Mz, g) == pytest.approx(dist_point_geodesic(z, g), abs=1e-9)
    # a point on the axis moves by exactly the translation length
    c, r = (g.a + g.b) / 2, abs(g.b - g.a) / 2
    on = HPoint(c, r) if not g.vertical else HPoint(g.a, 1.0)
    assert hyperbolic_distance(on, mobius_apply(MoebiusMap.from_array(M), on)) == pytest.approx(
        length_from_trace(M), rel=1e-8)


@settings(max_examples=30, deadline=None)
@given(fn_points, st.integers(0, 2 ** 31))
def test_conjugation_and_power_invariance(p, seed):
    G = group_from_fn(p)
    rng = np.random.default_rng(seed)
    for w, c in zip(_random_words(rng, 4), _random_words(rng, 4)):
        M = G.word_matrix(w)
        C = G.word_matrix(c)
        # rounding in the conjugate grows like |C|^2 |M|
        tol = 1e-13 * np.linalg.norm(C) ** 2 * np.linalg.norm(M) + 1e-10
        assert abs(np.trace(C @ M @ np.linalg.inv(C)) - np.trace(M)) <= tol
        if abs(np.trace(M)) > 2.5:
            assert length_from_trace(M @ M) == pytest.approx(2 * length_from_trace(M), rel=1e-10)


@pytest.mark.parametrize("p", [FNPoint(1.3, 0.4), FNPoint(0.4, -0.1), FNPoint(3.0, 1.7)])
@pytest.mark.parametrize("slope", [(1, 0), (0, 1), (1, 1), (1, 2), (-2, 3)])
def test_length_gradient_matches_central_differences(p, slope):
    c = primitive_class(*slope)
    ell, grad = length_jet(p, c)
    assert ell == pytest.approx(curve_length(group_from_fn(p), c), rel=1e-12)
    h = 1e-5
    fd = []
    for k in range(2):
        e = np.zeros(2)
        e[k] = h
        lp = length_jet(FNPoint(*(p.as_array() + e)), c)[0]
        lm = length_jet(FNPoint(*(p.as_array() - e)), c)[0]
        fd.append((lp - lm) / (2 * h))
    assert np.allclose(grad, fd, rtol=1e-8, atol=1e-8)


@pytest.mark.parametrize("slope", [(0, 1), (1, 1), (1, 2)])
def test_length_hessian_matches_differences(slope):
    p = FNPoint(1.3, 0.4)
    c = primitive_class(*slope)
    H = length_hessian(p, c)
    h = 1e-4
    fd = np.empty((2, 2))
    for k in range(2):
        e = np.zeros(2)
        e[k] = h
        gp = length_jet(FNPoint(*(p.as_array() + e)), c)[1]
        gm = length_jet(FNPoint(*(p.as_array() - e)), c)[1]
        fd[:, k] = (gp - gm) / (2 * h)
    assert np.allclose(H, H.T)
    assert np.allclose(H, fd, rtol=1e-6, atol=1e-7)


@pytest.mark.parametrize("word", ["B", "b", "bA", "ABa", "BBab"])
def test_word_jet_traces_match_differences(word):
    p = FNPoint(0.7, 0.2)
    M, dM = word_jet(p, word)
    h = 1e-6
    for k in range(2):
        e = np.zeros(2)
        e[k] = h
        tp = np.trace(word_jet(FNPoint(*(p.as_array() + e)), word)[0])
        tm = np.trace(word_jet(FNPoint(*(p.as_array() - e)), word)[0])
        assert np.trace(dM[k]) == pytest.approx((tp - tm) / (2 * h), rel=1e-6, abs=1e-7)


def test_jets_at_small_length():
    # balanced gauge keeps the pinched generator accurate
    p = FNPoint(1e-3, 0.0)
    ell, grad = length_jet(p, primitive_class(0, 1))
    h = 1e-7
    lp = length_jet(FNPoint(p.l_alpha + h, 0.0), primitive_class(0, 1))[0]
    lm = length_jet(FNPoint(p.l_alpha - h, 0.0), primitive_class(0, 1))[0]
    assert grad[0] == pytest.approx((lp - lm) / (2 * h), rel=1e-6)
