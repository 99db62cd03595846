import math

import numpy as np
import pytest

from wplab import teich
from wplab.domain import dirichlet_domain
from wplab.fuchsian import SQUARE_POINT, FNPoint, group_from_fn
from wplab.series import build_coset_sum, first_variation, theta_beltrami
from wplab.teich import (
    ALPHA,
    busemann_monotonicity,
    complex_hessian,
    convexity_probe,
    geodesic_shoot,
    grad_norm_sq,
    hessian_covariant,
    hessian_fd,
    holomorphic_differential,
    length_differential,
    length_functional,
    metric_tensor,
    speed_drift,
    systole,
    systole_brute_force,
    unit_vector,
)

POINTS = [SQUARE_POINT, FNPoint(1.3, 0.4), FNPoint(0.5, -0.2), FNPoint(2.5, 1.1)]


# -- metric ---------------------------------------------------------------------------

@pytest.mark.parametrize("p", POINTS)
def test_metric_spd_and_symmetric(p):
    m = metric_tensor(p)
    assert abs(m.g[0, 1] - m.g[1, 0]) <= 1e-8
    assert np.all(np.linalg.eigvalsh(m.g) > 0)


@pytest.mark.parametrize("p", POINTS)
def test_complex_structure_is_orthogonal(p):
    m = metric_tensor(p)
    assert np.allclose(m.J @ m.J, -np.eye(2), atol=1e-12)
    assert np.allclose(m.J.T @ m.g @ m.J, m.g, rtol=1e-10, atol=1e-12)


@pytest.mark.parametrize("p", POINTS[:3])
def test_twist_and_matching_agree(p):
    a = metric_tensor(p).g
    b = metric_tensor(p, method="matching").g
    assert np.allclose(a, b, rtol=5e-3, atol=5e-3 * np.abs(a).max())


def test_grad_norm_two_routes_at_square_point():
    # grad l_alpha = (2/pi) nu_alpha, so |grad l_alpha|^2 = (2/pi) d l_alpha(nu_alpha)
    G = group_from_fn(SQUARE_POINT)
    fd = dirichlet_domain(G)
    cs = build_coset_sum(G, ALPHA, 8)
    via_pairing = 2 / math.pi * first_variation(theta_beltrami(cs, fd), cs)
    assert grad_norm_sq(ALPHA, SQUARE_POINT) == pytest.approx(via_pairing, rel=1e-3)


@pytest.mark.parametrize("p", POINTS[:3])
def test_metric_derivative_matches_differences(p):
    m = metric_tensor(p)
    h = 1e-5
    for k in range(2):
        e = np.zeros(2)
        e[k] = h
        gp = metric_tensor(FNPoint(*(p.as_array() + e))).g
        gm = metric_tensor(FNPoint(*(p.as_array() - e))).g
        assert np.allclose(m.dg[k], (gp - gm) / (2 * h), rtol=1e-6, atol=1e-7 * np.abs(m.g).max())
    Gam = m.christoffel()
    assert np.allclose(Gam, Gam.transpose(0, 2, 1), atol=1e-14)


@pytest.mark.parametrize("k", [1, -1, 2])
def test_twist_reduction_is_isometry(k):
    # direct assembly at the unreduced point against the pulled-back metric
    ell, tau = 0.9, 0.2
    p = FNPoint(ell, tau + k * ell)
    gap = []
    for L in (8, 10):
        direct = teich._metric_twist(p, teich.TEST_CURVES, L).g
        reduced = metric_tensor(p, max_len=L).g
        gap.append(np.abs(direct - reduced).max() / np.abs(direct).max())
    # agreement at the truncation level of the word sums
    assert max(gap) < 1e-3


@pytest.mark.parametrize("tau", [0.3, 0.45, 0.5, 0.6])
def test_metric_smooth_across_representatives(tau):
    # inside the blend zone the metric derivative still matches differences
    p = FNPoint(0.9, tau)
    m = metric_tensor(p)
    h = 1e-5
    for k in range(2):
        e = np.zeros(2)
        e[k] = h
        fd = (metric_tensor(FNPoint(*(p.as_array() + e))).g - metric_tensor(FNPoint(*(p.as_array() - e))).g) / (2 * h)
        assert np.allclose(m.dg[k], fd, rtol=1e-6, atol=1e-8)
    assert np.allclose(m.J.T @ m.g @ m.J, m.g, atol=1e-12)


def test_metric_exactly_twist_equivariant():
    p, q = FNPoint(0.9, 0.35), FNPoint(0.9, 0.35 + 0.9)
    D = np.array([[1.0, 0.0], [-1.0, 1.0]])
    assert np.allclose(metric_tensor(q).g, D.T @ metric_tensor(p).g @ D, rtol=1e-12)


@pytest.mark.parametrize("slope", [(0, 1), (1, 1), (1, 2)])
def test_grad_norm_dehn_twist_equivariance(slope):
    ell, tau = 0.9, 0.2
    pq, q = slope
    # B -> AB relabels slope p/q as (p + q)/q
    shifted = grad_norm_sq(slope, FNPoint(ell, tau + ell))
    assert shifted == pytest.approx(grad_norm_sq((pq + q, q), FNPoint(ell, tau)), rel=1e-3)


# -- geodesics --------------------------------------------------------------------------

def test_zero_length_geodesic():
    p = FNPoint(1.3, 0.4)
    v = unit_vector(p, [1.0, 0.5])
    path = geodesic_shoot(p, v, 0.0)
    assert len(path.samples) == 1 and path.end == p and path.flag is None


def test_shoot_rejects_non_unit_velocity():
    with pytest.raises(ValueError):
        geodesic_shoot(FNPoint(1.3, 0.4), [1.0, 0.0], 0.5)


def test_geodesic_reversibility():
    p = FNPoint(1.3, 0.4)
    v = unit_vector(p, [0.3, 1.0])
    out = geodesic_shoot(p, v, 0.5, step=0.05)
    # the end velocity is unit up to the integration error; renormalise for the check
    back = geodesic_shoot(out.end, unit_vector(out.end, -out.samples[-1][2]), 0.5, step=0.05)
    assert np.allclose(back.end.as_array(), p.as_array(), atol=1e-6)


@pytest.mark.parametrize("seed", range(5))
def test_speed_conservation(seed):
    rng = np.random.default_rng(seed)
    p = FNPoint(rng.uniform(0.6, 2.5), rng.uniform(-1, 1))
    th = rng.uniform(0, 2 * math.pi)
    path = geodesic_shoot(p, unit_vector(p, [math.cos(th), math.sin(th)]), 1.0, step=0.1)
    assert speed_drift(path) < 1e-4


def test_step_halving_changes_endpoint_little():
    p = FNPoint(1.3, 0.4)
    v = unit_vector(p, [1.0, -0.4])
    a = geodesic_shoot(p, v, 1.0, step=0.1).end.as_array()
    b = geodesic_shoot(p, v, 1.0, step=0.05).end.as_array()
    assert np.max(np.abs(a - b)) < 1e-5


def test_geodesic_flags_stratum_approach():
    p = FNPoint(0.05, 0.0)
    m = metric_tensor(p)
    down = -m.ginv @ length_differential(ALPHA, p)
    path = geodesic_shoot(p, unit_vector(p, down), 1.0, floor=1e-2)
    assert path.flag == "approached stratum"
    assert path.end.l_alpha < 1e-2


# -- Hessians ---------------------------------------------------------------------------

@pytest.mark.parametrize("slope", [(1, 0), (0, 1), (1, 1)])
@pytest.mark.parametrize("angle", [0.3, 2.0])
def test_geodesic_hessian_matches_covariant(slope, angle):
    p = FNPoint(1.3, 0.4)
    v = unit_vector(p, [math.cos(angle), math.sin(angle)])
    fd = hessian_fd(slope, p, v)
    cov = hessian_covariant(slope, p, v)
    assert fd > 0
    assert fd == pytest.approx(cov, rel=1e-4)


def test_hessian_fd_leaves_chart():
    p = FNPoint(2e-3, 0.0)
    m = metric_tensor(p)
    down = -m.ginv @ length_differential(ALPHA, p)
    with pytest.raises(teich.ChartError):
        hessian_fd(ALPHA, p, unit_vector(p, down), h=0.08)


def test_complex_hessian_and_holomorphic_part():
    p = FNPoint(1.3, 0.4)
    m = metric_tensor(p)
    v = unit_vector(p, [1.0, 0.2])
    c = complex_hessian((0, 1), p, v)
    assert c > 0
    # Levi form is J-invariant
    assert complex_hessian((0, 1), p, m.J @ v) == pytest.approx(c, rel=1e-12)
    d = length_differential((0, 1), p)
    dl = holomorphic_differential((0, 1), p, v)
    assert dl.real == pytest.approx(0.5 * d @ v, rel=1e-14)
    # (1,0) part: value on Jv is i times the value on v
    assert holomorphic_differential((0, 1), p, m.J @ v) == pytest.approx(1j * dl, rel=1e-12)


# -- convexity probe -------------------------------------------------------------------

@pytest.fixture(scope="module")
def unit_path():
    p = FNPoint(1.3, 0.4)
    return geodesic_shoot(p, unit_vector(p, [0.4, 1.0]), 1.0, step=0.1)


@pytest.mark.parametrize("kind, curves", [("length", (0, 1)), ("sqrt", (1, 1)), ("sqrt_sum", [(1, 0), (0, 1)])])
def test_convexity_along_geodesic(unit_path, kind, curves):
    rep = convexity_probe(unit_path, length_functional(kind, curves))
    assert rep.convex and rep.min_value > rep.noise_floor and not rep.degenerate


def test_convexity_of_constant(unit_path):
    rep = convexity_probe(unit_path, length_functional("one", None))
    assert np.all(np.abs(rep.second_differences) <= rep.noise_floor + 1e-300)
    assert not rep.convex


def test_convexity_degenerate_and_short_paths(unit_path):
    p = FNPoint(1.3, 0.4)
    zero = geodesic_shoot(p, unit_vector(p, [1.0, 0.0]), 0.0)
    rep = convexity_probe(zero, length_functional("length", (0, 1)))
    assert rep.degenerate and rep.second_differences.size == 0
    short = teich.WPPath(unit_path.samples[:5])
    with pytest.raises(ValueError):
        convexity_probe(short, length_functional("length", (0, 1)))


# -- systole ----------------------------------------------------------------------------

@pytest.mark.parametrize("p", POINTS + [FNPoint(6.0, 2.0), FNPoint(0.2, 0.05), FNPoint(3.0, -2.9)])
def test_systole_matches_brute_force(p):
    ell, slope = systole(p)
    ref, ref_slope = systole_brute_force(p)
    assert ell == pytest.approx(ref, rel=1e-12)


def test_systole_square_point():
    ell, _ = systole(SQUARE_POINT)
    assert ell == pytest.approx(2 * math.acosh(1.5), rel=1e-12)


# -- stratum ----------------------------------------------------------------------------

def test_stratum_distance_small_length(stratum):
    r = stratum(1e-3)
    assert abs(r.distance - math.sqrt(2 * math.pi * 1e-3)) < 1e-4
    assert r.distance == pytest.approx(0.07927, abs=1e-4)


def test_stratum_distance_monotone_in_length(stratum):
    d = [stratum(ell).distance for ell in (1e-3, 3e-3, 1e-2)]
    assert d[0] < d[1] < d[2]


def test_stratum_bound_at_order_one_length(stratum):
    r = stratum(1.0)
    assert r.distance <= math.sqrt(2 * math.pi) * (1 + 1e-12)


def test_busemann_derivative(stratum):
    rep = busemann_monotonicity(FNPoint(1e-2, 0.0), stratum(1e-2))
    assert np.all(np.isfinite(rep.derivatives))
    assert rep.min_derivative >= 1 - 1e-3
    assert rep.beta_monotonicity.startswith("not applicable")


def test_busemann_refinement_does_not_lower_minimum(stratum):
    # the realizing angle shot again with a finer step cap near the stratum
    p = FNPoint(1e-2, 0.0)
    coarse = busemann_monotonicity(p, stratum(1e-2))
    dist, j, path = teich._shot_distance(p, stratum(1e-2).angle, teich.STRATUM_FLOOR, 0.05, 1.5,
                                         stratum_fraction=0.025, max_len=6)
    path.samples = path.samples[:j + 1]
    fine = busemann_monotonicity(p, teich.StratumDistance(dist, stratum(1e-2).angle, path, 0.0))
    assert fine.min_derivative >= coarse.min_derivative - 1e-6


def test_injectivity_ratio_tends_to_collar_constant(stratum):
    r = stratum(1e-3)
    ratio = r.distance / math.sqrt(systole(FNPoint(1e-3, 0.0))[0])
    assert ratio == pytest.approx(math.sqrt(2 * math.pi), rel=0.05)
