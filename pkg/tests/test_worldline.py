import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lorentz_schwarzian.diffeo import (ComposedDiffeo, FourierDiffeo, MobiusDiffeo, Rotation,
                                       fixed_point_free, random_diffeo)
from lorentz_schwarzian.errors import DomainError, IntegrationError, TimelikeError
from lorentz_schwarzian.jets import Jet3, elementary_jet
from lorentz_schwarzian.metric import (CONST_POS_MATRIX, MetricQuad, QuadMetric, custom_metric,
                                       extra_term, flat_metric, random_quad)
from lorentz_schwarzian.projective import MobiusMap, mobius_jet
from lorentz_schwarzian.schwarzian import (count_zeros_periodic, match_distance,
                                           projective_schwarzian, schwarzian)
from lorentz_schwarzian.worldline import (admissible_samples, curvature_formula, curvature_oracle,
                                          identity_rhs, explicit, graph, graph_angle, proper_time,
                                          random_wavy, reparametrize, rho_prime_lhs,
                                          theorem_residual, velocity_norm, vertices)

FLAT = flat_metric()
J = MetricQuad.from_matrix(CONST_POS_MATRIX)
CUSTOM = ["exp_xy", "inv_bowl", "wave"]


def exp_graph():
    return graph(lambda t: elementary_jet("exp", t), "exp")


def cube_graph():
    return graph(lambda t: elementary_jet("power", t, 3), "cube")


def fixed_point_free_diffeo(seed):
    """Rotation by pi/2 with small even-frequency noise, graph avoids the diagonal."""
    noise = FourierDiffeo(0.0, random_diffeo(seed, 3, 0.05).coeffs)
    f = ComposedDiffeo([Rotation(math.pi / 2), noise])
    assert fixed_point_free(f, MobiusMap.identity())
    return f


def test_velocity_norm_examples():
    assert velocity_norm(explicit("diagonal"), FLAT, 0.7) == pytest.approx(1)
    assert velocity_norm(exp_graph(), FLAT, 0.3) == pytest.approx(math.exp(0.3))
    assert velocity_norm(explicit("hyperbola"), J, 1.0) == pytest.approx(0.25)


def test_velocity_norm_rejects_spacelike():
    w = explicit("wavy", x=(0, 1, 0, 1, 0), y=(0, -1, 0, 1, 0))
    with pytest.raises(TimelikeError):
        velocity_norm(w, FLAT, 0.0)


def test_proper_time_examples():
    assert proper_time(explicit("diagonal"), FLAT, 0.0, 3.0) == pytest.approx(3, abs=1e-10)
    assert proper_time(cube_graph(), FLAT, 1.0, 2.0) == pytest.approx(1.5 * math.sqrt(3), abs=1e-10)
    with pytest.raises(IntegrationError):
        proper_time(explicit("diagonal"), FLAT, 1.0, 0.0)


def test_proper_time_additive_and_increasing():
    w = random_wavy(np.random.default_rng(0))
    gm = custom_metric("wave")
    a = proper_time(w, gm, -1.0, 0.2)
    b = proper_time(w, gm, 0.2, 1.0)
    assert proper_time(w, gm, -1.0, 1.0) == pytest.approx(a + b, abs=1e-9)
    assert a > 0 and b > 0


def test_proper_time_names_bad_point():
    # the curve (t, t) meets the diagonal singular set of J everywhere
    with pytest.raises(IntegrationError) as err:
        proper_time(explicit("diagonal"), J, 0.0, 1.0)
    assert err.value.where == 0.0


def test_curvature_examples():
    for fn in (curvature_formula, curvature_oracle):
        assert fn(explicit("diagonal"), FLAT, 0.4) == pytest.approx(0, abs=1e-14)
        assert fn(exp_graph(), FLAT, 0.0) == pytest.approx(1)
        assert fn(cube_graph(), FLAT, 1.0) == pytest.approx(2 / math.sqrt(3))


@pytest.mark.parametrize("metric", ["quad"] + CUSTOM)
def test_formula_matches_oracle(metric):
    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(10):
        gm = QuadMetric(random_quad(rng)) if metric == "quad" else custom_metric(metric)
        w = random_wavy(rng)
        taus = admissible_samples(w, gm, 50, rng, interval=(-1.5, 1.5))
        a, b = curvature_formula(w, gm, taus), curvature_oracle(w, gm, taus)
        worst = max(worst, np.max(np.abs(a - b) / np.maximum(1, np.abs(b))))
    assert worst < 1e-8


def test_reparametrization_invariance():
    rng = np.random.default_rng(2)
    gm = custom_metric("exp_xy")
    w = random_wavy(rng)
    # h(s) = s + 0.3 sin(s) + 0.1, with h' >= 0.7
    def h(s):
        s = np.asarray(s, dtype=float)
        return Jet3(s + 0.3 * np.sin(s) + 0.1, 1 + 0.3 * np.cos(s), -0.3 * np.sin(s),
                    -0.3 * np.cos(s))
    wr = reparametrize(w, h)
    sig = np.linspace(-1, 1, 21)
    hs = h(sig)
    np.testing.assert_allclose(curvature_formula(wr, gm, sig), curvature_formula(w, gm, hs.v),
                               atol=1e-8)
    np.testing.assert_allclose(rho_prime_lhs(wr, gm, sig),
                               rho_prime_lhs(w, gm, hs.v) * hs.d1 ** 2, atol=1e-7)


def test_identity_rhs_examples():
    w = exp_graph()
    assert identity_rhs(w, FLAT, 0.5) == pytest.approx(-0.5)
    assert identity_rhs(explicit("diagonal"), custom_metric("exp_xy"), 1.0) == pytest.approx(0, abs=1e-14)
    rng = np.random.default_rng(3)
    M = random_quad(rng)
    wv = random_wavy(rng)
    taus = admissible_samples(wv, M, 10, rng, interval=(-1, 1))
    jx, jy = wv.x_jet(taus), wv.y_jet(taus)
    np.testing.assert_allclose(identity_rhs(wv, M, taus), schwarzian(jy) - schwarzian(jx), atol=1e-9)


def test_rho_prime_examples():
    assert rho_prime_lhs(exp_graph(), FLAT, 0.0) == pytest.approx(-0.5, abs=1e-8)
    assert rho_prime_lhs(cube_graph(), FLAT, 1.0) == pytest.approx(-4, abs=1e-7)
    # Mobius graph: constant curvature
    m = MobiusMap(2, 1, 1, 1)
    w = graph(lambda t: mobius_jet(m, t))
    assert rho_prime_lhs(w, FLAT, 0.5) == pytest.approx(0, abs=1e-8)


def test_flat_chart_identity():
    m = MobiusMap(2, 1, 1, 1)
    cases = [(exp_graph(), lambda t: elementary_jet("exp", t), (-1, 1)),
             (cube_graph(), lambda t: elementary_jet("power", t, 3), (0.3, 2)),
             (graph(lambda t: mobius_jet(m, t)), lambda t: mobius_jet(m, t), (-0.5, 2))]
    for w, f, (lo, hi) in cases:
        t = np.linspace(lo, hi, 25)
        np.testing.assert_allclose(rho_prime_lhs(w, FLAT, t), schwarzian(f(t)), atol=1e-6)


@pytest.mark.parametrize("metric", CUSTOM)
def test_general_identity_for_any_metric(metric):
    rng = np.random.default_rng(4)
    gm = custom_metric(metric)
    for _ in range(5):
        w = random_wavy(rng)
        t = np.linspace(-1, 1, 40)
        assert np.max(np.abs(rho_prime_lhs(w, gm, t) - identity_rhs(w, gm, t))) < 1e-6


def test_theorem_residual_examples():
    t = np.linspace(-1, 1, 41)
    rep = theorem_residual(exp_graph(), FLAT, t)
    assert rep.max_abs < 1e-6 and rep.n_points == 41
    assert rep.max_abs >= rep.rms >= 0
    assert any(d[0] == rep.worst_point and abs(d[3]) == rep.max_abs for d in rep.details)

    f = fixed_point_free_diffeo(11)
    w = graph(f)
    rng = np.random.default_rng(5)
    taus = admissible_samples(w, J, 64, rng)
    assert theorem_residual(w, J, taus).max_abs < 1e-6

    rep = theorem_residual(exp_graph(), custom_metric("inv_bowl"), np.linspace(0, 1, 33))
    assert rep.max_abs > 1e-2
    t = np.linspace(0, 1, 33)
    assert np.max(np.abs(extra_term(custom_metric("inv_bowl"), "x", t, np.exp(t)))) > 1e-3


def test_theorem_residual_records_failures():
    # the hyperbola (t, -1/t) is undefined at t = 0
    taus = np.concatenate([np.linspace(0.5, 2, 9), [0.0]])
    rep = theorem_residual(explicit("hyperbola"), FLAT, taus)
    assert rep.n_points == 9 and len(rep.failures) == 1 and rep.failures[0][0] == 0.0
    with pytest.raises(DomainError):
        theorem_residual(explicit("hyperbola"), FLAT, [0.0, 0.0, 1.0])


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_theorem_sufficiency_random(seed):
    rng = np.random.default_rng(seed)
    M = random_quad(rng)
    w = graph(random_diffeo(seed, 3, 0.3))
    taus = admissible_samples(w, M, 32, rng)
    assert theorem_residual(w, M, taus).max_abs < 1e-6


def test_vertices_mobius_graph_is_degenerate():
    m = MobiusMap.rotation(math.pi / 2) @ MobiusMap(1.2, 0, 0, 1 / 1.2)
    f = MobiusDiffeo(m)
    assert fixed_point_free(f, MobiusMap.identity())
    rep = vertices(graph_angle(f), QuadMetric(J).angle_chart(), n_grid=1024)
    assert rep.degenerate and rep.count == 0


def test_vertices_need_closed_curve():
    with pytest.raises(ValueError):
        vertices(exp_graph(), FLAT)
    with pytest.raises(ValueError):
        vertices(graph_angle(Rotation(1.0)), J)  # affine-chart metric on an angle-chart curve


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_vertices_match_projective_schwarzian(seed):
    f = fixed_point_free_diffeo(seed)
    gm = QuadMetric(J).angle_chart()
    rep = vertices(graph_angle(f), gm, n_grid=2048)
    ps = count_zeros_periodic(lambda t: projective_schwarzian(f, t).value, 2048)
    assert rep.count >= 4 and rep.count == ps.count
    assert match_distance(rep.locations, ps.locations) < 1e-6


def test_angle_chart_lhs_is_projective_schwarzian():
    f = fixed_point_free_diffeo(4)
    t = np.linspace(0, math.pi, 50)
    lhs = rho_prime_lhs(graph_angle(f), QuadMetric(J).angle_chart(), t)
    np.testing.assert_allclose(lhs, projective_schwarzian(f, t).value, atol=1e-7)


def test_fourier_example_vertices():
    eps = 0.02
    f = ComposedDiffeo([Rotation(math.pi / 2), FourierDiffeo(0.0, ((2, eps, 0.0),))])
    rep = vertices(graph_angle(f), QuadMetric(J).angle_chart(), n_grid=2048)
    # to first order PS = eps (u''' + 4 u') = -48 eps cos(4 theta) for u = sin(4 theta)
    assert rep.count == 4
    expected = (2 * np.arange(4) + 1) * math.pi / 8
    assert match_distance(rep.locations, expected) < 10 * eps
