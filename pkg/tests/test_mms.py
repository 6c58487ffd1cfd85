import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from npe_adi.mms import (BenchmarkSpec, _Forcing, error_norms, exact_solution, fit_order, integrate,
                         run_spatial_study, run_temporal_study, source_term_F)

SPEC = BenchmarkSpec()


def test_exact_solution_examples():
    assert exact_solution(math.pi / 2, math.pi / 2, math.pi / 2, 0.0) == pytest.approx(2.0)
    assert exact_solution(0.0, 1.3, -0.4, 2.0) == 0.0
    assert exact_solution(math.pi / 2, math.pi / 2, math.pi / 2, 1e4) == pytest.approx(1.0)


# independent closed forms, written out here rather than shared with the library


def _phi(x, y, z, t, gamma=0.1):
    return math.sin(x) * math.sin(y) * math.sin(z) * (1 + math.exp(-gamma * t))


def _grad(x, y, z, t, gamma=0.1):
    a = 1 + math.exp(-gamma * t)
    sx, sy, sz, cx, cy, cz = (math.sin(x), math.sin(y), math.sin(z), math.cos(x), math.cos(y), math.cos(z))
    return a * cx * sy * sz, a * sx * cy * sz, a * sx * sy * cz


def _flux(axis, p, t, spec):
    g = _grad(*p, t, spec.gamma)
    eps = spec.eps_m + (spec.eps_s - spec.eps_m) / (1 + spec.alpha * sum(v * v for v in g))
    return eps * g[axis]


def _divergence(p, t, spec, d=1e-3):
    # fourth-order central difference of each flux component
    total = 0.0
    for axis in range(3):
        def f(s):
            q = list(p)
            q[axis] += s
            return _flux(axis, q, t, spec)
        total += (-f(2 * d) + 8 * f(d) - 8 * f(-d) + f(-2 * d)) / (12 * d)
    return total


@given(st.floats(-math.pi, math.pi), st.floats(-math.pi, math.pi), st.floats(-math.pi, math.pi),
       st.floats(0, 10))
def test_forcing_satisfies_the_equation(x, y, z, t):
    d = 1e-4
    phi_t = (_phi(x, y, z, t + d) - _phi(x, y, z, t - d)) / (2 * d)
    res = phi_t - _divergence((x, y, z), t, SPEC) - source_term_F(x, y, z, t, SPEC)
    assert abs(res) < 1e-6


def test_random_points_residual_batch():
    rng = np.random.default_rng(3)
    pts = rng.uniform(-math.pi, math.pi, size=(200, 3))
    ts = rng.uniform(0, 10, size=200)
    worst = 0.0
    for (x, y, z), t in zip(pts, ts):
        phi_t = -0.1 * math.exp(-0.1 * t) * math.sin(x) * math.sin(y) * math.sin(z)
        worst = max(worst, abs(phi_t - _divergence((x, y, z), t, SPEC) - source_term_F(x, y, z, t, SPEC)))
    assert worst < 1e-6


def test_zero_gradient_point_reduces_to_heat_forcing():
    p = (math.pi / 2,) * 3
    t = 1.5
    assert all(abs(v) < 1e-15 for v in _grad(*p, t))
    a = 1 + math.exp(-0.1 * t)
    expected = -0.1 * math.exp(-0.1 * t) - SPEC.eps_s * (-3 * a)
    assert source_term_F(*p, t, SPEC) == pytest.approx(expected, rel=1e-12)


def test_forcing_time_structure():
    # phi_t and the linear part scale with the decay factors, the eps coupling with a^3
    rng = np.random.default_rng(4)
    x, y, z = rng.uniform(-3, 3, size=(3, 50))
    flat = BenchmarkSpec(eps_m=80.0, eps_s=80.0)
    for t in (0.0, 50.0):
        a, decay = 1 + math.exp(-0.1 * t), math.exp(-0.1 * t)
        s = np.sin(x) * np.sin(y) * np.sin(z)
        assert np.allclose(source_term_F(x, y, z, t, flat), -0.1 * decay * s + 80 * 3 * a * s)


def test_cached_forcing_matches_pointwise():
    rng = np.random.default_rng(5)
    x, y, z = rng.uniform(-math.pi, math.pi, size=(3, 40))
    for spec in (SPEC, BenchmarkSpec(forcing="printed")):
        f = _Forcing(x, y, z, spec)
        for t in (0.0, 0.37, 10.0):
            assert np.allclose(f(t), source_term_F(x, y, z, t, spec), rtol=1e-12, atol=1e-12)


def test_printed_forcing_differs_from_consistent():
    x, y, z = 0.4, -1.1, 2.0
    assert source_term_F(x, y, z, 1.0, BenchmarkSpec(forcing="printed")) != pytest.approx(
        source_term_F(x, y, z, 1.0, SPEC), rel=1e-3)
    with pytest.raises(ValueError):
        source_term_F(x, y, z, 1.0, BenchmarkSpec(forcing="other"))


def test_grid_requires_even_division():
    assert SPEC.grid(math.pi / 8).dims == (17, 17, 17)
    with pytest.raises(ValueError):
        SPEC.grid(0.3)
    with pytest.raises(ValueError):
        SPEC.grid(math.pi)


def test_error_norms():
    a = np.zeros((2, 2, 2))
    b = a.copy()
    b[0, 0, 0] = 2.0
    linf, l2 = error_norms(a, b)
    assert linf == 2.0 and l2 == pytest.approx(math.sqrt(4 / 8))


def test_initial_state_is_exact():
    spec = BenchmarkSpec(t_final=0.0)
    g = spec.grid(math.pi / 4)
    X, Y, Z = g.mesh()
    phi = integrate(spec, math.pi / 4, 0.1, "eps1")
    assert error_norms(phi, exact_solution(X, Y, Z, 0.0))[0] == 0.0


def test_fit_order():
    assert fit_order([(1, 4), (0.5, 1)]) == pytest.approx(2.0)
    assert fit_order([(1, 3), (0.5, 3), (0.25, 3)]) == pytest.approx(0.0, abs=1e-12)
    # published eps_I max-norm column of the spatial table
    table = [(math.pi / 4, 8.15e-2), (math.pi / 8, 1.88e-2), (math.pi / 16, 4.65e-3), (math.pi / 32, 1.18e-3)]
    assert fit_order(table) == pytest.approx(2.0, abs=0.1)
    for bad in ([(1, 1)], [(1, 0), (0.5, 1)], [(1, -1), (0.5, 1)]):
        with pytest.raises(ValueError):
            fit_order(bad)


@pytest.mark.parametrize("eps", [1.0, 80.0])
def test_constant_permittivity_is_second_order(eps):
    spec = BenchmarkSpec(eps_m=eps, eps_s=eps, t_final=0.2)
    rows = run_spatial_study(spec, dt=0.0005, h_list=(math.pi / 4, math.pi / 8, math.pi / 16))
    assert rows[0].linf_order is None
    for r in rows[1:]:
        assert 1.9 <= r.linf_order <= 2.1


def test_temporal_study_requires_descending_steps():
    with pytest.raises(ValueError):
        run_temporal_study(dt_list=(0.1, 0.2))


def test_short_temporal_study_shrinks_with_dt():
    spec = BenchmarkSpec(t_final=1.0)
    rows, s_inf, s_2 = run_temporal_study(spec, h=math.pi / 8, dt_list=(0.2, 0.1, 0.05))
    assert all(r.error is None for r in rows)
    assert rows[0].linf > rows[1].linf > rows[2].linf
    assert s_inf > 0 and s_2 > 0
