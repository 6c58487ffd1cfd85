import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from npe_adi import _kernels
from npe_adi.dielectric import (DielectricModel, HalfNodeScheme, StencilError, eval_epsilon, half_node_eps_I,
                                half_node_eps_II, half_node_epsilons)
from npe_adi.grid3d import Grid, ScalarField

MODELS = [
    DielectricModel.rational(1, 80, 40, 1, 3.0),
    DielectricModel.rational(2, 78.5, 5, 2, 0.5),
    DielectricModel.exponential(1, 80, 2.0),
    DielectricModel.simplified(1, 80, 0.1),
]
grad_sq = st.floats(0, 1e8, allow_nan=False)


def test_eval_examples():
    assert eval_epsilon(DielectricModel.rational(1, 80, 40, 1, 1.0), 0.0) == 80.0
    assert eval_epsilon(DielectricModel.simplified(1, 80, 1.0), 1.0) == pytest.approx(40.5)
    assert eval_epsilon(DielectricModel.exponential(1, 80, 1.0), 1.0) == pytest.approx(1 + 79 / math.e)
    assert eval_epsilon(DielectricModel.exponential(1, 80, 1.0), 1.0) == pytest.approx(30.063, abs=1e-3)


@pytest.mark.parametrize("bad", [-1.0, math.nan, math.inf])
def test_eval_rejects_bad_input(bad):
    with pytest.raises(ValueError):
        eval_epsilon(MODELS[0], bad)


def test_model_validation():
    with pytest.raises(ValueError):
        DielectricModel.rational(80, 1)
    with pytest.raises(ValueError):
        DielectricModel.rational(1, 80, alpha=-1)
    with pytest.raises(ValueError):
        DielectricModel.rational(1, 80, p=3)
    with pytest.raises(ValueError):
        DielectricModel.rational(1, 80, grad_scale=0)
    assert DielectricModel.constant(80).is_linear


@pytest.mark.parametrize("model", MODELS)
@given(g1=grad_sq, g2=grad_sq)
def test_bounds_and_monotone(model, g1, g2):
    lo, hi = sorted((g1, g2))
    e_lo, e_hi = model(lo), model(hi)
    assert e_hi <= e_lo
    assert model.eps_m <= e_hi <= model.eps_s
    if lo < 10:
        # strictly above eps_m at moderate gradients (the exponential form rounds to eps_m for g/scale above ~40)
        assert e_lo > model.eps_m


@pytest.mark.parametrize("model", MODELS)
def test_limits(model):
    assert model(0.0) == model.eps_s
    assert model(1e30) == pytest.approx(model.eps_m, abs=1e-6)


def test_scheme_parse():
    assert HalfNodeScheme.parse("eps1") is HalfNodeScheme.EPS_I
    assert HalfNodeScheme.parse("EPS_II") is HalfNodeScheme.EPS_II
    with pytest.raises(ValueError):
        HalfNodeScheme.parse("eps3")


def _field(g, fn):
    return ScalarField.from_function(g, fn)


@pytest.mark.parametrize("scheme", ["eps1", "eps2"])
def test_constant_field_gives_eps_s(scheme):
    g = Grid((0, 0, 0), 0.3, (6, 6, 6))
    phi = _field(g, lambda x, y, z: 3.0 + 0 * x)
    for e in half_node_epsilons(phi.values, g.h, MODELS[0], scheme):
        assert np.all(e == 80.0)
    fn = half_node_eps_I if scheme == "eps1" else half_node_eps_II
    assert fn(phi, MODELS[0], 1, 2, 2, 2) == 80.0


def test_linear_field_pointwise():
    m = MODELS[0]
    g = Grid((0, 0, 0), 0.37, (6, 6, 6))
    phi = _field(g, lambda x, y, z: x + 0 * y)
    assert half_node_eps_I(phi, m, 0, 2, 2, 2) == pytest.approx(m(1.0), rel=1e-13)
    assert half_node_eps_II(phi, m, 0, 2, 2, 2) == pytest.approx(m(1.0), rel=1e-13)


@given(st.tuples(*(st.floats(-3, 3),) * 3), st.floats(0.1, 1.0))
def test_constant_gradient_schemes_agree(grad, h):
    m = MODELS[0]
    g = Grid((0, 0, 0), h, (5, 6, 5))
    a, b, c = grad
    phi = _field(g, lambda x, y, z: a * x + b * y + c * z)
    e1 = half_node_epsilons(phi.values, h, m, "eps1")
    e2 = half_node_epsilons(phi.values, h, m, "eps2")
    for u, v in zip(e1, e2):
        assert np.allclose(u, v, rtol=1e-9)
        assert np.allclose(u, m(a * a + b * b + c * c), rtol=1e-9)


def test_stencil_errors_at_boundary():
    g = Grid((0, 0, 0), 1.0, (5, 5, 5))
    phi = ScalarField.zeros(g)
    with pytest.raises(StencilError):
        half_node_eps_I(phi, MODELS[0], 0, 4, 2, 2)
    with pytest.raises(StencilError):
        half_node_eps_I(phi, MODELS[0], 0, 1, 0, 2)
    with pytest.raises(StencilError):
        half_node_eps_II(phi, MODELS[0], 0, 0, 2, 2)
    with pytest.raises(StencilError):
        half_node_eps_II(phi, MODELS[0], 0, 3, 2, 2)


@given(st.integers(0, 2**31 - 1), st.sampled_from(["eps1", "eps2"]), st.integers(0, 3))
def test_array_matches_pointwise(seed, scheme, which):
    m = MODELS[which]
    g = Grid((0, 0, 0), 0.4, (6, 7, 6))
    phi = ScalarField(g, np.random.default_rng(seed).normal(size=g.size))
    arrays = half_node_epsilons(phi.values, g.h, m, scheme)
    fn = half_node_eps_I if scheme == "eps1" else half_node_eps_II
    for axis in range(3):
        lo = 0 if scheme == "eps1" else 1
        idx = [2, 2, 2]
        for n in range(lo, g.dims[axis] - 1 - (scheme == "eps2")):
            idx[axis] = n
            assert fn(phi, m, axis, *idx) == pytest.approx(arrays[axis][tuple(idx)], rel=1e-12)


@given(st.integers(0, 2**31 - 1), st.booleans())
def test_compiled_matches_reference(seed, scheme_ii):
    g = (7, 5, 6)
    v = np.random.default_rng(seed).normal(size=g) * 50
    for m in MODELS:
        ref = half_node_epsilons(v, 0.3, m, "eps2" if scheme_ii else "eps1")
        fast = _kernels.half_node_epsilons(v, 0.3, m, scheme_ii)
        for a, b in zip(ref, fast):
            assert np.allclose(a, b, rtol=1e-13, atol=0)


@given(st.integers(0, 2**31 - 1), st.sampled_from(["eps1", "eps2"]))
def test_half_node_bounds(seed, scheme):
    m = DielectricModel.rational(1, 80, 40, 1, 1.0)
    v = np.random.default_rng(seed).normal(size=(6, 6, 6)) * 0.1
    for e in half_node_epsilons(v, 0.5, m, scheme):
        assert np.all(e > m.eps_m) and np.all(e <= m.eps_s)


def _smooth_errors(scheme, n):
    """Max error of half-node eps against the exact field at x half nodes."""
    m = DielectricModel.simplified(1, 80, 0.1)
    g = Grid.cube(-math.pi, math.pi, n)
    phi = _field(g, lambda x, y, z: np.sin(x) * np.sin(y) * np.sin(z))
    ex = half_node_epsilons(phi.values, g.h, m, scheme)[0]
    X, Y, Z = g.mesh()
    Xh = X[:-1] + 0.5 * g.h
    gx = np.cos(Xh) * np.sin(Y) * np.sin(Z)
    gy = np.sin(Xh) * np.cos(Y) * np.sin(Z)
    gz = np.sin(Xh) * np.sin(Y) * np.cos(Z)
    exact = m(gx**2 + gy**2 + gz**2)
    # interior rows, where both schemes use centred differences only
    sl = (slice(1, -1), slice(1, -1), slice(1, -1))
    return np.abs(ex - exact)[sl].max()


@pytest.mark.parametrize("scheme", ["eps1", "eps2"])
def test_half_node_second_order(scheme):
    errs = [_smooth_errors(scheme, n) for n in (16, 32, 64)]
    orders = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
    assert all(1.8 < o < 2.3 for o in orders), (errs, orders)
