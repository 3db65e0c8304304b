import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rz_pairing_lab.forms import (
    BottBundle,
    BoxBundle,
    Circle,
    Cylinder,
    Form,
    K1DirectSum,
    K1GridUnitary,
    K1Identity,
    K1Winding,
    LineBundle,
    Point,
    ProductManifold,
    Sphere,
    SumBundle,
    TensorBundle,
    Torus2,
    TrivialBundle,
    UnitaryHomotopy,
    atom_form,
    ch_bundle,
    circle_grid_form,
    circle_theta,
    constant_form,
    exactness_residual,
    exp_form,
    exterior_derivative,
    form_to_json,
    integrate,
    k1_samples,
    odd_ch,
    sup_norm,
    todd_form,
    top_form,
    torus_grid_form,
    transgression,
    virtual_rank,
    wedge,
    zero_form,
)

GRID = 1024
THETA = circle_theta(GRID)


def phase_path(phase_fn, dphase_fn, t_steps=128, grid=256):
    """Rank-1 homotopy e^{i phi(t, theta)} with exact time derivative."""

    def fn(t, th):
        return np.exp(1j * phase_fn(t, th))[:, None, None]

    def dfn(t, th):
        return (1j * dphase_fn(t, th) * np.exp(1j * phase_fn(t, th)))[:, None, None]

    return UnitaryHomotopy.from_callable(fn, t_steps, grid, dfn=dfn)


# --- manifolds ---------------------------------------------------------------


def test_dimensions():
    assert Point().dim == 0
    assert Circle().dim == 1
    assert Sphere(4).dim == 4
    assert Torus2().dim == 2
    assert ProductManifold(Sphere(2), Circle()).dim == 3
    assert Cylinder(Sphere(2)).dim == 3


def test_sphere_must_be_even():
    with pytest.raises(ValueError):
        Sphere(3)
    with pytest.raises(ValueError):
        Sphere(0)


def test_grid_forms_only_on_circle_and_torus():
    with pytest.raises(ValueError):
        Form(Sphere(2), {}, {0: np.ones(8)})


# --- exterior derivative -----------------------------------------------------


def test_d_of_constant_vanishes():
    for m in (Point(), Circle(), Sphere(2), Torus2()):
        assert exterior_derivative(constant_form(m, 3)).is_zero()


def test_d_of_grid_sin():
    df = exterior_derivative(circle_grid_form(0, np.sin(THETA)))
    assert np.max(np.abs(df.grids[1] - np.cos(THETA))) <= 1e-10


def test_d_of_top_atom_vanishes():
    assert exterior_derivative(top_form(Sphere(2), 5)).is_zero()


def test_dd_zero_on_torus():
    t1, t2 = np.meshgrid(circle_theta(128), circle_theta(128), indexing="ij")
    f = torus_grid_form(0, np.sin(t1) * np.cos(2 * t2))
    ddf = exterior_derivative(exterior_derivative(f))
    assert sup_norm(ddf) <= 1e-9


def test_stokes_on_circle():
    df = exterior_derivative(circle_grid_form(0, np.sin(3 * THETA) + 0.2 * np.cos(THETA)))
    assert abs(integrate(df, Circle())) <= 1e-12


def test_leibniz_on_circle_grids():
    f = circle_grid_form(0, np.sin(THETA))
    g = circle_grid_form(0, np.cos(2 * THETA)) + circle_grid_form(1, np.sin(THETA))
    lhs = exterior_derivative(wedge(f, g))
    rhs = wedge(exterior_derivative(f), g) + wedge(f, exterior_derivative(g))
    assert sup_norm(lhs - rhs) <= 1e-8


# --- wedge -------------------------------------------------------------------


def test_wedge_unit():
    f = constant_form(Sphere(2), 2) + top_form(Sphere(2), 5)
    assert wedge(constant_form(Sphere(2), 1), f).atoms == f.atoms


def test_wedge_top_squares_to_zero():
    w = top_form(Sphere(2), 1)
    assert wedge(w, w).is_zero()


def test_wedge_mixed_keeps_constant_term():
    f = constant_form(Sphere(2), Fraction(2, 3)) + top_form(Sphere(2), 7)
    w = top_form(Sphere(2), 1)
    assert wedge(f, w).atoms == {"v": Fraction(2, 3)}


def test_wedge_torus_antisymmetry():
    a = atom_form(Torus2(), "a", 1)
    b = atom_form(Torus2(), "b", 1)
    assert wedge(a, b).atoms == {"v": Fraction(1)}
    assert wedge(b, a).atoms == {"v": Fraction(-1)}
    assert wedge(a, a).is_zero()


def test_wedge_manifold_mismatch():
    with pytest.raises(ValueError):
        wedge(constant_form(Sphere(2), 1), constant_form(Torus2(), 1))


def test_wedge_product_manifold_koszul_sign():
    m = ProductManifold(Circle(), Circle())
    left = atom_form(m, ("s", "1"), 1)
    right = atom_form(m, ("1", "s"), 1)
    assert wedge(left, right).atoms == {("s", "s"): Fraction(1)}
    assert wedge(right, left).atoms == {("s", "s"): Fraction(-1)}


# --- integration -------------------------------------------------------------


def test_integrate_atoms_exact():
    value = integrate(top_form(Sphere(2), Fraction(7, 3)), Sphere(2))
    assert value == Fraction(7, 3) and isinstance(value, Fraction)


def test_integrate_grid_one_form():
    f = circle_grid_form(1, (1 + np.cos(THETA)) / (2 * math.pi))
    assert abs(integrate(f, Circle()) - 1.0) <= 1e-12


def test_integrate_lower_degree_is_zero():
    assert integrate(constant_form(Sphere(2), 9), Sphere(2)) == 0


def test_integrate_product_fubini():
    m = ProductManifold(Sphere(2), Sphere(4))
    f = atom_form(m, ("v", "v"), Fraction(3, 2))
    assert integrate(f, m) == Fraction(3, 2)
    assert integrate(atom_form(m, ("v", "1"), 5), m) == 0


def test_integrate_over_point_evaluates():
    assert integrate(constant_form(Point(), Fraction(2, 7)), Point()) == Fraction(2, 7)


# --- characteristic forms ----------------------------------------------------


def test_todd_is_one():
    for m in (Sphere(2), Torus2(), ProductManifold(Sphere(2), Circle())):
        td = todd_form(m)
        assert td.atoms == constant_form(m, 1).atoms
        assert integrate(wedge(td, top_form(m, 1)), m) == 1


def test_ch_bott_unit_integral():
    for p in (1, 2, 3):
        sphere = Sphere(2 * p)
        ch = ch_bundle(BottBundle(p), sphere)
        assert "1" not in ch.atoms  # virtual rank zero
        assert integrate(wedge(ch, todd_form(sphere)), sphere) == 1


def test_ch_line_normalization():
    ch = ch_bundle(LineBundle(3), Sphere(2))
    assert ch.atoms == {"1": Fraction(1), "v": Fraction(3)}
    assert integrate(ch.component(2), Sphere(2)) == 3


def test_ch_line_matches_exponential_route():
    for k in range(-3, 4):
        direct = ch_bundle(LineBundle(k), Sphere(2))
        exponential = exp_form(top_form(Sphere(2), Fraction(k)))
        assert direct.atoms == exponential.atoms


def test_ch_trivial():
    assert ch_bundle(TrivialBundle(2), Torus2()).atoms == {"1": Fraction(2)}


@given(st.integers(-4, 4), st.integers(-4, 4), st.integers(0, 3), st.integers(0, 3))
def test_ch_additive_over_sums(k1, k2, r1, r2):
    m = Sphere(2)
    total = ch_bundle(
        SumBundle(SumBundle(LineBundle(k1), TrivialBundle(r1)), SumBundle(LineBundle(k2), TrivialBundle(r2))),
        m,
    )
    parts = (
        ch_bundle(LineBundle(k1), m)
        + ch_bundle(TrivialBundle(r1), m)
        + ch_bundle(LineBundle(k2), m)
        + ch_bundle(TrivialBundle(r2), m)
    )
    assert total.atoms == parts.atoms


def test_ch_tensor_multiplicative():
    m = Sphere(2)
    ch = ch_bundle(TensorBundle(LineBundle(2), LineBundle(3)), m)
    assert ch.atoms == {"1": Fraction(1), "v": Fraction(5)}


def test_ch_box_product():
    m = ProductManifold(Sphere(2), Sphere(2))
    ch = ch_bundle(BoxBundle(BottBundle(1), LineBundle(2)), m)
    assert ch.atoms == {("v", "1"): Fraction(1), ("v", "v"): Fraction(2)}
    assert integrate(ch, m) == 2


def test_virtual_ranks():
    assert virtual_rank(BottBundle(2)) == 0
    assert virtual_rank(TensorBundle(TrivialBundle(3), LineBundle(1))) == 3
    assert virtual_rank(SumBundle(TrivialBundle(1), BottBundle(1))) == 1


def test_bundle_manifold_compatibility():
    with pytest.raises(ValueError):
        ch_bundle(LineBundle(1), Sphere(4))
    with pytest.raises(ValueError):
        ch_bundle(BottBundle(2), Sphere(2))


# --- odd Chern character -----------------------------------------------------


def test_odd_ch_winding():
    ch = odd_ch(K1Winding(3))
    assert ch.atoms == {"s": Fraction(3)}
    assert integrate(ch, Circle()) == 3


def test_odd_ch_identity_zero():
    assert odd_ch(K1Identity(4, Sphere(2))).is_zero()


def test_odd_ch_direct_sum_cancellation():
    ch = odd_ch(K1DirectSum((K1Winding(2), K1Winding(-2))))
    assert ch.is_zero()


@given(st.lists(st.integers(-5, 5), min_size=1, max_size=4))
def test_odd_ch_additive(ks):
    total = odd_ch(K1DirectSum(tuple(K1Winding(k) for k in ks)))
    assert total.atoms == ({"s": Fraction(sum(ks))} if sum(ks) else {})


def test_odd_ch_grid_matches_winding():
    g = K1GridUnitary(np.exp(5j * THETA)[:, None, None], winding_class=5)
    ch = odd_ch(g)
    assert np.max(np.abs(ch.grids[1] - 5.0 / (2 * math.pi))) <= 1e-10
    assert abs(integrate(ch, Circle()) - 5.0) <= 1e-12


def test_grid_unitary_rejects_non_unitary():
    with pytest.raises(ValueError):
        K1GridUnitary(1.5 * np.exp(1j * THETA)[:, None, None])


# --- transgression -----------------------------------------------------------


def test_transgression_constant_path_vanishes():
    g = K1Winding(2)
    samples = np.broadcast_to(k1_samples(g, 256), (65, 256, 1, 1)).copy()
    tch = transgression(g, g, UnitaryHomotopy(samples))
    assert sup_norm(tch) <= 1e-12


def test_transgression_global_phase_rotation():
    c = 3
    path = phase_path(
        lambda t, th: 2 * math.pi * c * t * np.ones_like(th),
        lambda t, th: 2 * math.pi * c * np.ones_like(th),
    )
    ident = K1Identity(1)
    tch = transgression(ident, ident, path)
    assert np.max(np.abs(tch.grids[0] - c)) <= 1e-10


def test_transgression_differential_property():
    rng = np.random.default_rng(7)
    grid = 2048
    for _ in range(3):
        a = rng.normal(scale=0.5)
        b = rng.normal(scale=0.5)
        phase = lambda t, th: a * np.sin(th) * t + b * np.cos(th) * (t + 0.5 * t * t)
        dphase = lambda t, th: a * np.sin(th) + b * np.cos(th) * (1 + t)
        path = phase_path(phase, dphase, t_steps=256, grid=grid)
        g0 = K1GridUnitary(path.samples[0])
        g1 = K1GridUnitary(path.samples[-1])
        tch = transgression(g0, g1, path)
        lhs = exterior_derivative(tch)
        rhs = odd_ch(g1) - odd_ch(g0)
        assert sup_norm(lhs - rhs) <= 1e-6


def test_transgression_endpoint_mismatch():
    path = phase_path(
        lambda t, th: t * np.ones_like(th),
        lambda t, th: np.ones_like(th),
        grid=128,
    )
    with pytest.raises(ValueError):
        transgression(K1Identity(1), K1Identity(1), path)
    with pytest.raises(ValueError):
        transgression(K1Identity(1), K1Identity(2), path)


def test_transgression_minimum_steps():
    g = K1Identity(1)
    samples = np.broadcast_to(np.eye(1, dtype=complex), (5, 64, 1, 1)).copy()
    with pytest.raises(ValueError):
        transgression(g, g, UnitaryHomotopy(samples))


# --- exactness ---------------------------------------------------------------


def test_exactness_constant_mu_with_winding():
    assert exactness_residual(constant_form(Circle(), Fraction(1, 2)), K1Winding(4)) == 0.0


def test_exactness_detects_variable_mu():
    residual = exactness_residual(circle_grid_form(0, np.sin(THETA)), K1Identity(1))
    assert abs(residual - 1.0) <= 1e-9


def test_exactness_zero_mu():
    assert exactness_residual(zero_form(Circle()), K1Winding(2)) == 0.0


def test_exactness_rejects_odd_degree():
    with pytest.raises(ValueError):
        exactness_residual(atom_form(Circle(), "s", 1), K1Winding(1))


# --- misc --------------------------------------------------------------------


def test_form_addition_and_scaling():
    f = constant_form(Sphere(2), Fraction(1, 2)) + top_form(Sphere(2), 3)
    g = f.scale(Fraction(2))
    assert g.atoms == {"1": Fraction(1), "v": Fraction(6)}
    assert (f - f).is_zero()


def test_grid_size_mismatch_rejected():
    with pytest.raises(ValueError):
        circle_grid_form(0, np.ones(64)) + circle_grid_form(0, np.ones(128))


def test_form_json_serialization():
    f = constant_form(Sphere(2), Fraction(1, 2)) + top_form(Sphere(2), 3)
    payload = json.loads(form_to_json(f))
    assert payload["manifold"] == "Sphere(2)"
    kinds = {(entry["degree"], entry["kind"]) for entry in payload["components"]}
    assert kinds == {(0, "atom"), (2, "atom")}
    g = circle_grid_form(0, np.sin(circle_theta(16)))
    payload = json.loads(form_to_json(g))
    assert payload["components"][0]["grid_size"] == 16
