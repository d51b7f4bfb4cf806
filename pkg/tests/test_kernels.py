import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from softedge.kernels import (
    CBRT2,
    EdgeScaling,
    KernelKind,
    KernelSpec,
    airy_kernel,
    c_alpha,
    correction_kernel,
    correction_kernel_alpha,
    density_correction,
    evaluate,
    finite_kernel_direct,
    finite_kernel_scaled,
    kernel_matrix,
    lue_correction_quadratic_form,
)
from softedge.specfun import airy_ai

# mpmath, 30 digits
K00 = 0.066987483779663974144
K21 = 0.0016246403966291770203
L00_GUE = -0.013783222385544801238
RHO1_LUE_AT_M1 = 0.10706804657005576355

finite = st.floats(min_value=-6.0, max_value=4.0)

ALL_SPECS = [
    KernelSpec.airy(),
    KernelSpec.correction("gue"),
    KernelSpec.correction("lue"),
    KernelSpec.correction("lue-alpha", alpha=0.5),
    KernelSpec.correction("lue-alpha", alpha=5.0),
    KernelSpec.finite_gue(10),
    KernelSpec.finite_lue(10, a=1.0),
    KernelSpec.finite_lue(10, alpha=0.5),
]
IDS = ["airy", "gue", "lue", "alpha0.5", "alpha5", "fgue10", "flue10", "flue10-alpha"]


# --- spec and scaling values -----------------------------------------------


def test_kernel_spec_validation():
    with pytest.raises(ValueError):
        KernelSpec(KernelKind.CORRECTION_LUE_ALPHA)
    with pytest.raises(ValueError):
        KernelSpec(KernelKind.FINITE_GUE)
    with pytest.raises(ValueError):
        KernelSpec.finite_lue(10, a=1.0, alpha=0.5)
    with pytest.raises(ValueError):
        KernelSpec.finite_lue(10)
    with pytest.raises(ValueError):
        KernelSpec(KernelKind.AIRY, N=3)
    with pytest.raises(ValueError):
        KernelSpec.correction("goe")
    with pytest.raises(ValueError):
        KernelSpec.finite_gue(0)


def test_kernel_spec_is_hashable_and_immutable():
    spec = KernelSpec.finite_gue(5)
    assert {spec: 1}[KernelSpec.finite_gue(5)] == 1
    with pytest.raises(AttributeError):
        spec.N = 6


def test_edge_scaling_values():
    g = EdgeScaling("gue", 1)
    assert g.s(0.0) == pytest.approx(math.sqrt(2))
    assert g.jacobian == pytest.approx(1 / math.sqrt(2))
    lue = EdgeScaling("lue", 8, a=2.0)
    assert lue.s(0.0) == pytest.approx(36.0)
    assert lue.jacobian == pytest.approx(2 * 16 ** (1 / 3))
    assert lue.t_floor == pytest.approx(-36.0 / lue.jacobian)
    assert g.t_floor == -math.inf


@given(st.integers(min_value=1, max_value=10**6), st.floats(min_value=-10, max_value=10))
def test_edge_scaling_round_trip(N, t):
    for sc in (EdgeScaling("gue", N), EdgeScaling("lue", N, a=1.5), EdgeScaling("lue-alpha", N, alpha=2.0)):
        assert sc.jacobian > 0
        assert sc.t(sc.s(t)) == pytest.approx(t, abs=1e-9 * max(1.0, sc.center / sc.jacobian))


@given(st.integers(min_value=1, max_value=10**5), st.floats(min_value=-5, max_value=5))
def test_alpha_scaling_reduces_to_fixed_a_at_zero(N, t):
    a0 = EdgeScaling("lue", N, a=0.0)
    al = EdgeScaling("lue-alpha", N, alpha=0.0)
    assert al.s(t) == pytest.approx(a0.s(t), rel=1e-14)
    assert c_alpha(0.0) == pytest.approx(2 * CBRT2)


def test_scaling_rejects_bad_input():
    with pytest.raises(ValueError):
        EdgeScaling("goe", 5)
    with pytest.raises(ValueError):
        EdgeScaling("gue", 0)
    with pytest.raises(ValueError):
        KernelSpec.airy().scaling()


# --- Airy kernel -----------------------------------------------------------


def test_airy_kernel_at_origin():
    # equals Ai'(0)^2; note 0.06698750862651297 is not this value
    assert airy_kernel(0.0, 0.0) == pytest.approx(K00, rel=1e-13)
    assert airy_ai(0.0)[1] ** 2 == pytest.approx(K00, rel=1e-13)


def test_airy_kernel_off_diagonal_value():
    a2, ap2 = airy_ai(2.0)
    a1, ap1 = airy_ai(1.0)
    assert airy_kernel(2.0, 1.0) == pytest.approx(a2 * ap1 - ap2 * a1, rel=1e-14)
    assert airy_kernel(2.0, 1.0) == pytest.approx(K21, rel=1e-12)


def test_airy_kernel_symmetric_pair():
    assert airy_kernel(1.3, -0.7) == airy_kernel(-0.7, 1.3)


@given(st.floats(min_value=-12.0, max_value=8.0))
def test_airy_kernel_diagonal_is_positive(x):
    assert airy_kernel(x, x) > 0


def test_airy_kernel_diagonal_formula():
    x = np.linspace(-8, 6, 57)
    a, ap = airy_ai(x)
    assert np.allclose(airy_kernel(x, x), ap**2 - x * a**2, rtol=1e-13, atol=1e-16)


# --- correction kernels ----------------------------------------------------


def test_gue_correction_at_origin():
    a, ap = airy_ai(0.0)
    spec = KernelSpec.correction("gue")
    assert correction_kernel(spec, 0.0, 0.0) == pytest.approx(0.15 * a * ap, rel=1e-14)
    assert correction_kernel(spec, 0.0, 0.0) == pytest.approx(L00_GUE, rel=1e-12)


@pytest.mark.parametrize("variant", ["gue", "lue"])
def test_correction_symmetric_pair(variant):
    spec = KernelSpec.correction(variant)
    assert correction_kernel(spec, 0.4, -1.1) == pytest.approx(correction_kernel(spec, -1.1, 0.4), rel=1e-14)


def test_lue_correction_diagonal_matches_density():
    y = -1.0
    a, ap = airy_ai(y)
    expected = CBRT2 / 10 * (3 * y * y * a * a - 2 * y * ap * ap + 2 * a * ap)
    L = correction_kernel(KernelSpec.correction("lue"), y, y)
    assert L == pytest.approx(expected, rel=1e-13)
    assert L == pytest.approx(RHO1_LUE_AT_M1, rel=1e-12)


def test_alpha_kernel_reduces_to_lue_kernel():
    spec = KernelSpec.correction("lue")
    assert correction_kernel_alpha(1e-8, 0.5, -0.5) == pytest.approx(correction_kernel(spec, 0.5, -0.5), abs=1e-6)
    g = np.linspace(-4, 4, 17)
    X, Y = np.meshgrid(g, g)
    assert np.max(np.abs(correction_kernel_alpha(1e-8, X, Y) - correction_kernel(spec, X, Y))) < 1e-6


def test_printed_lue_quadratic_form_disagrees_with_alpha_limit():
    # the variant with (x^2 + xy + y^2) on both Airy products does not match the
    # alpha -> 0 limit; recorded so a regression to it is caught
    g = np.linspace(-4, 4, 17)
    X, Y = np.meshgrid(g, g)
    La = correction_kernel_alpha(1e-8, X, Y)
    assert np.max(np.abs(La - lue_correction_quadratic_form(X, Y))) > 1.0
    assert lue_correction_quadratic_form(0.5, -0.5) == pytest.approx(-0.031183269630271487, rel=1e-12)
    assert correction_kernel(KernelSpec.correction("lue"), 0.5, -0.5) == pytest.approx(-0.015966335317188465, rel=1e-12)


def test_alpha_kernel_symmetric_pair():
    assert correction_kernel_alpha(5.0, 1.0, 2.0) == pytest.approx(correction_kernel_alpha(5.0, 2.0, 1.0), rel=1e-13)


def test_alpha_kernel_rejects_non_positive_alpha():
    with pytest.raises(ValueError):
        correction_kernel_alpha(0.0, 0.1, 0.2)


@pytest.mark.parametrize("alpha", [0.5, 5.0])
def test_alpha_kernel_is_continuous_across_the_threshold(alpha):
    # the printed form is used outside the threshold and the regrouped form inside
    x = 0.7
    inside = correction_kernel_alpha(alpha, x, x + 0.99e-4)
    outside = correction_kernel_alpha(alpha, x, x + 1.01e-4)
    slope = (correction_kernel_alpha(alpha, x, x + 2e-3) - correction_kernel_alpha(alpha, x, x + 1e-3)) / 1e-3
    assert inside + slope * 2e-6 == pytest.approx(outside, abs=1e-10)


# --- density correction ----------------------------------------------------


def test_density_correction_gue_origin():
    rho0, rho1 = density_correction("gue", 0.0)
    assert rho1 == pytest.approx(L00_GUE, rel=1e-12)
    assert rho0 == pytest.approx(K00, rel=1e-13)


def test_density_correction_shares_rho0():
    y = np.array([-2.0, 0.0, 2.0])
    base = density_correction("gue", y)[0]
    assert np.array_equal(density_correction("lue", y)[0], base)
    assert np.array_equal(density_correction("lue-alpha", y, alpha=0.5)[0], base)


def test_density_correction_alpha_limit():
    assert density_correction("lue-alpha", 1.0, alpha=1e-8)[1] == pytest.approx(density_correction("lue", 1.0)[1], abs=1e-6)


@pytest.mark.parametrize("variant, alpha", [("gue", None), ("lue", None), ("lue-alpha", 0.5), ("lue-alpha", 5.0)])
def test_density_correction_is_kernel_diagonal(variant, alpha):
    y = np.linspace(-5, 4, 31)
    spec = KernelSpec.correction(variant, alpha)
    assert np.allclose(density_correction(variant, y, alpha)[1], correction_kernel(spec, y, y), rtol=1e-12, atol=1e-15)


def test_density_correction_errors():
    with pytest.raises(ValueError):
        density_correction("lue-alpha", 0.0)
    with pytest.raises(ValueError):
        density_correction("goe", 0.0)


# --- finite-N kernels ------------------------------------------------------


def test_single_level_gue_kernel():
    expected = math.exp(-2.0) / math.sqrt(math.pi) / math.sqrt(2.0)
    assert finite_kernel_scaled(KernelSpec.finite_gue(1), 0.0, 0.0) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("spec", ALL_SPECS[5:], ids=IDS[5:])
def test_christoffel_darboux_matches_direct_sum(spec):
    rng = np.random.default_rng(0)
    x, y = rng.uniform(-4, 3, 50), rng.uniform(-4, 3, 50)
    assert np.allclose(finite_kernel_scaled(spec, x, y), finite_kernel_direct(spec, x, y), rtol=1e-11, atol=1e-13)
    assert np.allclose(finite_kernel_scaled(spec, x, x), finite_kernel_direct(spec, x, x), rtol=1e-11, atol=1e-13)


@pytest.mark.parametrize("make", [KernelSpec.finite_gue, lambda N: KernelSpec.finite_lue(N, a=1.0),
                                  lambda N: KernelSpec.finite_lue(N, alpha=0.5)], ids=["gue", "lue", "alpha"])
def test_finite_kernel_converges_at_two_thirds_rate(make):
    errs = [abs(finite_kernel_scaled(make(N), 0.0, 1.0) - airy_kernel(0.0, 1.0)) for N in (100, 400)]
    assert errs[1] < errs[0]
    # O(N^{-2/3}) remainder: a 4x increase in N shrinks the error by ~4^{-2/3}
    assert errs[1] / errs[0] == pytest.approx(4 ** (-2 / 3), rel=0.3)


@pytest.mark.parametrize("make", [KernelSpec.finite_gue, lambda N: KernelSpec.finite_lue(N, a=1.0)], ids=["gue", "lue"])
def test_finite_kernel_sup_error_decreases(make):
    pts = np.array([-3.0, -1.5, 0.0, 1.0, 2.5])
    X, Y = np.meshgrid(pts, pts)
    err = [np.max(np.abs(finite_kernel_scaled(make(N), X, Y) - airy_kernel(X, Y))) for N in (50, 200)]
    assert err[1] < err[0]


def test_lue_outside_support_raises():
    spec = KernelSpec.finite_lue(2, a=0.0)
    floor = spec.scaling().t_floor
    with pytest.raises(ValueError):
        finite_kernel_scaled(spec, floor - 0.1, 0.0)
    with pytest.raises(ValueError):
        finite_kernel_direct(spec, floor, 0.0)


def test_finite_kernel_rejects_limit_spec():
    with pytest.raises(ValueError):
        finite_kernel_scaled(KernelSpec.airy(), 0.0, 0.0)


# --- properties over all kinds ---------------------------------------------


@pytest.mark.parametrize("spec", ALL_SPECS, ids=IDS)
def test_symmetry_on_random_pairs(spec):
    rng = np.random.default_rng(11)
    x, y = rng.uniform(-6, 4, 1000), rng.uniform(-6, 4, 1000)
    a, b = evaluate(spec, x, y), evaluate(spec, y, x)
    assert np.max(np.abs(a - b)) <= 1e-12 * max(1.0, np.max(np.abs(a)))


@settings(max_examples=30, deadline=None)
@given(finite, finite)
def test_symmetry_property(x, y):
    for spec in ALL_SPECS:
        assert evaluate(spec, x, y) == pytest.approx(evaluate(spec, y, x), rel=1e-11, abs=1e-13)


@pytest.mark.parametrize("spec", ALL_SPECS, ids=IDS)
def test_diagonal_continuity_is_linear(spec):
    x = 0.3
    base = evaluate(spec, x, x)
    gaps = [abs(evaluate(spec, x, x + h) - base) for h in (1e-3, 1e-4, 1e-5)]
    assert gaps[2] < 1e-5
    # each tenfold reduction of h shrinks the gap about tenfold
    for big, small in zip(gaps, gaps[1:]):
        assert small <= 0.2 * big + 1e-12


@pytest.mark.parametrize("spec", ALL_SPECS, ids=IDS)
def test_kernel_matrix_matches_pointwise(spec):
    nodes = np.linspace(-3, 3, 9)
    M = kernel_matrix(spec, nodes)
    X, Y = np.meshgrid(nodes, nodes, indexing="ij")
    assert np.allclose(M, evaluate(spec, X, Y), rtol=1e-12, atol=1e-14)


def test_scalar_in_scalar_out():
    assert isinstance(airy_kernel(0.1, 0.2), float)
    assert isinstance(evaluate(KernelSpec.finite_gue(3), 0.1, 0.2), float)
    assert evaluate(KernelSpec.airy(), np.zeros(3), 0.0).shape == (3,)
