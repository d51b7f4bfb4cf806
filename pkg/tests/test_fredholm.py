import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import erf

from conftest import TW_ORACLE
from softedge.fredholm import (
    DEFAULT_ORDER,
    DistributionCurve,
    NystromSystem,
    SingularSystemError,
    SingularSystemWarning,
    build_rule,
    curve,
    det_and_omega,
    finite_curve,
    fredholm_det,
    limit_curve,
    omega,
    scaled_difference,
)
from softedge.kernels import KernelSpec

AIRY = KernelSpec.airy()
L_GUE = KernelSpec.correction("gue")


# --- rules -----------------------------------------------------------------


def test_two_point_rule():
    r = build_rule(0.0, 2, 1.0)
    assert np.allclose(r.nodes, [0.5 - 0.5 / math.sqrt(3), 0.5 + 0.5 / math.sqrt(3)], atol=1e-15)
    assert np.allclose(r.weights, [0.5, 0.5], atol=1e-15)
    assert r.order == 2 and r.tail == 1.0


@given(st.floats(min_value=-20, max_value=10), st.integers(min_value=2, max_value=200),
       st.floats(min_value=0.5, max_value=40))
def test_rule_invariants(t, order, tail):
    r = build_rule(t, order, tail)
    assert np.sum(r.weights) == pytest.approx(tail, rel=1e-12)
    assert np.all(r.weights > 0)
    assert np.all(np.diff(r.nodes) > 0)
    assert r.nodes[0] > t and r.nodes[-1] < t + tail


def test_default_rule_reaches_past_origin():
    assert build_rule(-4.0).upper == pytest.approx(16.0)
    assert build_rule(3.0).upper == pytest.approx(19.0)
    assert build_rule(0.0).order == DEFAULT_ORDER


def test_rule_rejects_bad_parameters():
    with pytest.raises(ValueError):
        build_rule(0.0, 1)
    with pytest.raises(ValueError):
        build_rule(0.0, 8, 0.0)


# --- determinants ----------------------------------------------------------


def test_xi_zero_gives_one():
    assert fredholm_det(AIRY, 0.0, -3.0) == 1.0
    assert omega(AIRY, L_GUE, 0.0, -3.0) == 0.0


def test_xi_out_of_range():
    with pytest.raises(ValueError):
        fredholm_det(AIRY, 1.5, 0.0)
    with pytest.raises(ValueError):
        fredholm_det(AIRY, -0.1, 0.0)


@pytest.mark.parametrize("xi", [1.0, 0.6])
@pytest.mark.parametrize("t", [-3.0, -2.0, 0.0, 2.0])
def test_tracy_widom_against_dense_oracle(xi, t):
    assert fredholm_det(AIRY, xi, t) == pytest.approx(TW_ORACLE[xi][t], abs=1e-12)


def test_node_doubling_at_minus_two():
    assert abs(fredholm_det(AIRY, 1.0, -2.0, build_rule(-2.0, 48)) - fredholm_det(AIRY, 1.0, -2.0, build_rule(-2.0, 96))) <= 1e-10


@pytest.mark.parametrize("t", np.arange(-8.0, 4.01, 1.0))
def test_node_doubling_cauchy(t):
    assert abs(fredholm_det(AIRY, 1.0, t, build_rule(t, 96)) - fredholm_det(AIRY, 1.0, t, build_rule(t, 48))) <= 1e-9


def test_far_right_tail():
    assert fredholm_det(AIRY, 1.0, 6.0) == pytest.approx(1.0, abs=1e-8)
    assert abs(omega(AIRY, L_GUE, 1.0, 6.0)) <= 1e-8


@settings(max_examples=25)
@given(st.floats(min_value=0.01, max_value=1.0), st.floats(min_value=-10.0, max_value=6.0))
def test_det_lies_in_unit_interval(xi, t):
    d = fredholm_det(AIRY, xi, t, build_rule(t, 48))
    assert 0 < d <= 1 + 1e-12


@settings(max_examples=15)
@given(st.floats(min_value=-8.0, max_value=3.0))
def test_det_decreases_with_xi(t):
    d = [fredholm_det(AIRY, xi, t, build_rule(t, 48)) for xi in (0.2, 0.6, 1.0)]
    assert d[0] >= d[1] >= d[2]


@pytest.mark.parametrize("spec", [AIRY, KernelSpec.finite_gue(10), KernelSpec.finite_lue(10, a=1.0)],
                         ids=["airy", "gue10", "lue10"])
def test_nystrom_symmetrization(spec):
    sys_ = NystromSystem.assemble(spec, build_rule(-2.0, 64), L_GUE)
    S = sys_.symmetrized()
    assert np.max(np.abs(S - S.T)) <= 1e-12
    SL = sys_.symmetrized("L")
    assert np.max(np.abs(SL - SL.T)) <= 1e-12


def test_singular_system_warns_and_returns_zero():
    rule = build_rule(0.0, 8)
    sys_ = NystromSystem(rule, np.eye(8), np.eye(8))
    with pytest.warns(SingularSystemWarning):
        assert sys_.det(1.0) == 0.0
    with pytest.raises(SingularSystemError):
        sys_.det_and_omega(1.0)


def test_omega_needs_correction_kernel():
    with pytest.raises(ValueError):
        det_and_omega(AIRY, AIRY, 1.0, 0.0)
    with pytest.raises(ValueError):
        NystromSystem.assemble(AIRY, build_rule(0.0, 8)).det_and_omega(1.0)


def test_omega_matches_first_order_expansion():
    # for small xi, Omega ~ -xi Tr(L) since det -> 1 and the inverse -> I
    rule = build_rule(-1.0, 64)
    xi = 1e-6
    tr = float(np.trace(NystromSystem.assemble(AIRY, rule, L_GUE).Lw))
    assert omega(AIRY, L_GUE, xi, -1.0, rule) == pytest.approx(-xi * tr, rel=1e-5)


# --- curves ----------------------------------------------------------------


def test_gue_curve_normalisation(gue_wide):
    c = gue_wide
    assert np.trapezoid(c.p0, c.ts) == pytest.approx(1.0, abs=1e-6)
    assert np.trapezoid(c.p1, c.ts) == pytest.approx(0.0, abs=1e-5)
    assert np.all(c.p0 >= -1e-8)
    assert np.all(np.diff(c.F) >= -1e-10)
    assert np.all((c.F >= -1e-10) & (c.F <= 1 + 1e-10))
    assert np.all(np.abs(c.F[c.ts >= 6.0] - 1.0) <= 1e-8)


def test_curve_p0_matches_finer_step(gue_window):
    ts = gue_window.ts[::10]
    fine = limit_curve("gue", 1.0, ts, correction=False, h=5e-4)
    assert np.max(np.abs(fine.p0 - gue_window.p0[::10])) < 1e-6


def test_curve_is_trivial_at_xi_zero():
    c = limit_curve("lue", 0.0, np.linspace(-3, 3, 7))
    assert np.all(c.F == 1.0) and np.all(c.p0 == 0.0) and np.all(c.p1 == 0.0)


def test_curve_rejects_bad_grid():
    with pytest.raises(ValueError):
        curve(AIRY, 1.0, [0.0, -1.0])
    with pytest.raises(ValueError):
        curve(AIRY, 1.0, [0.0, 1.0], h=0.0)


def test_threaded_curve_is_identical():
    ts = np.linspace(-4, 2, 7)
    a = limit_curve("gue", 1.0, ts)
    b = limit_curve("gue", 1.0, ts, threads=3)
    assert np.array_equal(a.F, b.F) and np.array_equal(a.p1, b.p1)


def test_csv_and_sidecar_round_trip(tmp_path):
    c = limit_curve("gue", 0.6, np.linspace(-3, 1, 5))
    csv, side = c.write(tmp_path / "curve.csv", extra={"note": "x"})
    assert csv.read_text().splitlines()[0] == "t,F,p0,p1"
    back = DistributionCurve.read_csv(csv)
    assert np.array_equal(back.ts, c.ts) and np.array_equal(back.F, c.F)
    assert np.array_equal(back.p0, c.p0) and np.array_equal(back.p1, c.p1)
    meta = json.loads(side.read_text())
    assert meta["variant"] == "gue" and meta["xi"] == 0.6 and meta["route"] == "operator"
    assert meta["order"] == DEFAULT_ORDER and meta["h"] == 1e-3 and meta["note"] == "x"
    assert "tail" in meta and "clip" in meta


def test_csv_leaves_p1_empty_when_absent(tmp_path):
    c = limit_curve("gue", 1.0, [0.0, 1.0], correction=False)
    rows = c.to_csv(tmp_path / "c.csv").read_text().splitlines()
    assert rows[1].endswith(",")
    assert DistributionCurve.read_csv(tmp_path / "c.csv").p1 is None


# --- finite N --------------------------------------------------------------


def test_single_level_gue_closed_form():
    ts = np.linspace(-6, 4, 21)
    c = finite_curve("gue", 1, 1.0, ts)
    s = math.sqrt(2) + ts / math.sqrt(2)
    assert np.allclose(c.F, 0.5 * (1 + erf(s)), atol=1e-12)
    assert np.allclose(c.p0, np.exp(-(s**2)) / math.sqrt(math.pi) / math.sqrt(2), atol=1e-7)
    assert c.route == "finite-N"


@pytest.mark.parametrize("ensemble, kw", [("gue", {}), ("lue", {"a": 1.0}), ("lue-alpha", {"alpha": 0.5})])
def test_finite_curve_monotone(ensemble, kw):
    c = finite_curve(ensemble, 10, 1.0, np.linspace(-4, 4, 33), **kw)
    assert np.all(np.diff(c.F) >= -1e-12)


def test_finite_curve_converges_at_two_thirds_rate():
    ts = np.arange(-6, 4.01, 0.25)
    lim = limit_curve("gue", 1.0, ts, correction=False)
    e = [np.max(np.abs(finite_curve("gue", N, 1.0, ts).F - lim.F)) for N in (100, 400)]
    assert e[0] / e[1] == pytest.approx(4 ** (2 / 3), rel=0.3)


def test_lue_grid_is_clipped_and_recorded(tmp_path):
    spec = KernelSpec.finite_lue(2, a=0.0)
    floor = spec.scaling().t_floor
    ts = np.linspace(floor - 1, floor + 2, 13)
    c = finite_curve("lue", 2, 1.0, ts, a=0.0)
    assert c.clip is not None and c.clip["dropped"] > 0
    assert np.all(c.ts - c.h > floor)
    assert c.clip["t_floor"] == pytest.approx(floor)
    _, side = c.write(tmp_path / "lue.csv")
    assert json.loads(side.read_text())["clip"]["dropped"] == c.clip["dropped"]
    with pytest.raises(ValueError):
        finite_curve("lue", 2, 1.0, [floor - 1.0], a=0.0)


def test_finite_curve_unknown_ensemble():
    with pytest.raises(ValueError):
        finite_curve("goe", 5, 1.0, [0.0])


def test_scaled_difference_refines():
    ts = np.arange(-6, 2.01, 0.25)
    s100 = scaled_difference("gue", 100, 1.0, ts)
    s800 = scaled_difference("gue", 800, 1.0, ts, limit=s100.limit)
    assert s800.gap < s100.gap


def test_scaled_difference_vanishes_at_xi_zero(tmp_path):
    s = scaled_difference("gue", 20, 0.0, np.linspace(-3, 1, 5))
    assert np.all(s.diff == 0.0)
    rows = s.to_csv(tmp_path / "d.csv").read_text().splitlines()
    assert rows[0] == "t,scaled_difference,p1" and len(rows) == 6
