import math

import numpy as np
import pytest
import scipy.special as sps

from logop.geometry import Domain, GridFunction, build_grid
from logop.kernels import mollify_kernel, sinlog_kernel, unit_kernel
from logop.nonlocal_eval import (
    FieldFunction,
    QuadratureConfig,
    box_field,
    const_field,
    eval_J_conv,
    eval_LK,
    eval_loglap,
    eval_remainder,
    eval_schrodinger,
    field_sum,
    gaussian_field,
    grid_field,
    linear_field,
    make_field,
    quadratic_field,
    sector_integral,
    shell_field,
    shift_field,
)

FAST = QuadratureConfig()
ORACLE = QuadratureConfig(mode="oracle")

EULER_GAMMA = 0.5772156649015329


def test_quadrature_config_validation():
    with pytest.raises(ValueError):
        QuadratureConfig(n_radial=4)
    with pytest.raises(ValueError):
        QuadratureConfig(n_angular=4)
    with pytest.raises(ValueError):
        QuadratureConfig(r_min=0.5)
    with pytest.raises(ValueError):
        QuadratureConfig(r_min=0.0)
    with pytest.raises(ValueError):
        QuadratureConfig(mode="turbo")
    assert FAST.node_factor() == 1
    assert ORACLE.node_factor() == 4


# ---------------------------------------------------------------------------
# the zero-order operator on closed-form fields
# ---------------------------------------------------------------------------


def test_LK_annihilates_constants():
    val = eval_LK(unit_kernel(), const_field(3.0), np.array([0.2]), FAST)
    assert val == 0.0


def test_LK_quadratic_1d():
    # integral over [-1,1] of -y^2/|y| dy = -1, exactly
    val = eval_LK(unit_kernel(), quadratic_field(), np.array([0.0]), FAST)
    assert val == pytest.approx(-1.0, abs=1e-8)


def test_LK_quadratic_2d():
    # integrand (0 - rho^2)/rho^2 integrates to -|B_1| = -pi
    val = eval_LK(unit_kernel(), quadratic_field(), np.array([0.0, 0.0]), FAST)
    assert val == pytest.approx(-math.pi, abs=1e-7)


def test_LK_odd_field_cancels():
    val = eval_LK(unit_kernel(), linear_field(), np.array([0.0]), FAST)
    assert abs(val) < 1e-12


def test_LK_gaussian_against_exponential_integral():
    # 2 * int_0^1 (1 - e^{-rho^2}) drho/rho = Ein(1) = gamma + E_1(1)
    val = eval_LK(unit_kernel(), gaussian_field(), np.array([0.0]), ORACLE)
    assert val == pytest.approx(EULER_GAMMA + sps.exp1(1.0), abs=1e-10)


def test_LK_translation_invariance():
    u = gaussian_field()
    x0 = np.array([0.37])
    direct = eval_LK(unit_kernel(), u, x0, FAST)
    shifted = eval_LK(unit_kernel(), shift_field(u, x0), np.array([0.0]), FAST)
    assert direct == pytest.approx(shifted, abs=1e-12)


def test_LK_linearity():
    u, v = gaussian_field(), quadratic_field()
    w = field_sum([(2.0, u), (-0.5, v)])
    x = np.array([0.1])
    lu = eval_LK(unit_kernel(), u, x, FAST)
    lv = eval_LK(unit_kernel(), v, x, FAST)
    lw = eval_LK(unit_kernel(), w, x, FAST)
    assert lw == pytest.approx(2.0 * lu - 0.5 * lv, abs=1e-12)


def test_LK_comparison_at_touching_point():
    # v = u + 0.5|y|^2 touches u from above at 0, so L v(0) < L u(0);
    # here the gap is exactly 0.5 * L(quadratic)(0) = -0.5.
    u = gaussian_field()
    v = field_sum([(1.0, u), (0.5, quadratic_field())])
    lu = eval_LK(unit_kernel(), u, np.array([0.0]), FAST)
    lv = eval_LK(unit_kernel(), v, np.array([0.0]), FAST)
    assert lv < lu
    assert lv == pytest.approx(lu - 0.5, abs=1e-8)


def test_LK_error_estimate_brackets_true_error():
    x = np.array([0.3])
    val, est = eval_LK(unit_kernel(), gaussian_field(), x, FAST, return_estimate=True)
    ref = eval_LK(unit_kernel(), gaussian_field(), x, ORACLE)
    assert est > 0.0
    assert abs(val - ref) <= est
    assert est < 1e-5


def test_LK_fast_vs_oracle():
    x = np.array([0.25])
    for u in (gaussian_field(), quadratic_field(), shell_field(0.3, 0.8)):
        fast = eval_LK(sinlog_kernel(), u, x, FAST)
        slow = eval_LK(sinlog_kernel(), u, x, ORACLE)
        assert fast == pytest.approx(slow, abs=1e-4)


# ---------------------------------------------------------------------------
# far-field convolution
# ---------------------------------------------------------------------------


def test_J_conv_gaussian_against_exponential_integral():
    # 2 * int_1^inf e^{-rho^2} drho/rho = E_1(1)
    val = eval_J_conv(gaussian_field(), np.array([0.0]), FAST)
    assert val == pytest.approx(sps.exp1(1.0), abs=1e-8)
    slow = eval_J_conv(gaussian_field(), np.array([0.0]), ORACLE)
    assert val == pytest.approx(slow, abs=1e-8)


def test_J_conv_indicator_interval():
    # int_2^3 dy/y = ln(3/2) at the origin; ln(5/3) seen from x = 0.5
    u = box_field([2.0], [3.0])
    assert eval_J_conv(u, np.array([0.0]), FAST) == pytest.approx(
        math.log(1.5), abs=1e-10
    )
    assert eval_J_conv(u, np.array([0.5]), FAST) == pytest.approx(
        math.log(5.0 / 3.0), abs=1e-10
    )


def test_J_conv_vanishes_when_support_inside_unit_ball():
    tight = gaussian_field(sigma=0.02)  # support radius 0.8
    assert eval_J_conv(tight, np.array([0.0]), FAST) == 0.0
    val, est = eval_J_conv(tight, np.array([0.0]), FAST, return_estimate=True)
    assert val == 0.0 and est == 0.0


def test_J_conv_requires_bounded_support():
    with pytest.raises(ValueError):
        eval_J_conv(linear_field(), np.array([0.0]), FAST)


# ---------------------------------------------------------------------------
# logarithmic Laplacian
# ---------------------------------------------------------------------------


def test_loglap_fourier_reference_value():
    # For u(y) = e^{-y^2/2} the symbol calculus gives
    # (log-Laplacian u)(0) = -(gamma + ln 2).
    val = eval_loglap(gaussian_field(sigma=1.0), np.array([0.0]), FAST, N=1)
    assert val == pytest.approx(-(EULER_GAMMA + math.log(2.0)), abs=1e-4)
    slow = eval_loglap(gaussian_field(sigma=1.0), np.array([0.0]), ORACLE, N=1)
    assert slow == pytest.approx(-(EULER_GAMMA + math.log(2.0)), abs=1e-6)


def test_loglap_zero_field():
    zero = FieldFunction(
        evaluate=lambda Y: np.zeros(len(np.atleast_2d(Y))),
        support_radius=2.0,
        label="zero",
    )
    val = eval_loglap(zero, np.array([0.4]), FAST, N=1)
    assert val == 0.0


def test_loglap_paths_agree():
    u = FieldFunction(
        evaluate=lambda Y: np.exp(-np.sum(np.atleast_2d(Y) ** 2, axis=1)),
        support_radius=8.0,
        label="tight gaussian",
    )
    for x in (np.array([0.0]), np.array([0.6])):
        a = eval_loglap(u, x, FAST, N=1, path="decomposition")
        b = eval_loglap(u, x, FAST, N=1, path="direct")
        assert a == pytest.approx(b, abs=1e-5)


def test_loglap_estimate_is_finite():
    val, est = eval_loglap(
        gaussian_field(), np.array([0.0]), FAST, N=1, return_estimate=True
    )
    assert np.isfinite(val) and est >= 0.0


def test_loglap_argument_errors():
    with pytest.raises(ValueError):
        eval_loglap(gaussian_field(), np.array([0.0, 0.0]), FAST, N=1)
    with pytest.raises(ValueError):
        eval_loglap(gaussian_field(), np.array([0.0]), FAST, N=1, path="sideways")
    with pytest.raises(ValueError):
        eval_loglap(linear_field(), np.array([0.0]), FAST, N=1)  # unbounded support


# ---------------------------------------------------------------------------
# logarithmic Schrodinger operator
# ---------------------------------------------------------------------------


def test_schrodinger_annihilates_constants():
    assert eval_schrodinger(const_field(2.0), np.array([0.3]), FAST, N=1) == 0.0


def test_schrodinger_quadratic_1d():
    # -2 * int_0^inf rho e^{-rho} drho = -2
    val = eval_schrodinger(quadratic_field(), np.array([0.0]), FAST, N=1)
    assert val == pytest.approx(-2.0, abs=1e-6)


def test_schrodinger_odd_field_cancels():
    val = eval_schrodinger(linear_field(), np.array([0.0]), FAST, N=1)
    assert abs(val) < 1e-10


def test_schrodinger_dimension_check():
    with pytest.raises(ValueError):
        eval_schrodinger(quadratic_field(), np.array([0.0, 0.0]), FAST, N=1)


# ---------------------------------------------------------------------------
# mollification remainder
# ---------------------------------------------------------------------------


def test_remainder_vanishes_on_constants():
    Ki = mollify_kernel(unit_kernel(), 10)
    assert eval_remainder(Ki, const_field(1.0), np.array([0.0]), FAST) == 0.0


def test_remainder_shrinks_with_mollification_index():
    u = FieldFunction(
        evaluate=lambda Y: np.cos(5.0 * np.atleast_2d(Y)[:, 0]), label="cos(5y)"
    )
    x = np.array([0.0])
    vals = {}
    for i in (10, 100):
        Ki = mollify_kernel(unit_kernel(), i)
        R = eval_remainder(Ki, u, x, FAST)
        # |R_i| <= 2 ||u||_inf * Lambda * (exterior log-mass <= 2/i)
        assert abs(R) <= 2.0 * 1.0 * 1.0 * (2.0 / i)
        vals[i] = R
    assert abs(vals[100]) < abs(vals[10])
    # the leaked annulus shrinks tenfold, and so (roughly) does the remainder
    assert 0.05 < abs(vals[100] / vals[10]) < 0.25


# ---------------------------------------------------------------------------
# sector integral
# ---------------------------------------------------------------------------


def test_sector_integral_1d_closed_form():
    # int over the ball of radius r at distance d: ln((2r+d)/d); 41 = 0.205/0.005
    val = sector_integral(0.1, 0.005, 1, FAST)
    assert val == pytest.approx(math.log(41.0), rel=1e-14)


def test_sector_integral_2d_closed_form():
    # exact value pi * ln(c^2 / (d(2r+d))) with c = r+d
    for r, d in ((0.3, 0.05), (0.2, 0.01), (0.05, 0.002)):
        c = r + d
        exact = math.pi * math.log(c * c / (d * (2 * r + d)))
        val = sector_integral(r, d, 2, ORACLE)
        assert val == pytest.approx(exact, rel=1e-10)


def test_sector_integral_log_divergence():
    r = 0.05
    ratios = []
    for d in (1e-4, 1e-7, 1e-10):
        ratios.append(sector_integral(r, d, 1, FAST) / abs(math.log(d)))
    assert ratios == sorted(ratios)  # creeping up toward 1
    assert ratios[-1] > 0.9
    assert all(q < 1.0 for q in ratios)


def test_sector_integral_domain_errors():
    with pytest.raises(ValueError):
        sector_integral(1.5, 0.1, 1, FAST)
    with pytest.raises(ValueError):
        sector_integral(0.1, 0.02, 1, FAST)  # d must stay below r^2
    with pytest.raises(ValueError):
        sector_integral(0.1, 0.0, 1, FAST)
    with pytest.raises(ValueError):
        sector_integral(0.1, 0.005, 3, FAST)


# ---------------------------------------------------------------------------
# field machinery
# ---------------------------------------------------------------------------


def test_make_field_catalog():
    assert make_field("const(2)").evaluate(np.array([[0.7]]))[0] == 2.0
    assert make_field("quadratic").evaluate(np.array([[2.0]]))[0] == 4.0
    g = make_field("gaussian(0.5)")
    assert g.support_radius == pytest.approx(20.0)
    b = make_field("box(2,3)")
    assert b.evaluate(np.array([[2.5]]))[0] == 1.0
    assert b.evaluate(np.array([[3.5]]))[0] == 0.0
    s = make_field("shell(0.2,0.4)")
    assert s.support_radius == 0.4
    assert make_field("ell_profile(1)").evaluate(np.array([[0.1]]))[0] == (
        pytest.approx(1.0 / math.log(10.0))
    )


def test_make_field_rejects_garbage():
    with pytest.raises(ValueError):
        make_field("frobnicate(3)")
    with pytest.raises(ValueError):
        make_field("ell_profile")
    with pytest.raises(ValueError):
        make_field("box(1)")


def test_shell_and_box_validation():
    with pytest.raises(ValueError):
        shell_field(0.5, 0.5)
    with pytest.raises(ValueError):
        box_field([0.0, 0.0], [1.0, 0.0])


def test_shift_field_support_grows_by_offset():
    g = gaussian_field(sigma=0.02)
    shifted = shift_field(g, np.array([3.0]))
    assert shifted.support_radius == pytest.approx(3.8)
    assert shifted.evaluate(np.array([[-3.0]]))[0] == pytest.approx(1.0)


def test_field_sum_support_propagation():
    bounded = field_sum([(1.0, shell_field(0.0, 0.5)), (2.0, box_field([1.0], [2.0]))])
    assert bounded.support_radius == pytest.approx(2.0)
    mixed = field_sum([(1.0, shell_field(0.0, 0.5)), (1.0, linear_field())])
    assert mixed.support_radius is None


def test_grid_field_wraps_interpolant():
    grid = build_grid(Domain.interval(-1.0, 1.0), 0.25)
    u = GridFunction(grid, np.ones(grid.n))
    f = grid_field(u)
    assert f.grid_backed
    assert f.support_radius == pytest.approx(1.0)
    assert f.evaluate(np.array([[0.0]]))[0] == pytest.approx(1.0)
    assert f.evaluate(np.array([[1.5]]))[0] == 0.0
