import math

import numpy as np
import pytest
from scipy.integrate import quad

from frectify import funcs, parse
from frectify.errors import (
    AnalyticPrimitiveMismatchError,
    InversionRangeError,
    NearZeroFunctionError,
    OutOfDomainError,
    SignChangeError,
    ValidationError,
)
from frectify.exprlang import evaluate
from frectify.funcs import (
    inverse_eval,
    make_function_spec,
    primitive_eval,
    primitive_eval_many,
)


@pytest.fixture(scope="module")
def sec2():
    return make_function_spec("sec(t)^2", (-1.2, 1.2), (0.0, 0.0))


@pytest.fixture(scope="module")
def unit():
    return make_function_spec("1", (0.0, 5.0), (0.0, 0.0))


@pytest.fixture(scope="module")
def affine():
    return make_function_spec("2*t+1", (0.1, 3.0), (0.1, 0.11))


def quad_oracle(f_text, s_ref, f_ref, s):
    """Independent adaptive-quadrature primitive (scipy)."""
    e = parse(f_text)
    val, err = quad(lambda x: evaluate(e, x), s_ref, s, epsabs=1e-13, epsrel=1e-13)
    assert err < 1e-10
    return f_ref + val


class TestPrimitive:
    def test_sec2_is_tan(self, sec2):
        assert primitive_eval(sec2, math.pi / 4) == pytest.approx(1.0, abs=1e-8)
        assert primitive_eval(sec2, 0.0) == pytest.approx(0.0, abs=1e-12)
        for s in (-1.1, -0.4, 0.3, 0.9):
            assert primitive_eval(sec2, s) == pytest.approx(math.tan(s), abs=1e-10)

    def test_unit_weight_is_identity(self, unit):
        assert primitive_eval(unit, 3.5) == pytest.approx(3.5, abs=1e-10)
        assert primitive_eval(unit, 0.0) == 0.0

    def test_affine_anchored(self, affine):
        # oracle: adaptive quadrature; closed form t^2 + t gives exactly 6
        oracle = quad_oracle("2*t+1", 0.1, 0.11, 2.0)
        assert oracle == pytest.approx(6.0, abs=1e-10)
        assert primitive_eval(affine, 2.0) == pytest.approx(oracle, abs=1e-9)

    def test_against_quadrature_oracle(self, sec2):
        for s in np.linspace(-1.15, 1.15, 9):
            assert primitive_eval(sec2, s) == pytest.approx(
                quad_oracle("sec(t)^2", 0.0, 0.0, s), abs=1e-10
            )

    def test_out_of_domain(self, sec2):
        with pytest.raises(OutOfDomainError):
            primitive_eval(sec2, 1.3)


class TestInverse:
    def test_sec2_inverse_is_arctan(self, sec2):
        assert inverse_eval(sec2, 1.0) == pytest.approx(math.pi / 4, abs=1e-8)
        assert inverse_eval(sec2, math.tan(0.7)) == pytest.approx(0.7, abs=1e-8)

    def test_unit_inverse_identity(self, unit):
        assert inverse_eval(unit, 2.2) == pytest.approx(2.2, abs=1e-10)

    def test_out_of_range_reports_attainable(self, sec2):
        with pytest.raises(InversionRangeError) as exc:
            inverse_eval(sec2, 10.0)
        lo, hi = exc.value.attainable
        assert lo == pytest.approx(math.tan(-1.2), abs=1e-8)
        assert hi == pytest.approx(math.tan(1.2), abs=1e-8)

    def test_residual_tolerance(self, sec2):
        rng = np.random.default_rng(3)
        ys = rng.uniform(math.tan(-1.2), math.tan(1.2), size=50)
        for y in ys:
            s = inverse_eval(sec2, y)
            assert abs(primitive_eval(sec2, s) - y) <= 1e-10 * (1.0 + abs(y))


class TestInvariants:
    @pytest.mark.parametrize("fixture", ["sec2", "unit", "affine"])
    def test_round_trip(self, fixture, request):
        spec = request.getfixturevalue(fixture)
        rng = np.random.default_rng(11)
        lo, hi = spec.domain
        ss = rng.uniform(lo, hi, size=200)
        for s in ss:
            y = primitive_eval(spec, s)
            assert inverse_eval(spec, y) == pytest.approx(s, abs=1e-7)

    def test_monotone(self, sec2):
        rng = np.random.default_rng(5)
        ss = np.sort(rng.uniform(-1.2, 1.2, size=100))
        F = primitive_eval_many(sec2, ss)
        assert np.all(sec2.sign * np.diff(F) > 0)

    def test_derivative_consistency_fd(self, sec2):
        # (F(s+h) - F(s-h)) / 2h = f(s) within 1e-6 relative, h = 1e-5
        h = 1e-5
        for s in np.linspace(-1.1, 1.1, 23):
            fd = (primitive_eval(sec2, s + h) - primitive_eval(sec2, s - h)) / (2 * h)
            f = evaluate(sec2.f, s)
            assert abs(fd - f) <= 1e-6 * (1.0 + abs(f))

    def test_derivative_consistency_interpolant(self, sec2):
        # the table's own derivative reproduces f to 1e-8 relative on a
        # 1001-point grid
        grid = np.linspace(-1.2, 1.2, 1001)
        dF = sec2.table.derivative(grid)
        f = np.array([evaluate(sec2.f, s) for s in grid])
        assert np.max(np.abs(dF - f) / (1.0 + np.abs(f))) <= 1e-8


class TestConstruction:
    def test_sign_change_reports_bracket(self):
        with pytest.raises(SignChangeError) as exc:
            make_function_spec("t", (-1.0, 1.0))
        lo, hi = exc.value.bracket
        assert lo <= 0.0 <= hi

    def test_near_zero(self):
        with pytest.raises(NearZeroFunctionError):
            make_function_spec("(t-1)^2", (0.0, 2.0))

    def test_negative_f_allowed(self):
        spec = make_function_spec("-1", (0.0, 2.0), (0.0, 0.0))
        assert spec.sign == -1
        assert primitive_eval(spec, 1.5) == pytest.approx(-1.5, abs=1e-10)
        assert inverse_eval(spec, -0.7) == pytest.approx(0.7, abs=1e-8)

    def test_analytic_primitive_used(self):
        spec = make_function_spec(
            "sec(t)^2", (-1.2, 1.2), (0.0, 0.0), analytic_F="tan(t)"
        )
        assert primitive_eval(spec, 0.83) == math.tan(0.83)
        assert inverse_eval(spec, math.tan(0.83)) == pytest.approx(0.83, abs=1e-12)

    def test_analytic_primitive_mismatch(self):
        with pytest.raises(AnalyticPrimitiveMismatchError):
            make_function_spec("sec(t)^2", (-1.2, 1.2), (0.0, 0.0), analytic_F="t")

    def test_analytic_primitive_wrong_anchor(self):
        # tan(t) does not satisfy F(-1.2) = 0
        with pytest.raises(AnalyticPrimitiveMismatchError):
            make_function_spec("sec(t)^2", (-1.2, 1.2), (-1.2, 0.0), analytic_F="tan(t)")

    def test_empty_domain(self):
        with pytest.raises(ValidationError):
            make_function_spec("1", (2.0, 2.0))

    def test_anchor_outside_domain(self):
        with pytest.raises(ValidationError):
            make_function_spec("1", (0.0, 1.0), (2.0, 0.0))
