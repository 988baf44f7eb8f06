import math

import numpy as np
import pytest
from scipy import integrate as sint
from scipy import special as sp

from uavcov import (Hyp2f1Error, QuadratureError, complete_bell, hyp2f1,
                    integrate, pochhammer)
from uavcov.specfun import _WGAUSS, _NODES, _GAUSS_IDX


def euler_integral_2f1(a, b, c, z):
    """Independent oracle: Gauss 2F1 via its Euler integral.

    Requires c > b > 0.  The substitution t = x^(1/b) removes the
    endpoint singularity of t^(b-1) so plain adaptive quadrature applies.
    """
    assert c > b > 0

    def f(x):
        t = x ** (1.0 / b)
        return (1.0 - t) ** (c - b - 1.0) * (1.0 - z * t) ** (-a) / b

    val, err = sint.quad(f, 0.0, 1.0, epsabs=1e-14, epsrel=1e-12, limit=200)
    pref = math.gamma(c) / (math.gamma(b) * math.gamma(c - b))
    return pref * val


def test_pochhammer():
    assert pochhammer(3.0, 0) == 1.0
    assert pochhammer(3.0, 2) == 12.0
    assert pochhammer(1.0, 4) == 24.0
    assert pochhammer(0.5, 3) == pytest.approx(0.5 * 1.5 * 2.5)


def test_complete_bell_identities():
    assert complete_bell([]) == 1.0
    x1, x2, x3 = 0.7, -1.3, 2.2
    assert complete_bell([x1]) == pytest.approx(x1)
    assert complete_bell([x1, x2]) == pytest.approx(x1 ** 2 + x2)
    assert complete_bell([x1, x2, x3]) == pytest.approx(
        x1 ** 3 + 3 * x1 * x2 + x3)


def test_bell_matches_finite_differences():
    # d^n/ds^n exp(A(s)) with A(s) = exp(0.3 s), via B_n(A', .., A^(n))
    s0 = 0.8

    def outer(s):
        return math.exp(math.exp(0.3 * s))

    a_ders = [0.3 ** k * math.exp(0.3 * s0) for k in (1, 2, 3)]
    h = 1e-3
    fd = {
        1: (outer(s0 + h) - outer(s0 - h)) / (2 * h),
        2: (outer(s0 + h) - 2 * outer(s0) + outer(s0 - h)) / h ** 2,
        3: (outer(s0 + 2 * h) - 2 * outer(s0 + h) + 2 * outer(s0 - h)
            - outer(s0 - 2 * h)) / (2 * h ** 3),
    }
    for n in (1, 2, 3):
        exact = outer(s0) * complete_bell(a_ders[:n])
        assert exact == pytest.approx(fd[n], rel=1e-5)


def test_integrate_polynomial():
    res = integrate(lambda x: x, 0.0, 1.0)
    assert res.value == pytest.approx(0.5, rel=1e-14)
    assert res.abs_error_estimate >= 0.0
    # Gauss-Kronrod 15 panels are exact well past cubic
    res = integrate(lambda x: 7 * x ** 9 - x ** 3 + 2, -1.0, 3.0)
    exact = 7 * (3 ** 10 - 1) / 10 - (3 ** 4 - 1) / 4 + 2 * 4
    assert res.value == pytest.approx(exact, rel=1e-13)


def test_integrate_sine_squared():
    res = integrate(lambda x: np.sin(x) ** 2, 0.0, 2 * math.pi)
    assert res.value == pytest.approx(math.pi, rel=1e-12)


def test_integrate_first_segment_moment():
    pitch = 81.64965809277261
    res = integrate(lambda r: r, 0.0, pitch)
    assert res.value == pytest.approx(pitch ** 2 / 2.0, rel=1e-13)
    assert res.value == pytest.approx(3333.3333333333335, rel=1e-12)


def test_integrate_error_estimate_honest():
    res = integrate(lambda x: np.exp(-x * x), -4.0, 4.0, rel_tol=1e-10)
    exact = math.sqrt(math.pi) * math.erf(4.0)
    assert abs(res.value - exact) <= max(res.abs_error_estimate, 1e-12)


def test_integrate_empty_and_invalid():
    assert integrate(lambda x: x, 2.0, 2.0).value == 0.0
    with pytest.raises(ValueError):
        integrate(lambda x: x, 3.0, 2.0)


def test_integrate_depth_cap():
    # integrable endpoint singularity exhausts a tiny depth budget
    with pytest.raises(QuadratureError) as exc:
        integrate(lambda x: 1.0 / np.sqrt(np.abs(x - 0.123456)),
                  0.0, 1.0, rel_tol=1e-12, max_depth=4)
    lo, hi, err = exc.value.interval
    assert 0.0 <= lo < hi <= 1.0


def test_gauss7_nodes_match_legendre():
    nodes, weights = np.polynomial.legendre.leggauss(7)
    assert np.allclose(np.sort(_NODES[_GAUSS_IDX]), np.sort(nodes),
                       atol=1e-14)
    assert np.allclose(_WGAUSS, weights, atol=1e-14)


def test_hyp2f1_at_zero():
    assert hyp2f1(1.7, 0.3, 1.3, 0.0) == 1.0


def test_hyp2f1_log_identity():
    # 2F1(1,1;2;z) = -log(1-z)/z
    assert hyp2f1(1.0, 1.0, 2.0, -1.0) == pytest.approx(math.log(2.0),
                                                        abs=1e-12)
    for z in (-0.3, -5.0, -40.0):
        assert hyp2f1(1.0, 1.0, 2.0, z) == pytest.approx(
            -math.log1p(-z) / z, rel=1e-11)


@pytest.mark.parametrize("a", [1, 2, 3])
@pytest.mark.parametrize("z", [-0.1, -1.0, -10.0, -1e3])
def test_hyp2f1_euler_oracle(a, z):
    b = 2.0 / 2.1
    val = hyp2f1(a, b, 1.0 + b, z)
    ref = euler_integral_2f1(a, b, 1.0 + b, z)
    assert val == pytest.approx(ref, rel=1e-8)


@pytest.mark.parametrize("alpha", [2.1, 4.0])
@pytest.mark.parametrize("a", [1, 2, 3])
@pytest.mark.parametrize("z", [-0.01, -0.5, -2.0, -8.0, -9.0, -100.0,
                               -1e4, -1e6, -1e9])
def test_hyp2f1_matches_scipy(alpha, a, z):
    b = 2.0 / alpha
    assert hyp2f1(a, b, 1.0 + b, z) == pytest.approx(
        float(sp.hyp2f1(a, b, 1.0 + b, z)), rel=1e-10)


def test_hyp2f1_vectorized():
    z = np.array([-0.2, -3.0, -77.0, -1e5])
    out = hyp2f1(2, 0.5, 1.5, z)
    assert out.shape == z.shape
    for zi, oi in zip(z, out):
        assert oi == pytest.approx(hyp2f1(2, 0.5, 1.5, float(zi)), rel=1e-12)


def test_hyp2f1_rejects_positive_z():
    with pytest.raises(Hyp2f1Error):
        hyp2f1(1.0, 0.5, 1.5, 0.5)


def test_hyp2f1_nonconvergence_diagnostic():
    with pytest.raises(Hyp2f1Error) as exc:
        hyp2f1(1.0, 0.95, 1.95, -7.9, max_terms=3)
    a, b, c, z = exc.value.params
    assert (a, c) == (1.0, 1.95)
