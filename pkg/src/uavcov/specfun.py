"""Numerical kernels: Gauss 2F1 on the negative real axis, rising
factorials, complete Bell polynomials, and adaptive Gauss-Kronrod
quadrature.

Everything here is a pure function; integrands passed to `integrate` must
accept an ndarray of abscissae and return an ndarray of values.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np


class Hyp2f1Error(ArithmeticError):
    """2F1 series failed to converge; carries (a, b, c, z)."""

    def __init__(self, msg, a, b, c, z):
        super().__init__(f"{msg} at 2F1(a={a}, b={b}, c={c}, z={z})")
        self.params = (a, b, c, z)


class QuadratureError(ArithmeticError):
    """Adaptive quadrature exhausted its depth; carries the worst
    subinterval as .interval = (lo, hi, err)."""

    def __init__(self, msg, lo, hi, err):
        super().__init__(f"{msg} on [{lo}, {hi}] (err~{err:.3e})")
        self.interval = (lo, hi, err)


def pochhammer(m: float, k: int) -> float:
    """Rising factorial m*(m+1)*...*(m+k-1); 1 for k = 0."""
    if k < 0:
        raise ValueError("k must be >= 0")
    out = 1.0
    for i in range(k):
        out *= m + i
    return out


def complete_bell(derivatives) -> float:
    """Complete Bell polynomial B_n(x1..xn) for n = len(derivatives).

    B_{k+1} = sum_i C(k, i) * B_{k-i} * x_{i+1}, B_0 = 1; this is what
    turns the derivatives of an exponent into derivatives of the
    exponential: d^n/ds^n exp(A) = exp(A) * B_n(A', .., A^(n)).
    """
    xs = list(derivatives)
    bell = [1.0]
    for k in range(len(xs)):
        bell.append(sum(math.comb(k, i) * bell[k - i] * xs[i]
                        for i in range(k + 1)))
    return bell[len(xs)]


def bell_sequence(derivatives) -> list[float]:
    """[B_0, B_1(x1), ..., B_n(x1..xn)] in one recurrence pass."""
    xs = list(derivatives)
    bell = [1.0]
    for k in range(len(xs)):
        bell.append(sum(math.comb(k, i) * bell[k - i] * xs[i]
                        for i in range(k + 1)))
    return bell


# --- Gauss hypergeometric 2F1 on z <= 0 ------------------------------------

_PFAFF_CUT = -0.5   # below this, map z -> z/(z-1) before summing
_INVZ_CUT = -8.0    # below this, sum in 1/z instead (Pfaff needs O(|z|) terms)


def _series(a: float, b: float, c: float, z: np.ndarray,
            tol: float, max_terms: int) -> np.ndarray:
    term = np.ones_like(z)
    total = np.ones_like(z)
    # the term ratio tends to z, so the tail after truncation is roughly
    # geometric: |term| * q/(1-q); only |z| < 1 ever reaches this series
    q = np.minimum(np.abs(z), 1.0 - 1e-15)
    tail_factor = np.maximum(q / (1.0 - q), 1.0)
    small_streak = 0
    for n in range(max_terms):
        term = term * ((a + n) * (b + n)) / ((c + n) * (n + 1.0)) * z
        total = total + term
        if np.all(np.abs(term) * tail_factor <= tol * np.abs(total)):
            small_streak += 1
            if small_streak >= 2:
                return total
        else:
            small_streak = 0
    raise Hyp2f1Error(f"series did not converge in {max_terms} terms",
                      a, b, c, float(np.max(z)))


def hyp2f1(a: float, b: float, c: float, z, tol: float = 1e-12,
           max_terms: int = 10000):
    """2F1(a, b; c; z) for real z <= 0 (scalar or ndarray).

    Three regimes keep the series short everywhere on the negative axis:
    direct summation for z >= -0.5, the Pfaff map z -> z/(z-1) for
    moderate z, and the 1/z connection formula for large |z| (the Pfaff
    series needs O(|z|) terms there).  The 1/z route requires a - b to be
    non-integer, which holds for every argument family this package
    produces; a near-integer a - b raises instead of silently degrading.
    """
    if c <= 0 and abs(c - round(c)) < 1e-12:
        raise Hyp2f1Error("c is a non-positive integer", a, b, c, z)
    z_arr = np.asarray(z, dtype=float)
    scalar = z_arr.ndim == 0
    z_arr = np.atleast_1d(z_arr)
    if np.any(z_arr > 0):
        raise Hyp2f1Error("only z <= 0 is supported", a, b, c,
                          float(np.max(z_arr)))

    out = np.empty_like(z_arr)

    near = z_arr >= _PFAFF_CUT
    if near.any():
        out[near] = _series(a, b, c, z_arr[near], tol, max_terms)

    mid = (~near) & (z_arr >= _INVZ_CUT)
    if mid.any():
        zm = z_arr[mid]
        w = zm / (zm - 1.0)
        out[mid] = (1.0 - zm) ** (-a) * _series(a, c - b, c, w, tol,
                                                max_terms)

    far = z_arr < _INVZ_CUT
    if far.any() and abs((a - b) - round(a - b)) < 1e-8:
        # degenerate connection formula; the Pfaff series still converges,
        # just in O(|z|) terms, so push it through with a raised cap
        zm = z_arr[far]
        w = zm / (zm - 1.0)
        out[far] = (1.0 - zm) ** (-a) * _series(
            a, c - b, c, w, tol, max(max_terms, 200_000))
        far = np.zeros_like(far)
    if far.any():
        zf = z_arr[far]
        inv = 1.0 / zf
        try:
            c1 = (math.gamma(c) * math.gamma(b - a)
                  / (math.gamma(b) * math.gamma(c - a)))
            c2 = (math.gamma(c) * math.gamma(a - b)
                  / (math.gamma(a) * math.gamma(c - b)))
        except ValueError as exc:
            raise Hyp2f1Error(f"gamma pole in connection formula: {exc}",
                              a, b, c, float(np.min(z_arr))) from exc
        f1 = _series(a, a - c + 1.0, a - b + 1.0, inv, tol, max_terms)
        f2 = _series(b, b - c + 1.0, b - a + 1.0, inv, tol, max_terms)
        out[far] = c1 * (-zf) ** (-a) * f1 + c2 * (-zf) ** (-b) * f2

    return float(out[0]) if scalar else out


# --- adaptive Gauss-Kronrod quadrature --------------------------------------

# 15-point Kronrod extension of 7-point Gauss-Legendre (QUADPACK constants)
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

_NODES = np.concatenate([-_XGK[:7], _XGK[7:8], _XGK[6::-1]])      # 15 nodes
_WK = np.concatenate([_WGK[:7], _WGK[7:8], _WGK[6::-1]])
_GAUSS_IDX = np.array([1, 3, 5, 7, 9, 11, 13])                    # G7 subset
_WGAUSS = np.concatenate([_WG[:3], _WG[3:4], _WG[2::-1]])

_ABS_FLOOR = 1e-14


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    abs_error_estimate: float
    subdivisions: int


def _gk15(f, lo: float, hi: float) -> tuple[float, float]:
    """One Gauss-Kronrod 15-point panel: (integral, error estimate)."""
    center = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    fv = np.asarray(f(center + half * _NODES), dtype=float)
    resk = half * float(_WK @ fv)
    resg = half * float(_WGAUSS @ fv[_GAUSS_IDX])
    # QUADPACK-style rescaling keeps the estimate sharp on smooth panels
    mean = resk / (hi - lo) if hi > lo else 0.0
    resasc = half * float(_WK @ np.abs(fv - mean))
    err = abs(resk - resg)
    if resasc != 0.0 and err != 0.0:
        err = resasc * min(1.0, (200.0 * err / resasc) ** 1.5)
    return resk, err


def integrate(f, lo: float, hi: float, rel_tol: float = 1e-8,
              max_depth: int = 50) -> QuadratureResult:
    """Adaptive bisection quadrature of a vectorized integrand on [lo, hi].

    Stops when the summed panel error is below max(rel_tol*|value|, 1e-14).
    The integrand is assumed finite; callers split at known discontinuities
    themselves (the error estimate cannot see a jump sitting on a node).
    """
    if lo > hi:
        raise ValueError("lo must be <= hi")
    if lo == hi:
        return QuadratureResult(0.0, 0.0, 0)

    val, err = _gk15(f, lo, hi)
    heap = [(-err, 0, lo, hi, val, err)]
    total_val, total_err = val, err
    subdivisions = 0
    counter = 1
    while total_err > max(rel_tol * abs(total_val), _ABS_FLOOR):
        neg_err, depth, a, b, v, e = heapq.heappop(heap)
        if depth >= max_depth:
            raise QuadratureError("max subdivision depth exceeded", a, b, e)
        mid = 0.5 * (a + b)
        v1, e1 = _gk15(f, a, mid)
        v2, e2 = _gk15(f, mid, b)
        total_val += v1 + v2 - v
        total_err += e1 + e2 - e
        heapq.heappush(heap, (-e1, depth + 1, a, mid, v1, e1))
        heapq.heappush(heap, (-e2, depth + 1, mid, b, v2, e2))
        subdivisions += 1
        counter += 1
        if counter > 100000:
            worst = heap[0]
            raise QuadratureError("subdivision budget exhausted",
                                  worst[2], worst[3], -worst[0])
    return QuadratureResult(total_val, total_err, subdivisions)
