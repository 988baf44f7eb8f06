"""Closed-form coverage probability of the UAV network.

The derivation chain, all conditioned on the user sitting at the origin:

* the LOS step function splits the UAV disc into annular segments with
  constant LOS/NLOS thinning weights;
* serving-distance densities follow from void probabilities of the two
  thinned point processes plus the cross-type exclusion bounds;
* interference is summarized by the Laplace transforms of the LOS and
  NLOS aggregates, evaluated segment-by-segment in closed form through
  the Gauss hypergeometric function; s-derivatives of the exponent are
  integrated directly and assembled into transform derivatives with
  complete Bell polynomials;
* integer-parameter Nakagami fading turns coverage given the serving
  distance into a finite sum over those derivatives, and the final
  coverage probability integrates that against the serving densities.

Inner quadratures run two decimal digits tighter than the outer
tolerance so the outer adaptive pass never chases inner noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .config import ScenarioConfig
from .environment import UrbanEnvironment, los_breakpoints, p_los_table
from .geometry import (LinkGeometry, association_probability,
                       bound_los_given_nlos_serving,
                       bound_nlos_given_los_serving)
from .specfun import (QuadratureError, bell_sequence, hyp2f1, integrate,
                      pochhammer)

TWO_PI = 2.0 * math.pi


class NumericsError(ArithmeticError):
    """A numerical consistency check failed (quadrature or assembly)."""


@dataclass(frozen=True)
class ServingDensity:
    r1: float       # serving distance, m
    f_los: float    # density of (R1 = r1, serving LOS), per m
    f_nlos: float   # density of (R1 = r1, serving NLOS), per m


@dataclass(frozen=True)
class LaplaceDerivatives:
    """One interference component's transform and s-derivatives at s."""

    order: int
    values: tuple   # (L, L', ..., L^(order))


@dataclass(frozen=True)
class QuadDiagnostics:
    abs_error_estimate: float
    subdivisions: int


@dataclass(frozen=True)
class AnalyticResult:
    p_cov: float           # P(associated and SINR >= theta)
    p_assoc: float         # P(at least one UAV in range)
    p_los_serving: float   # P(serving link LOS | associated); nan if lam=0
    quad_diagnostics: QuadDiagnostics


def thinned_intensity_integral(env: UrbanEnvironment, gamma: float,
                               lo: float, hi: float, los: bool) -> float:
    """integral of w(r)*r dr over [lo, hi], w = LOS (or NLOS) probability.

    Exact: w is piecewise constant, so the integral is a sum of
    w_j * (r_hi^2 - r_lo^2) / 2 over the step segments.
    """
    if not 0 <= lo <= hi:
        raise ValueError("need 0 <= lo <= hi")
    if lo == hi:
        return 0.0
    edges = np.array(los_breakpoints(env, hi))
    weights = p_los_table(env, gamma, len(edges) - 2)
    if not los:
        weights = 1.0 - weights
    total = 0.0
    for j in range(len(edges) - 1):
        a = max(lo, edges[j])
        b = min(hi, edges[j + 1])
        if a < b:
            total += weights[j] * (b * b - a * a) / 2.0
    return total


class _Model:
    """Per-scenario cache: segment structure, prefix integrals, kernels."""

    def __init__(self, cfg: ScenarioConfig):
        self.cfg = cfg
        self.env = UrbanEnvironment(beta=cfg.beta, delta=cfg.delta,
                                    kappa=cfg.kappa)
        self.geom = LinkGeometry.from_config(cfg)
        self.u = self.geom.u
        self.eta = self.geom.eta
        edges = np.array(los_breakpoints(self.env, self.u))
        self.edges = edges
        self.w_los = p_los_table(self.env, cfg.gamma, len(edges) - 2)
        self.w_nlos = 1.0 - self.w_los
        # prefix[j] = integral of w*r dr over [0, edges[j]]
        seg_mass = (edges[1:] ** 2 - edges[:-1] ** 2) / 2.0
        self.pre_los = np.concatenate([[0.0],
                                       np.cumsum(self.w_los * seg_mass)])
        self.pre_nlos = np.concatenate([[0.0],
                                        np.cumsum(self.w_nlos * seg_mass)])
        self.p_assoc = association_probability(cfg.lam, self.u)
        self.noise_scale = cfg.sigma2 / (cfg.p * self.eta)
        self.inner_tol = max(cfg.numerics.quad_rel_tol * 1e-2, 1e-13)

    # -- piecewise-constant helpers, vectorized over r -----------------------

    def _seg_index(self, r):
        j = np.searchsorted(self.edges, r, side="right") - 1
        return np.clip(j, 0, len(self.w_los) - 1)

    def plos_at(self, r):
        return self.w_los[self._seg_index(r)]

    def thinned_upto(self, x, los: bool):
        """integral of w*r dr over [0, x], vectorized."""
        x = np.asarray(x, dtype=float)
        j = self._seg_index(x)
        pre = self.pre_los if los else self.pre_nlos
        w = self.w_los if los else self.w_nlos
        return pre[j] + w[j] * (x * x - self.edges[j] ** 2) / 2.0

    def bound_nlos(self, r1):
        g2 = self.cfg.gamma ** 2
        b2 = (np.asarray(r1, dtype=float) ** 2 + g2) ** (
            self.cfg.alpha_los / self.cfg.alpha_nlos) - g2
        return np.sqrt(np.maximum(b2, 0.0))

    def bound_los(self, r1):
        r1 = np.asarray(r1, dtype=float)
        g2 = self.cfg.gamma ** 2
        ratio = self.cfg.alpha_nlos / self.cfg.alpha_los
        out = np.full(r1.shape, self.u)
        inside = ratio * np.log(r1 * r1 + g2) < math.log(self.u ** 2 + g2)
        if inside.any():
            b2 = (r1[inside] ** 2 + g2) ** ratio - g2
            out[inside] = np.sqrt(np.maximum(b2, 0.0))
        return out

    # -- serving-distance densities ------------------------------------------

    def f_serving(self, r1, los: bool):
        """Joint density of serving distance and serving type, per m."""
        r1 = np.asarray(r1, dtype=float)
        lam = self.cfg.lam
        if los:
            w1 = self.plos_at(r1)
            own_void = self.thinned_upto(r1, los=True)
            cross_void = self.thinned_upto(self.bound_nlos(r1), los=False)
        else:
            w1 = 1.0 - self.plos_at(r1)
            own_void = self.thinned_upto(r1, los=False)
            cross_void = self.thinned_upto(self.bound_los(r1), los=True)
        return (w1 * TWO_PI * lam * r1
                * np.exp(-TWO_PI * lam * own_void)
                * np.exp(-TWO_PI * lam * cross_void))

    # -- interference Laplace transform and derivatives ----------------------

    def _clipped_segments(self, lo: float, hi: float):
        """(l, h, w_los_idx) triples of step segments overlapping [lo, hi]."""
        out = []
        for j in range(len(self.w_los)):
            a = max(lo, float(self.edges[j]))
            b = min(hi, float(self.edges[j + 1]))
            if a < b:
                out.append((a, b, j))
        return out

    def exponent_value(self, b_lo: float, s: float, m: int, alpha: float,
                       interferer_los: bool) -> float:
        """A(s) with L(s) = exp(-A(s)), via the per-segment closed form."""
        segs = self._clipped_segments(b_lo, self.u)
        if not segs or self.cfg.lam == 0.0:
            return 0.0
        g2 = self.cfg.gamma ** 2
        weights = self.w_los if interferer_los else self.w_nlos
        # shared endpoint grid: segment ends are contiguous
        xs = np.array([segs[0][0]] + [b for (_, b, _) in segs])
        x2g = xs * xs + g2
        z = -m * x2g ** (alpha / 2.0) / s
        bb = 2.0 / alpha
        total_per_seg = np.zeros(len(segs))
        for k in range(1, m + 1):
            fk = hyp2f1(k, bb, 1.0 + bb, z,
                        tol=self.cfg.numerics.hyp2f1_tol)
            gk = x2g * fk
            total_per_seg += (math.comb(m, k) * (-1.0) ** (k + 1)
                              * 0.5 * np.diff(gk))
        w = np.array([weights[j] for (_, _, j) in segs])
        return TWO_PI * self.cfg.lam * float(w @ total_per_seg)

    def exponent_derivatives(self, b_lo: float, s: float, m: int,
                             alpha: float, interferer_los: bool,
                             order: int) -> list[float]:
        """[A'(s), ..., A^(order)(s)] by segment-split quadrature."""
        if order < 1:
            return []
        segs = self._clipped_segments(b_lo, self.u)
        weights = self.w_los if interferer_los else self.w_nlos
        g2 = self.cfg.gamma ** 2
        lam = self.cfg.lam
        out = []
        for k in range(1, order + 1):
            def integrand(r, _k=k):
                v = (r * r + g2) ** (-alpha / 2.0)
                return (v / m) ** _k * (1.0 + s * v / m) ** (-(m + _k)) * r

            acc = 0.0
            if lam > 0.0:
                for (a, b, j) in segs:
                    w = weights[j]
                    if w == 0.0:
                        continue
                    res = integrate(integrand, a, b, self.inner_tol,
                                    self.cfg.numerics.max_quad_depth)
                    acc += w * res.value
            out.append(TWO_PI * lam * (-1.0) ** (k + 1)
                       * pochhammer(m, k) * acc)
        return out

    def laplace(self, b_lo: float, s: float, m: int, alpha: float,
                interferer_los: bool, order: int) -> list[float]:
        """[L(s), L'(s), ..., L^(order)(s)] for one interference component."""
        a0 = self.exponent_value(b_lo, s, m, alpha, interferer_los)
        aders = self.exponent_derivatives(b_lo, s, m, alpha, interferer_los,
                                          order)
        l0 = math.exp(-a0)
        bells = bell_sequence([-d for d in aders])
        return [l0 * bells[n] for n in range(order + 1)]

    def _interferer_bounds(self, r1: float, serving_los: bool):
        """Exclusion radii (LOS bound, NLOS bound) given the serving type."""
        if serving_los:
            return r1, bound_nlos_given_los_serving(r1, self.geom)
        return bound_los_given_nlos_serving(r1, self.geom), r1

    # -- conditional and total coverage ---------------------------------------

    def conditional_coverage(self, r1: float, serving_los: bool) -> float:
        cfg = self.cfg
        if not 0.0 <= r1 <= self.u * (1.0 + 1e-12):
            raise ValueError("r1 must lie within the coverage cone")
        m_s = cfg.m_los if serving_los else cfg.m_nlos
        alpha_s = cfg.alpha_los if serving_los else cfg.alpha_nlos
        s = m_s * cfg.theta * (r1 * r1 + cfg.gamma ** 2) ** (alpha_s / 2.0)
        exp_noise = math.exp(-s * self.noise_scale)
        if exp_noise == 0.0:
            return 0.0  # the shared noise factor kills every term
        order = m_s - 1
        b_l, b_n = self._interferer_bounds(r1, serving_los)
        d_los = self.laplace(b_l, s, cfg.m_los, cfg.alpha_los,
                             interferer_los=True, order=order)
        d_nlos = self.laplace(b_n, s, cfg.m_nlos, cfg.alpha_nlos,
                              interferer_los=False, order=order)

        total = 0.0
        for n in range(m_s):
            inner = 0.0
            for i_l in range(n + 1):
                for i_n in range(n - i_l + 1):
                    i_sig = n - i_l - i_n
                    inner += (math.factorial(n)
                              / (math.factorial(i_l) * math.factorial(i_n)
                                 * math.factorial(i_sig))
                              * (-self.noise_scale) ** i_sig
                              * d_los[i_l] * d_nlos[i_n])
            total += ((-1.0) ** n * s ** n / math.factorial(n)
                      * exp_noise * inner)

        if not -1e-9 <= total <= 1.0 + 1e-9:
            raise NumericsError(
                f"conditional coverage {total} outside [0,1] beyond "
                f"tolerance at r1={r1}, serving_los={serving_los}")
        return min(max(total, 0.0), 1.0)

    def _coverage_point(self, r1: float) -> float:
        total = 0.0
        f_l = float(self.f_serving(r1, los=True))
        if f_l > 0.0:
            total += f_l * self.conditional_coverage(r1, serving_los=True)
        f_n = float(self.f_serving(r1, los=False))
        if f_n > 0.0:
            total += f_n * self.conditional_coverage(r1, serving_los=False)
        return total

    def p_los_serving(self) -> float:
        if self.cfg.lam == 0.0:
            raise ValueError("no association possible with lam = 0")
        num = 0.0
        for j in range(len(self.w_los)):
            res = integrate(lambda r: self.f_serving(r, los=True),
                            float(self.edges[j]), float(self.edges[j + 1]),
                            self.cfg.numerics.quad_rel_tol,
                            self.cfg.numerics.max_quad_depth)
            num += res.value
        return num / self.p_assoc

    def coverage(self) -> AnalyticResult:
        if self.cfg.lam == 0.0:
            return AnalyticResult(0.0, 0.0, float("nan"),
                                  QuadDiagnostics(0.0, 0))
        total = 0.0
        err = 0.0
        subs = 0

        def outer(r_arr):
            return np.array([self._coverage_point(float(r)) for r in r_arr])

        for j in range(len(self.w_los)):
            lo, hi = float(self.edges[j]), float(self.edges[j + 1])
            try:
                res = integrate(outer, lo, hi,
                                self.cfg.numerics.quad_rel_tol,
                                self.cfg.numerics.max_quad_depth)
            except QuadratureError as exc:
                raise NumericsError(
                    f"coverage integral failed on r1 segment "
                    f"[{lo:.3f}, {hi:.3f}]: {exc}") from exc
            total += res.value
            err += res.abs_error_estimate
            subs += res.subdivisions

        p_ls = self.p_los_serving()
        if total > self.p_assoc:
            if total > self.p_assoc + 1e-9:
                raise NumericsError(
                    f"p_cov {total} exceeds association probability "
                    f"{self.p_assoc}")
            total = self.p_assoc
        return AnalyticResult(p_cov=max(total, 0.0), p_assoc=self.p_assoc,
                              p_los_serving=p_ls,
                              quad_diagnostics=QuadDiagnostics(err, subs))


@lru_cache(maxsize=64)
def _model(cfg: ScenarioConfig) -> _Model:
    return _Model(cfg)


def serving_density(cfg: ScenarioConfig, r1: float,
                    serving_los: bool) -> float:
    """Joint density of (serving distance = r1, serving type), per meter."""
    return float(_model(cfg).f_serving(r1, los=serving_los))


def serving_densities(cfg: ScenarioConfig, r1: float) -> ServingDensity:
    m = _model(cfg)
    return ServingDensity(r1=r1, f_los=float(m.f_serving(r1, los=True)),
                          f_nlos=float(m.f_serving(r1, los=False)))


def p_los_serving(cfg: ScenarioConfig) -> float:
    """P(serving link is LOS | at least one UAV in range)."""
    return _model(cfg).p_los_serving()


def laplace_derivatives(cfg: ScenarioConfig, serving_los: bool,
                        interferer_los: bool, r1: float, s: float,
                        order: int) -> LaplaceDerivatives:
    """Laplace transform of one interference aggregate and its
    s-derivatives, at argument s, given the serving type and distance."""
    if s <= 0:
        raise ValueError("s must be > 0")
    m = _model(cfg)
    b_l, b_n = m._interferer_bounds(r1, serving_los)
    b_lo = b_l if interferer_los else b_n
    m_i = cfg.m_los if interferer_los else cfg.m_nlos
    alpha_i = cfg.alpha_los if interferer_los else cfg.alpha_nlos
    vals = m.laplace(b_lo, s, m_i, alpha_i, interferer_los, order)
    return LaplaceDerivatives(order=order, values=tuple(vals))


def conditional_coverage(cfg: ScenarioConfig, r1: float,
                         serving_los: bool) -> float:
    """P(SINR >= theta | serving UAV of the given type at distance r1)."""
    return _model(cfg).conditional_coverage(r1, serving_los)


def coverage_probability(cfg: ScenarioConfig) -> AnalyticResult:
    """Joint probability of association and SINR >= theta.

    The serving densities integrate to the association probability, not
    1, so p_cov <= p_assoc by construction.
    """
    return _model(cfg).coverage()


def sigmoid_p_los_serving(cfg: ScenarioConfig, a: float, b: float) -> float:
    """Serving-link LOS probability under the elevation-angle sigmoid
    comparison model with user-supplied fit parameters (a, b).

    Under a type-blind channel the strongest mean power comes from the
    nearest UAV, so the in-range serving distance has density
    2*pi*lam*r*exp(-pi*lam*r^2) / p_assoc on [0, u]; the sigmoid curve is
    averaged against it.
    """
    from .environment import p_los_sigmoid

    m = _model(cfg)
    if cfg.lam == 0.0:
        raise ValueError("no association possible with lam = 0")

    def integrand(r):
        return (p_los_sigmoid(a, b, cfg.gamma, r) * TWO_PI * cfg.lam * r
                * np.exp(-math.pi * cfg.lam * r * r))

    res = integrate(integrand, 0.0, m.u, cfg.numerics.quad_rel_tol,
                    cfg.numerics.max_quad_depth)
    return res.value / m.p_assoc
