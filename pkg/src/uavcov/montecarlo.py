"""Simulation oracle for the coverage analysis.

Trials draw a Poisson number of UAVs uniformly on the coverage disc,
assign LOS states (independent draws from the step function, or ray tests
against an explicitly sampled building grid), associate the user with the
strongest mean-power UAV, then draw unit-mean gamma fading and test SINR.

Estimates are deterministic: trials are processed in fixed-size batches,
each batch on its own child of SeedSequence(seed), so the result depends
only on (config, mc-config) and never on thread count or scheduling.
`run_trial` is the single-trial reference implementation of the same
sampling; the batched path consumes draws in a different order, so the
two agree statistically, not draw-for-draw.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .config import ScenarioConfig
from .environment import (UrbanEnvironment, is_los_explicit, los_breakpoints,
                          p_los_table, sample_grid)
from .geometry import (LinkGeometry, bound_los_given_nlos_serving,
                       bound_nlos_given_los_serving)

_BATCH_TRIALS = 2048

LOS_MODES = ("bernoulli", "grid")


@dataclass(frozen=True)
class McConfig:
    trials: int = 200_000
    seed: int = 1234
    los_mode: str = "bernoulli"
    conditional_r1: Optional[float] = None  # fix the serving distance, m

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be a non-negative integer")
        if self.los_mode not in LOS_MODES:
            raise ValueError(f"los_mode must be one of {LOS_MODES}")


@dataclass(frozen=True)
class McEstimate:
    p_cov_hat: float
    ci95_halfwidth: float
    p_los_serving_hat: float  # among associated trials; nan if none
    p_assoc_hat: float
    trials: int
    seed: int
    los_mode: str


class TrialResult(NamedTuple):
    covered: bool
    associated: bool
    serving_los: Optional[bool]


def _ci95(p_hat: float, trials: int) -> float:
    return 1.96 * math.sqrt(p_hat * (1.0 - p_hat) / trials)


def _scenario(cfg: ScenarioConfig):
    env = UrbanEnvironment(beta=cfg.beta, delta=cfg.delta, kappa=cfg.kappa)
    geom = LinkGeometry.from_config(cfg)
    edges = np.array(los_breakpoints(env, geom.u))
    table = p_los_table(env, cfg.gamma, len(edges) - 2)
    return env, geom, edges, table


def _step_weight(edges: np.ndarray, table: np.ndarray, r: np.ndarray):
    j = np.clip(np.searchsorted(edges, r, side="right") - 1,
                0, len(table) - 1)
    return table[j]


def _mean_power(cfg: ScenarioConfig, eta: float, r2, los):
    g2 = cfg.gamma ** 2
    alpha = np.where(los, cfg.alpha_los, cfg.alpha_nlos)
    return cfg.p * eta * (r2 + g2) ** (-alpha / 2.0)


def _fading(cfg: ScenarioConfig, rng: np.random.Generator, los):
    m = np.where(los, float(cfg.m_los), float(cfg.m_nlos))
    return rng.standard_gamma(m) / m


def run_trial(cfg: ScenarioConfig, mc: McConfig,
              rng: np.random.Generator) -> TrialResult:
    """One full network realization; the reference sampling path."""
    env, geom, edges, table = _scenario(cfg)
    n = rng.poisson(cfg.lam * math.pi * geom.u ** 2)
    if n == 0:
        return TrialResult(covered=False, associated=False, serving_los=None)

    r = geom.u * np.sqrt(rng.random(n))
    if mc.los_mode == "bernoulli":
        los = rng.random(n) < _step_weight(edges, table, r)
    else:
        phi = 2.0 * math.pi * rng.random(n)
        xy = np.column_stack([r * np.cos(phi), r * np.sin(phi)])
        grid = sample_grid(env, geom.u, rng)
        los = np.array([is_los_explicit(grid, cfg.gamma, xy[i])
                        for i in range(n)])

    meanpow = _mean_power(cfg, geom.eta, r * r, los)
    # strongest mean power serves; LOS wins the (probability-zero) tie
    order = np.lexsort((~los, -meanpow))
    serve = order[0]
    h = _fading(cfg, rng, los)
    power = meanpow * h
    interference = power.sum() - power[serve]
    sinr = power[serve] / (interference + cfg.sigma2)
    return TrialResult(covered=bool(sinr >= cfg.theta), associated=True,
                       serving_los=bool(los[serve]))


def _batch_counts(trials: int) -> list[int]:
    full, rem = divmod(trials, _BATCH_TRIALS)
    return [_BATCH_TRIALS] * full + ([rem] if rem else [])


def estimate(cfg: ScenarioConfig, mc: McConfig) -> McEstimate:
    """Coverage / association / serving-type estimate over mc.trials."""
    env, geom, edges, table = _scenario(cfg)
    sizes = _batch_counts(mc.trials)
    streams = np.random.SeedSequence(mc.seed).spawn(len(sizes))
    mu = cfg.lam * math.pi * geom.u ** 2

    n_assoc = n_cov = n_serv_los = 0
    for size, ss in zip(sizes, streams):
        rng = np.random.default_rng(ss)
        counts = rng.poisson(mu, size)
        total = int(counts.sum())
        if total == 0:
            continue
        owner = np.repeat(np.arange(size), counts)
        r = geom.u * np.sqrt(rng.random(total))

        if mc.los_mode == "bernoulli":
            los = rng.random(total) < _step_weight(edges, table, r)
        else:
            phi = 2.0 * math.pi * rng.random(total)
            x, y = r * np.cos(phi), r * np.sin(phi)
            los = np.empty(total, dtype=bool)
            pos = 0
            for t in range(size):
                grid = sample_grid(env, geom.u, rng)
                for k in range(pos, pos + counts[t]):
                    los[k] = is_los_explicit(grid, cfg.gamma, (x[k], y[k]))
                pos += counts[t]

        meanpow = _mean_power(cfg, geom.eta, r * r, los)
        order = np.lexsort((~los, -meanpow, owner))
        starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
        ids = np.flatnonzero(counts > 0)
        serve = order[starts[ids]]

        h = _fading(cfg, rng, los)
        power = meanpow * h
        sums = np.bincount(owner, weights=power, minlength=size)
        s1 = power[serve]
        interference = sums[ids] - s1
        with np.errstate(divide="ignore"):
            covered = s1 / (interference + cfg.sigma2) >= cfg.theta

        n_assoc += ids.size
        n_cov += int(covered.sum())
        n_serv_los += int(los[serve].sum())

    p_cov = n_cov / mc.trials
    p_assoc = n_assoc / mc.trials
    p_serv_los = n_serv_los / n_assoc if n_assoc else float("nan")
    return McEstimate(p_cov_hat=p_cov, ci95_halfwidth=_ci95(p_cov, mc.trials),
                      p_los_serving_hat=p_serv_los, p_assoc_hat=p_assoc,
                      trials=mc.trials, seed=mc.seed, los_mode=mc.los_mode)


def estimate_conditional(cfg: ScenarioConfig, mc: McConfig,
                         serving_los: bool) -> McEstimate:
    """Coverage given a serving UAV pinned at mc.conditional_r1.

    Interferers are sampled directly on the exclusion annuli as thinned
    Poisson processes (LOS and NLOS separately), which mirrors the
    conditioning instead of rejection-sampling full network realizations.
    """
    if mc.conditional_r1 is None:
        raise ValueError("mc.conditional_r1 must be set")
    env, geom, edges, table = _scenario(cfg)
    r1 = float(mc.conditional_r1)
    if not 0.0 <= r1 <= geom.u * (1.0 + 1e-12):
        raise ValueError("conditional_r1 must lie within the coverage cone")

    if serving_los:
        b_los, b_nlos = r1, bound_nlos_given_los_serving(r1, geom)
    else:
        b_los, b_nlos = bound_los_given_nlos_serving(r1, geom), r1
    m_s = cfg.m_los if serving_los else cfg.m_nlos
    alpha_s = cfg.alpha_los if serving_los else cfg.alpha_nlos
    g2 = cfg.gamma ** 2
    s1_mean = cfg.p * geom.eta * (r1 * r1 + g2) ** (-alpha_s / 2.0)

    sizes = _batch_counts(mc.trials)
    streams = np.random.SeedSequence(mc.seed).spawn(len(sizes))

    def interference(rng, size, b_lo, los_set):
        mu = cfg.lam * math.pi * max(geom.u ** 2 - b_lo ** 2, 0.0)
        if mu == 0.0:
            return np.zeros(size)
        counts = rng.poisson(mu, size)
        total = int(counts.sum())
        if total == 0:
            return np.zeros(size)
        owner = np.repeat(np.arange(size), counts)
        r = np.sqrt(b_lo ** 2 + rng.random(total)
                    * (geom.u ** 2 - b_lo ** 2))
        w = _step_weight(edges, table, r)
        if not los_set:
            w = 1.0 - w
        keep = rng.random(total) < w
        if not keep.any():
            return np.zeros(size)
        m = float(cfg.m_los if los_set else cfg.m_nlos)
        alpha = cfg.alpha_los if los_set else cfg.alpha_nlos
        h = rng.standard_gamma(m, int(keep.sum())) / m
        p = cfg.p * geom.eta * h * (r[keep] ** 2 + g2) ** (-alpha / 2.0)
        return np.bincount(owner[keep], weights=p, minlength=size)

    n_cov = 0
    for size, ss in zip(sizes, streams):
        rng = np.random.default_rng(ss)
        i_los = interference(rng, size, b_los, los_set=True)
        i_nlos = interference(rng, size, b_nlos, los_set=False)
        h_s = rng.standard_gamma(float(m_s), size) / m_s
        s1 = s1_mean * h_s
        with np.errstate(divide="ignore"):
            covered = s1 / (i_los + i_nlos + cfg.sigma2) >= cfg.theta
        n_cov += int(covered.sum())

    p_cov = n_cov / mc.trials
    return McEstimate(p_cov_hat=p_cov, ci95_halfwidth=_ci95(p_cov, mc.trials),
                      p_los_serving_hat=1.0 if serving_los else 0.0,
                      p_assoc_hat=1.0, trials=mc.trials, seed=mc.seed,
                      los_mode="bernoulli")
