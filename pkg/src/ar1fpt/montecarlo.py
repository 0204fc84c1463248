"""Monte Carlo oracle: AR(1) paths, passage times, overshoots, stationary draws.

Randomness is counter-based: every block of paths owns a Philox stream keyed
by (seed, block index), and per-summary reductions are ordered folds over
block indices.  Results are therefore bit-identical for any worker count;
the FPT_THREADS environment variable merely caps parallelism.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .cumulant import LimitCumulant
from .innovations import InnovationSpec, sample
from .passage import PassageProblem
from .transforms import BatchTransform, check_condition_19

BLOCK_SIZE = 1 << 14

# Domain tags keep the passage and stationary samplers on disjoint streams
# even when they share a seed.
_DOMAIN_PASSAGE = 0x9E3779B97F4A7C15
_DOMAIN_STATIONARY = 0xC2B2AE3D27D4EB4F

_MASK64 = (1 << 64) - 1


def _worker_count() -> int:
    env = os.environ.get("FPT_THREADS")
    if env:
        return max(1, int(env))
    return min(os.cpu_count() or 1, 8)


def _block_rng(seed: int, domain: int, block: int) -> np.random.Generator:
    key = np.array(
        [(seed & _MASK64) ^ domain, block & _MASK64], dtype=np.uint64
    )
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class SimulationSummary:
    """Reduction of one passage simulation run.

    e_tau_hat is averaged over crossed paths only; censored paths (those
    still below the level after max_steps) are counted separately and the
    survival curve includes them.  mgf_* are aligned per-node arrays of
    the empirical estimate of E exp(u * X_tau) over crossed paths.
    """

    n_paths: int
    n_crossed: int
    max_steps: int
    seed: int
    e_tau_hat: float
    e_tau_std_err: float
    overshoot_mean: float
    overshoot_std_err: float
    survival_n: np.ndarray = field(repr=False)
    survival_p: np.ndarray = field(repr=False)
    mgf_u: np.ndarray = field(repr=False)
    mgf_value: np.ndarray = field(repr=False)
    mgf_std_err: np.ndarray = field(repr=False)

    @property
    def n_censored(self) -> int:
        return self.n_paths - self.n_crossed

    def to_dict(self) -> dict:
        return {
            "n_paths": self.n_paths,
            "n_crossed": self.n_crossed,
            "n_censored": self.n_censored,
            "max_steps": self.max_steps,
            "seed": self.seed,
            "e_tau_hat": self.e_tau_hat,
            "e_tau_std_err": self.e_tau_std_err,
            "overshoot_mean": self.overshoot_mean,
            "overshoot_std_err": self.overshoot_std_err,
            "survival_n": self.survival_n.tolist(),
            "survival_p": self.survival_p.tolist(),
            "mgf_u": self.mgf_u.tolist(),
            "mgf_value": self.mgf_value.tolist(),
            "mgf_std_err": self.mgf_std_err.tolist(),
        }


@dataclass
class _BlockResult:
    size: int
    tau_counts: np.ndarray  # histogram of tau over crossed paths
    n_censored: int
    sum_tau: float
    sum_tau2: float
    sum_xi: float
    sum_xi2: float
    mgf_m1: np.ndarray | None
    mgf_m2: np.ndarray | None


def _run_block(
    p: PassageProblem,
    block: int,
    size: int,
    max_steps: int,
    seed: int,
    u_nodes: np.ndarray | None,
) -> _BlockResult:
    rng = _block_rng(seed, _DOMAIN_PASSAGE, block)
    x_state = np.full(size, float(p.x))
    alive_idx = np.arange(size)
    tau = np.zeros(size, dtype=np.int64)
    x_tau = np.full(size, np.nan)
    step = 0
    while len(alive_idx) and step < max_steps:
        step += 1
        eta = sample(p.spec, rng, len(alive_idx))
        x_new = p.lam * x_state[alive_idx] + eta
        x_state[alive_idx] = x_new
        crossed = x_new > p.a
        done = alive_idx[crossed]
        tau[done] = step
        x_tau[done] = x_new[crossed]
        alive_idx = alive_idx[~crossed]

    crossed_mask = tau > 0
    taus = tau[crossed_mask]
    xis = x_tau[crossed_mask] - p.a
    counts = np.bincount(taus) if len(taus) else np.zeros(1, dtype=np.int64)
    mgf_m1 = mgf_m2 = None
    if u_nodes is not None:
        vals = x_tau[crossed_mask]
        with np.errstate(over="ignore"):
            e1 = np.exp(np.minimum(np.multiply.outer(u_nodes, vals), 709.0))
            mgf_m1 = e1.sum(axis=1)
            mgf_m2 = (e1 * e1).sum(axis=1)
    return _BlockResult(
        size=size,
        tau_counts=counts,
        n_censored=int(len(alive_idx)),
        sum_tau=float(taus.sum()),
        sum_tau2=float((taus.astype(float) ** 2).sum()),
        sum_xi=float(xis.sum()),
        sum_xi2=float((xis**2).sum()),
        mgf_m1=mgf_m1,
        mgf_m2=mgf_m2,
    )


def simulate_passage(
    p: PassageProblem,
    n_paths: int,
    max_steps: int = 10**6,
    seed: int = 0,
    mgf_u_nodes=None,
    block_size: int = BLOCK_SIZE,
) -> SimulationSummary:
    """Simulate n_paths independent passages of the level a.

    Censoring (a path still below the level after max_steps) is data, not an
    error: censored paths are excluded from e_tau_hat and the MGF but kept in
    the survival curve.
    """
    if n_paths < 1 or max_steps < 1:
        raise ValueError("n_paths and max_steps must be >= 1")
    u_nodes = None if mgf_u_nodes is None else np.asarray(mgf_u_nodes, dtype=float)

    sizes = [block_size] * (n_paths // block_size)
    if n_paths % block_size:
        sizes.append(n_paths % block_size)

    def job(i):
        return _run_block(p, i, sizes[i], max_steps, seed, u_nodes)

    n_workers = _worker_count()
    if n_workers > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(job, range(len(sizes))))
    else:
        results = [job(i) for i in range(len(sizes))]

    # Ordered fold over block indices: bit-identical for any worker count.
    max_len = max(len(r.tau_counts) for r in results)
    counts = np.zeros(max_len, dtype=np.int64)
    n_censored = 0
    sum_tau = sum_tau2 = sum_xi = sum_xi2 = 0.0
    mgf_m1 = np.zeros(len(u_nodes)) if u_nodes is not None else None
    mgf_m2 = np.zeros(len(u_nodes)) if u_nodes is not None else None
    for r in results:
        counts[: len(r.tau_counts)] += r.tau_counts
        n_censored += r.n_censored
        sum_tau += r.sum_tau
        sum_tau2 += r.sum_tau2
        sum_xi += r.sum_xi
        sum_xi2 += r.sum_xi2
        if u_nodes is not None:
            mgf_m1 += r.mgf_m1
            mgf_m2 += r.mgf_m2

    n_crossed = n_paths - n_censored
    if n_crossed > 0:
        e_tau = sum_tau / n_crossed
        var_tau = max(sum_tau2 / n_crossed - e_tau**2, 0.0)
        se_tau = math.sqrt(var_tau / n_crossed)
        xi_mean = sum_xi / n_crossed
        var_xi = max(sum_xi2 / n_crossed - xi_mean**2, 0.0)
        se_xi = math.sqrt(var_xi / n_crossed)
    else:
        e_tau = se_tau = xi_mean = se_xi = float("nan")

    max_tau = len(counts) - 1
    ns = np.arange(max_tau + 1)
    survival = 1.0 - np.cumsum(counts) / n_paths

    if u_nodes is not None and n_crossed > 0:
        m1 = mgf_m1 / n_crossed
        with np.errstate(invalid="ignore", over="ignore"):
            var = np.maximum(mgf_m2 / n_crossed - m1**2, 0.0)
            se = np.sqrt(var / n_crossed)
        se = np.where(np.isfinite(se), se, np.inf)
    elif u_nodes is not None:
        m1 = np.full(len(u_nodes), np.nan)
        se = np.full(len(u_nodes), np.inf)
    else:
        u_nodes = np.array([])
        m1 = np.array([])
        se = np.array([])

    return SimulationSummary(
        n_paths=n_paths,
        n_crossed=n_crossed,
        max_steps=max_steps,
        seed=seed,
        e_tau_hat=float(e_tau),
        e_tau_std_err=float(se_tau),
        overshoot_mean=float(xi_mean),
        overshoot_std_err=float(se_xi),
        survival_n=ns,
        survival_p=survival,
        mgf_u=u_nodes,
        mgf_value=m1,
        mgf_std_err=se,
    )


def default_stationary_horizon(spec: InnovationSpec, lam: float) -> int:
    """Terms needed so the dropped tail of Theta is below 1e-8."""
    scale = spec.scale()
    return max(1, math.ceil(math.log(1e-8 / scale) / math.log(lam)))


def simulate_stationary(
    spec: InnovationSpec,
    lam: float,
    n_draws: int,
    k_horizon: int | None = None,
    seed: int = 0,
) -> np.ndarray:
    """Draws of Theta = sum_{k < k_horizon} lam**k * eta_{k+1}."""
    if not 0.0 < lam < 1.0:
        raise ValueError("lam must lie in (0, 1)")
    if k_horizon is None:
        k_horizon = default_stationary_horizon(spec, lam)
    rng = _block_rng(seed, _DOMAIN_STATIONARY, 0)
    theta = np.zeros(n_draws)
    for k in range(k_horizon):
        theta += lam**k * sample(spec, rng, n_draws)
    return theta


@dataclass(frozen=True)
class DriftReport:
    """Empirical martingale drift E M_n - M_0 for n = 1..n_steps."""

    drifts: np.ndarray
    std_errs: np.ndarray
    n_escaped: int

    @property
    def max_abs_drift(self) -> float:
        return float(np.max(np.abs(self.drifts)))

    @property
    def max_sigma(self) -> float:
        """Largest |drift| in units of its standard error."""
        with np.errstate(divide="ignore", invalid="ignore"):
            sig = np.abs(self.drifts) / self.std_errs
        sig = sig[np.isfinite(sig)]
        return float(np.max(sig)) if len(sig) else 0.0


def empirical_martingale_check(
    lc: LimitCumulant,
    kind: str,
    v: float | None,
    y0: float,
    n_paths: int,
    n_steps: int,
    seed: int = 0,
) -> DriftReport:
    """Simulate paths from y0 and measure the transform's martingale drift.

    States outside the admissible domain (where the transform integral
    diverges) are counted as escapes and dropped from the averages rather
    than treated as fatal.
    """
    rng = _block_rng(seed, _DOMAIN_PASSAGE, 0)
    states = np.empty((n_steps, n_paths))
    x_state = np.full(n_paths, float(y0))
    for n in range(n_steps):
        x_state = lc.lam * x_state + sample(lc.spec, rng, n_paths)
        states[n] = x_state

    y_max = float(states.max())
    ub = lc.spec.upper_support()
    escaped = 0
    if ub is not None:
        # the admissible domain ends where the exponent's slope turns flat
        y_adm = ub / (1.0 - lc.lam) * (1.0 - 1e-9)
        if y_max > y_adm or not check_condition_19(lc, y_max, v or 0.0).holds:
            escaped = int(np.sum(states > y_adm))
            y_max = min(y_max, y_adm)
    evaluator = BatchTransform(lc, kind, v, y_hi=y_max)

    v_eff = 0.0 if kind == "H" else float(v)
    m0 = evaluator(float(y0))
    drifts = np.empty(n_steps)
    ses = np.empty(n_steps)
    for n in range(n_steps):
        xs = states[n]
        ok = xs <= y_max
        vals = evaluator(xs[ok])
        if kind == "H":
            m_n = vals - (n + 1)
            base = m0
        else:
            m_n = lc.lam ** (v_eff * (n + 1)) * vals
            base = m0
        drifts[n] = float(np.mean(m_n) - base)
        ses[n] = float(np.std(m_n) / math.sqrt(max(np.sum(ok), 1)))
    return DriftReport(drifts=drifts, std_errs=ses, n_escaped=escaped)
