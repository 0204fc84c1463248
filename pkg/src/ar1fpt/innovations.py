"""Innovation distribution families for the AR(1) recursion X_n = lam*X_{n-1} + eta_n.

Each family bundles a cumulant psi(u) = log E exp(u*eta) with a sampler that
draws from exactly the same law, so analytic evaluations and the Monte Carlo
oracle can be cross-checked against each other.  The registry is closed: the
six families below are the only ones the rest of the package accepts.

All families here are spectrally light on the right, i.e. E exp(u*eta) is
finite for every u >= 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate, special

from .errors import InfeasibleTruncationError, UnsupportedSamplerError

_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class TailDiagnostics:
    """Left/right tail summaries used by the feasibility predicates.

    log_moment        estimate of E log(1 + |eta|)
    neg_moment_delta  pair (delta, estimate of E (eta^-)**delta)
    upper_bound       H with eta <= H a.s., or None for unbounded support
    """

    log_moment: float
    neg_moment_delta: tuple[float, float]
    upper_bound: float | None


class InnovationSpec:
    """Abstract innovation family.

    Subclasses provide the cumulant, a sampler coupled to it, and enough
    distributional metadata (support bound, tail probabilities, partial MGFs)
    for the truncation transforms and the quadrature-based expectations.
    Instances are immutable values; samplers draw from caller-owned
    generators, so specs are safe to share across workers.
    """

    #: True iff E exp(u*eta) < infinity for all u >= 0.
    mgf_domain_note: bool = True

    # -- cumulant ----------------------------------------------------------

    def psi(self, u):
        """Cumulant log E exp(u*eta) for u >= 0 (vectorized)."""
        raise NotImplementedError

    # -- sampling ----------------------------------------------------------

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Draw n i.i.d. values using the caller's generator."""
        raise NotImplementedError

    # -- moments and support ----------------------------------------------

    def mean(self) -> float | None:
        return None

    def var(self) -> float | None:
        return None

    def scale(self) -> float:
        """A positive length scale for horizon heuristics (stddev-like)."""
        v = self.var()
        if v is not None and v > 0:
            return math.sqrt(v)
        m = self.mean()
        if m is not None and m != 0:
            return abs(m)
        return 1.0

    def upper_support(self) -> float | None:
        """Essential supremum of eta, or None when unbounded above."""
        return None

    def upper_quantile(self, q: float) -> float:
        """A value exceeded with probability at most 1 - q."""
        raise NotImplementedError

    def tail_prob(self, t: float) -> float:
        """P(eta > t)."""
        raise NotImplementedError

    def cdf(self, t: float) -> float:
        raise NotImplementedError

    # -- integration helpers ----------------------------------------------

    def log_partial_mgf_below(self, u, t: float):
        """log E[exp(u*eta); eta <= t], vectorized in u (-inf when empty)."""
        raise NotImplementedError

    def expectation(self, g: Callable[[np.ndarray], np.ndarray]) -> float:
        """E g(eta) by exact sums (discrete) or quadrature (continuous)."""
        raise NotImplementedError

    def atoms(self) -> list[tuple[float, float]] | None:
        """(value, probability) pairs for purely discrete families."""
        return None


def _as_u(u):
    arr = np.asarray(u, dtype=float)
    if np.any(arr < 0):
        raise ValueError("cumulant is only defined for u >= 0")
    return arr


def _maybe_scalar(value, u):
    return float(value) if np.ndim(u) == 0 else value


@dataclass(frozen=True)
class Gaussian(InnovationSpec):
    """Normal innovation N(m, sigma2)."""

    m: float = 0.0
    sigma2: float = 1.0

    def __post_init__(self):
        if self.sigma2 <= 0:
            raise ValueError("Gaussian requires sigma2 > 0")

    def psi(self, u):
        arr = _as_u(u)
        return _maybe_scalar(self.m * arr + 0.5 * self.sigma2 * arr**2, u)

    def sample(self, rng, n):
        return rng.normal(self.m, math.sqrt(self.sigma2), size=n)

    def mean(self):
        return self.m

    def var(self):
        return self.sigma2

    def upper_quantile(self, q):
        return self.m + math.sqrt(self.sigma2) * special.ndtri(q)

    def tail_prob(self, t):
        return float(special.ndtr((self.m - t) / math.sqrt(self.sigma2)))

    def cdf(self, t):
        return float(special.ndtr((t - self.m) / math.sqrt(self.sigma2)))

    def log_partial_mgf_below(self, u, t):
        # Exponential tilting: E[e^{u eta}; eta <= t] = e^{psi(u)} Phi((t - m - s2 u)/s).
        arr = _as_u(u)
        s = math.sqrt(self.sigma2)
        z = (t - self.m - self.sigma2 * arr) / s
        out = self.psi(arr) + special.log_ndtr(z)
        return _maybe_scalar(out, u)

    def expectation(self, g, n_nodes: int = 64):
        x, w = np.polynomial.hermite.hermgauss(n_nodes)
        pts = self.m + math.sqrt(self.sigma2) * _SQRT2 * x
        return float(np.sum(w * np.asarray([g(p) for p in pts])) / math.sqrt(math.pi))

    def pdf(self, x):
        s = math.sqrt(self.sigma2)
        return np.exp(-0.5 * ((x - self.m) / s) ** 2) / (s * math.sqrt(2 * math.pi))


class _DiscreteSpec(InnovationSpec):
    """Shared machinery for families with finitely many atoms."""

    def _atoms(self) -> list[tuple[float, float]]:
        raise NotImplementedError

    def atoms(self):
        return self._atoms()

    def psi(self, u):
        arr = _as_u(u)
        vals = np.array([a for a, _ in self._atoms()])
        probs = np.array([p for _, p in self._atoms()])
        # log sum_i p_i e^{u a_i}, shifted by the max exponent for stability
        expo = np.multiply.outer(arr, vals)
        shift = expo.max(axis=-1, keepdims=True)
        out = np.squeeze(shift, axis=-1) + np.log(
            np.sum(probs * np.exp(expo - shift), axis=-1)
        )
        out = np.where(arr == 0.0, 0.0, out)
        return _maybe_scalar(out, u)

    def sample(self, rng, n):
        vals = np.array([a for a, _ in self._atoms()])
        probs = np.array([p for _, p in self._atoms()])
        idx = rng.choice(len(vals), size=n, p=probs)
        return vals[idx]

    def mean(self):
        return float(sum(a * p for a, p in self._atoms()))

    def var(self):
        m = self.mean()
        return float(sum(p * (a - m) ** 2 for a, p in self._atoms()))

    def upper_support(self):
        return float(max(a for a, _ in self._atoms()))

    def upper_quantile(self, q):
        return self.upper_support()

    def tail_prob(self, t):
        return float(sum(p for a, p in self._atoms() if a > t))

    def cdf(self, t):
        return float(sum(p for a, p in self._atoms() if a <= t))

    def log_partial_mgf_below(self, u, t):
        arr = _as_u(u)
        kept = [(a, p) for a, p in self._atoms() if a <= t]
        if not kept:
            out = np.full_like(arr, -np.inf)
            return _maybe_scalar(out, u)
        vals = np.array([a for a, _ in kept])
        probs = np.array([p for _, p in kept])
        expo = np.multiply.outer(arr, vals)
        shift = expo.max(axis=-1, keepdims=True)
        out = np.squeeze(shift, axis=-1) + np.log(
            np.sum(probs * np.exp(expo - shift), axis=-1)
        )
        return _maybe_scalar(out, u)

    def expectation(self, g):
        return float(sum(p * g(a) for a, p in self._atoms()))


@dataclass(frozen=True)
class Deterministic(_DiscreteSpec):
    """Degenerate innovation equal to the constant c."""

    c: float

    def _atoms(self):
        return [(self.c, 1.0)]

    def sample(self, rng, n):
        return np.full(n, self.c, dtype=float)

    def scale(self):
        return abs(self.c) if self.c != 0 else 1.0


@dataclass(frozen=True)
class TwoPoint(_DiscreteSpec):
    """Two-atom innovation: h_up with probability p, h_down otherwise."""

    h_up: float
    h_down: float
    p: float

    def __post_init__(self):
        if not 0.0 < self.p < 1.0:
            raise ValueError("TwoPoint requires p in (0, 1)")
        if not self.h_down < self.h_up:
            raise ValueError("TwoPoint requires h_down < h_up")

    def _atoms(self):
        return [(self.h_up, self.p), (self.h_down, 1.0 - self.p)]

    def sample(self, rng, n):
        return np.where(rng.random(n) < self.p, self.h_up, self.h_down)


@dataclass(frozen=True)
class StableSpectrallyNegative(InnovationSpec):
    """Totally negatively skewed stable innovation.

    The cumulant is psi(u) = m*u + sgn(alpha - 1) * C * u**alpha with C > 0
    and alpha in (0, 1) or (1, 2].  Sampling uses the Chambers-Mallows-Stuck
    construction for the mirrored one-sided-skew stable law; it is supported
    only for alpha in (1, 2] because for alpha < 1 the admissible state
    domain collapses to y <= m and the passage machinery does not apply.
    """

    alpha_stab: float
    c_scale: float
    m: float = 0.0

    def __post_init__(self):
        a = self.alpha_stab
        if not (0.0 < a <= 2.0) or a == 1.0:
            raise ValueError("alpha_stab must lie in (0,1) or (1,2]")
        if self.c_scale <= 0:
            raise ValueError("c_scale must be positive")

    def psi(self, u):
        arr = _as_u(u)
        sgn = 1.0 if self.alpha_stab > 1.0 else -1.0
        out = self.m * arr + sgn * self.c_scale * arr**self.alpha_stab
        return _maybe_scalar(out, u)

    def _sigma(self):
        a = self.alpha_stab
        return (self.c_scale * abs(math.cos(math.pi * a / 2.0))) ** (1.0 / a)

    def sample(self, rng, n):
        a = self.alpha_stab
        if not 1.0 < a <= 2.0:
            raise UnsupportedSamplerError(
                f"sampling is unsupported for alpha_stab={a}; need alpha in (1, 2]"
            )
        # eta = m - sigma * Z with Z standard totally-right-skewed stable (S1),
        # drawn by the Chambers-Mallows-Stuck transform of (uniform, exponential).
        v = math.pi * (rng.random(n) - 0.5)
        w = rng.exponential(1.0, size=n)
        if a == 2.0:
            z = 2.0 * np.sin(v) * np.sqrt(w)
        else:
            theta0 = math.atan(math.tan(math.pi * a / 2.0)) / a
            t1 = np.sin(a * (v + theta0)) / (
                math.cos(a * theta0) * np.cos(v)
            ) ** (1.0 / a)
            t2 = (np.cos(a * theta0 + (a - 1.0) * v) / w) ** ((1.0 - a) / a)
            z = t1 * t2
        return self.m - self._sigma() * z

    def mean(self):
        return self.m if self.alpha_stab > 1.0 else None

    def var(self):
        return 2.0 * self.c_scale if self.alpha_stab == 2.0 else None

    def scale(self):
        return self.c_scale ** (1.0 / self.alpha_stab)

    def _frozen(self):
        from scipy import stats

        return stats.levy_stable(self.alpha_stab, -1.0, loc=self.m, scale=self._sigma())

    def upper_quantile(self, q):
        return float(self._frozen().ppf(q))

    def tail_prob(self, t):
        return float(self._frozen().sf(t))

    def cdf(self, t):
        out = self._frozen().cdf(t)
        return float(out) if np.ndim(t) == 0 else out

    def pdf(self, x):
        return self._frozen().pdf(x)

    def log_partial_mgf_below(self, u, t):
        arr = np.atleast_1d(_as_u(u))
        frozen = self._frozen()
        out = np.empty_like(arr)
        for i, ui in enumerate(arr):
            val, _ = integrate.quad(
                lambda x: math.exp(ui * x) * frozen.pdf(x),
                -np.inf,
                t,
                limit=200,
            )
            out[i] = math.log(val) if val > 0 else -np.inf
        return _maybe_scalar(out[0] if np.ndim(u) == 0 else out, u)

    def expectation(self, g):
        frozen = self._frozen()
        lo, hi = frozen.ppf(1e-12), frozen.ppf(1.0 - 1e-12)
        val, _ = integrate.quad(lambda x: g(x) * frozen.pdf(x), lo, hi, limit=200)
        return float(val)


@dataclass(frozen=True)
class CappedAbove(InnovationSpec):
    """eta~ = min(eta, h_cap) for a continuous base family.

    Coupled sampling (same draws, then the cap) guarantees eta~ <= eta
    pathwise, which is what makes passage times of the capped process
    dominate those of the base process.
    """

    base: InnovationSpec
    h_cap: float

    def psi(self, u):
        arr = _as_u(u)
        tail = self.base.tail_prob(self.h_cap)
        log_below = np.atleast_1d(self.base.log_partial_mgf_below(arr, self.h_cap))
        if tail <= 0.0:
            out = np.atleast_1d(self.base.psi(arr))
        else:
            out = np.logaddexp(log_below, arr * self.h_cap + math.log(tail))
        out = np.where(np.atleast_1d(arr) == 0.0, 0.0, out)
        return _maybe_scalar(out[0] if np.ndim(u) == 0 else out, u)

    def sample(self, rng, n):
        return np.minimum(self.base.sample(rng, n), self.h_cap)

    def mean(self):
        return self._moment(1)

    def var(self):
        m = self._moment(1)
        return self._moment(2) - m * m

    def _moment(self, k):
        pdf = getattr(self.base, "pdf", None)
        if pdf is None:
            return None
        tail = self.base.tail_prob(self.h_cap)
        body, _ = integrate.quad(
            lambda x: x**k * pdf(x), -np.inf, self.h_cap, limit=200
        )
        return float(body + self.h_cap**k * tail)

    def scale(self):
        return self.base.scale()

    def upper_support(self):
        ub = self.base.upper_support()
        return self.h_cap if ub is None else min(ub, self.h_cap)

    def upper_quantile(self, q):
        return min(self.base.upper_quantile(q), self.h_cap)

    def tail_prob(self, t):
        return 0.0 if t >= self.h_cap else self.base.tail_prob(t)

    def cdf(self, t):
        return 1.0 if t >= self.h_cap else self.base.cdf(t)

    def log_partial_mgf_below(self, u, t):
        if t >= self.h_cap:
            return self.psi(u) if np.ndim(u) else self.psi(u)
        return self.base.log_partial_mgf_below(u, t)

    def expectation(self, g):
        pdf = getattr(self.base, "pdf", None)
        if pdf is None:
            return self.base.expectation(lambda e: g(np.minimum(e, self.h_cap)))
        tail = self.base.tail_prob(self.h_cap)
        body, _ = integrate.quad(
            lambda x: g(x) * pdf(x), -np.inf, self.h_cap, limit=200
        )
        return float(body + tail * g(self.h_cap))


@dataclass(frozen=True)
class FlooredPositive(InnovationSpec):
    """Zero out (0, n_cap) and collapse [n_cap, inf) to an atom at n_cap.

    The transformed variable is eta~ = eta on {eta <= 0}, 0 on
    {0 < eta < n_cap} and n_cap on {eta >= n_cap}; its support is
    (-inf, 0] united with {n_cap} and eta~ <= eta pathwise under coupled
    draws.  The positive atom mass p = P(eta >= n_cap) must be positive.
    """

    base: InnovationSpec
    n_cap: float

    def __post_init__(self):
        if self.n_cap <= 0:
            raise ValueError("n_cap must be positive")
        if self.atom_mass() <= 0.0:
            raise InfeasibleTruncationError(
                f"no innovation mass at or above n_cap={self.n_cap}"
            )

    def atom_mass(self) -> float:
        """p = P(eta >= n_cap) (equals P(eta > n_cap) for continuous bases)."""
        p = self.base.tail_prob(self.n_cap)
        atoms = self.base.atoms()
        if atoms is not None:
            p += sum(pr for a, pr in atoms if a == self.n_cap)
        return p

    def _pieces(self):
        p = self.atom_mass()
        q = max(1.0 - self.base.cdf(0.0) - p, 0.0)  # mass moved to the origin
        return p, q

    def psi(self, u):
        arr = _as_u(u)
        p, q = self._pieces()
        log_neg = np.atleast_1d(self.base.log_partial_mgf_below(arr, 0.0))
        a_term = np.exp(log_neg) + q
        out = np.atleast_1d(arr) * self.n_cap + np.log(
            p + a_term * np.exp(-np.atleast_1d(arr) * self.n_cap)
        )
        out = np.where(np.atleast_1d(arr) == 0.0, 0.0, out)
        return _maybe_scalar(out[0] if np.ndim(u) == 0 else out, u)

    def _transform(self, eta):
        return np.where(
            eta <= 0.0, eta, np.where(eta >= self.n_cap, self.n_cap, 0.0)
        )

    def sample(self, rng, n):
        return self._transform(self.base.sample(rng, n))

    def mean(self):
        p, _ = self._pieces()
        pdf = getattr(self.base, "pdf", None)
        if pdf is not None:
            neg, _ = integrate.quad(lambda x: x * pdf(x), -np.inf, 0.0, limit=200)
        else:
            atoms = self.base.atoms()
            if atoms is None:
                return None
            neg = sum(a * pr for a, pr in atoms if a <= 0)
        return float(neg + self.n_cap * p)

    def scale(self):
        return max(self.base.scale(), self.n_cap)

    def upper_support(self):
        return self.n_cap

    def upper_quantile(self, q):
        return self.n_cap

    def tail_prob(self, t):
        if t >= self.n_cap:
            return 0.0
        if t >= 0.0:
            return self.atom_mass()
        return self.base.tail_prob(t) - (1.0 - self.base.cdf(0.0)) + self.atom_mass()

    def cdf(self, t):
        return 1.0 - self.tail_prob(t)

    def log_partial_mgf_below(self, u, t):
        raise NotImplementedError("nested truncation of a floored family")

    def expectation(self, g):
        pdf = getattr(self.base, "pdf", None)
        if pdf is None:
            return self.base.expectation(lambda e: g(self._transform(e)))
        p, q = self._pieces()
        body, _ = integrate.quad(lambda x: g(x) * pdf(x), -np.inf, 0.0, limit=200)
        return float(body + q * g(0.0) + p * g(self.n_cap))


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------


def psi(spec: InnovationSpec, u):
    """Cumulant log E exp(u*eta) of one innovation; psi(0) = 0 exactly."""
    return spec.psi(u)


def sample(spec: InnovationSpec, rng: np.random.Generator, n: int) -> np.ndarray:
    """n i.i.d. draws; deterministic given the generator state."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return spec.sample(rng, n)


def truncate_cap_above(spec: InnovationSpec, h_cap: float) -> InnovationSpec:
    """Replace eta by min(eta, h_cap).

    Discrete families collapse to a new discrete family; continuous ones are
    wrapped, with the capped cumulant computed from the base partial MGF.
    """
    if not math.isfinite(h_cap):
        raise ValueError("h_cap must be finite")
    atoms = spec.atoms()
    if atoms is not None:
        merged: dict[float, float] = {}
        for a, p in atoms:
            key = min(a, h_cap)
            merged[key] = merged.get(key, 0.0) + p
        if len(merged) == 1:
            ((c, _),) = merged.items()
            return Deterministic(c)
        if len(merged) == 2:
            (a1, p1), (a2, _) = sorted(merged.items(), key=lambda kv: -kv[0])
            return TwoPoint(a1, a2, p1)
        raise NotImplementedError("capping a discrete family with > 2 atoms")
    ub = spec.upper_support()
    if ub is not None and ub <= h_cap:
        return spec
    return CappedAbove(spec, h_cap)


def truncate_floor_positive(spec: InnovationSpec, n_cap: float) -> InnovationSpec:
    """Map eta to eta*1{eta<=0} + n_cap*1{eta>=n_cap} (zero in between).

    Raises InfeasibleTruncationError when the base family has no mass at or
    above n_cap, since the resulting process could never move up.
    """
    atoms = spec.atoms()
    if atoms is not None:
        merged: dict[float, float] = {}
        for a, p in atoms:
            key = a if a <= 0 else (n_cap if a >= n_cap else 0.0)
            merged[key] = merged.get(key, 0.0) + p
        if n_cap not in merged:
            raise InfeasibleTruncationError(
                f"no innovation mass at or above n_cap={n_cap}"
            )
        if len(merged) == 1:
            return Deterministic(n_cap)
        if len(merged) == 2:
            (a1, p1), (a2, _) = sorted(merged.items(), key=lambda kv: -kv[0])
            return TwoPoint(a1, a2, p1)
        raise NotImplementedError("flooring a discrete family with > 2 atoms")
    return FlooredPositive(spec, n_cap)


def diagnostics(
    spec: InnovationSpec,
    rng: np.random.Generator,
    n: int = 10**5,
    delta: float = 0.5,
) -> TailDiagnostics:
    """Estimate E log(1+|eta|) and E (eta^-)**delta.

    Exact atom sums are substituted for discrete families; everything else is
    a plain Monte Carlo average over n draws (n >= 1e4).
    """
    if n < 10**4:
        raise ValueError("diagnostics needs n >= 1e4")
    if not 0.0 < delta <= 1.0:
        raise ValueError("delta must lie in (0, 1]")
    atoms = spec.atoms()
    if atoms is not None:
        log_moment = sum(p * math.log1p(abs(a)) for a, p in atoms)
        neg_moment = sum(p * max(-a, 0.0) ** delta for a, p in atoms)
    else:
        draws = spec.sample(rng, n)
        log_moment = float(np.mean(np.log1p(np.abs(draws))))
        neg_moment = float(np.mean(np.maximum(-draws, 0.0) ** delta))
    return TailDiagnostics(
        log_moment=float(log_moment),
        neg_moment_delta=(delta, float(neg_moment)),
        upper_bound=spec.upper_support(),
    )
