"""Improper-integral engine for the martingale transform integrals.

All integrals here have the shape  int_0^inf h(u) * u**s du  with h decaying
(super)exponentially and an integrable algebraic singularity u**s, s > -1,
at the origin.  The engine splits at u = 1: the unit interval is handled by
adaptive quadrature after a power substitution that removes the singularity,
and the tail by adaptive panels on exponentially growing intervals, extended
until the integrand has died out or a hard ceiling u_max is reached.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

DEFAULT_REL_TOL = 1e-9
DEFAULT_ABS_TOL = 1e-12
DEFAULT_U_MAX = 1e5


@dataclass(frozen=True)
class QuadratureResult:
    """Value of an improper integral plus its reliability flags.

    tail_diagnostic is one of "decayed" (tail integrand fell below threshold),
    "truncated_at_umax" (ceiling reached with a still-visible integrand) or
    "diverged" (tail contributions growing; value is NaN).
    """

    value: float
    abs_err: float
    converged: bool
    tail_diagnostic: str


def improper_integral(
    f,
    singular_power: float = 0.0,
    rel_tol: float = DEFAULT_REL_TOL,
    abs_tol: float = DEFAULT_ABS_TOL,
    u_max: float = DEFAULT_U_MAX,
) -> QuadratureResult:
    """Integrate f over (0, inf).

    f must be a scalar function, finite on (0, u_max], with f(u) ~ c * u**s
    near 0 where s = singular_power > -1.  The singularity is removed by the
    substitution u = w**(1/(1+s)) before the adaptive pass on (0, 1].
    """
    if singular_power <= -1.0:
        raise ValueError("singular_power must exceed -1")
    eps_abs = 0.1 * abs_tol
    eps_rel = 0.1 * rel_tol

    # Unit interval, singularity removed.
    s = singular_power
    if s != 0.0:
        p = 1.0 / (1.0 + s)

        def g(w: float) -> float:
            if w <= 0.0:
                return 0.0
            u = w**p
            return f(u) * p * w ** (p - 1.0)

        head, head_err = integrate.quad(g, 0.0, 1.0, epsabs=eps_abs, epsrel=eps_rel, limit=200)
    else:
        head, head_err = integrate.quad(f, 0.0, 1.0, epsabs=eps_abs, epsrel=eps_rel, limit=200)

    total = head
    abs_err = head_err
    tail_diag = "decayed"
    # Exponentially growing panels [e^j, e^{j+1}] until the integrand dies.
    threshold = abs_tol * 1e-2
    lo = 1.0
    prev_panel = None
    panel = 0.0
    while lo < u_max:
        hi = min(lo * math.e, u_max)
        panel, panel_err = integrate.quad(
            f, lo, hi, epsabs=eps_abs, epsrel=eps_rel, limit=200
        )
        total += panel
        abs_err += panel_err
        edge = abs(f(hi))
        if edge < threshold and abs(panel) < max(threshold, rel_tol * abs(total)):
            # Remaining tail estimated by geometric extrapolation of panels.
            if prev_panel is not None and abs(prev_panel) > 0:
                r = min(abs(panel) / abs(prev_panel), 0.9)
                abs_err += abs(panel) * r / (1.0 - r)
            break
        prev_panel = panel
        lo = hi
    else:
        growing = prev_panel is not None and abs(panel) > abs(prev_panel)
        if growing or abs(f(u_max)) >= abs(f(u_max / math.e)):
            return QuadratureResult(
                value=float("nan"),
                abs_err=float("inf"),
                converged=False,
                tail_diagnostic="diverged",
            )
        tail_diag = "truncated_at_umax"
        # Bound the unseen tail by geometric decay of the last panels.
        if prev_panel is not None and abs(prev_panel) > 0:
            r = min(abs(panel) / abs(prev_panel), 0.99)
            abs_err += abs(panel) * r / (1.0 - r)

    converged = tail_diag == "decayed" and abs_err <= rel_tol * abs(total) + abs_tol
    return QuadratureResult(
        value=float(total),
        abs_err=float(abs_err),
        converged=bool(converged),
        tail_diagnostic=tail_diag,
    )


# ---------------------------------------------------------------------------
# Fixed Gauss-Legendre node sets (for empirical plug-ins and batch evaluation)
# ---------------------------------------------------------------------------


def panel_nodes(u_hi: float, n_per_panel: int = 32) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes/weights on [0, 0.5], [0.5, 1] and dyadic panels.

    Panels double in width from [1, 2] up to [u_hi/2, u_hi]; u_hi is rounded
    up to the next power of two.  Suitable for integrands that are smooth on
    (0, u_hi) and negligible beyond.
    """
    x, w = np.polynomial.legendre.leggauss(n_per_panel)
    edges = [0.0, 0.5, 1.0]
    hi = 1.0
    target = max(2.0, u_hi)
    while hi < target:
        hi *= 2.0
        edges.append(hi)
    nodes, weights = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        nodes.append(mid + half * x)
        weights.append(half * w)
    return np.concatenate(nodes), np.concatenate(weights)
