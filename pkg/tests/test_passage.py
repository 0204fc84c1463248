"""Passage problems: feasibility, expectation identity, bounds, certificates."""

import math

import numpy as np
import pytest

from ar1fpt import (
    CertificateInfeasibleError,
    CoverageError,
    Deterministic,
    Gaussian,
    InfeasibleTruncationError,
    NoCrossingError,
    PassageProblem,
    TwoPoint,
    crossing_mass,
    exponential_certificate,
    feasibility_report,
    identity_e_tau,
    identity_nodes,
    lower_bound_e_tau,
    simulate_passage,
    upper_bound_e_tau,
)

DET = PassageProblem(lam=0.5, x=0.0, a=1.5, spec=Deterministic(1.0))
GAUSS = PassageProblem(lam=0.5, x=0.0, a=1.0, spec=Gaussian(0.0, 1.0))


def test_problem_validation():
    with pytest.raises(ValueError):
        PassageProblem(lam=1.2, x=0.0, a=1.0, spec=Gaussian(0, 1))
    with pytest.raises(ValueError):
        PassageProblem(lam=0.5, x=2.0, a=1.0, spec=Gaussian(0, 1))


def test_crossing_mass_values():
    assert crossing_mass(DET) == 1.0  # eta = 1 > a(1-lam) = 0.75
    assert math.isclose(crossing_mass(GAUSS), 1.0 - 0.6914624612740131, rel_tol=1e-9)


def test_feasibility_reachable():
    rep = feasibility_report(DET)
    assert not rep.certain_infinite and rep.crossing_possible and rep.finite_mean
    assert rep.sup_bound == 2.0


def test_feasibility_certain_infinite():
    p = PassageProblem(lam=0.5, x=0.0, a=3.0, spec=Deterministic(1.0))
    rep = feasibility_report(p)
    assert rep.certain_infinite and not rep.crossing_possible
    assert rep.crossing_mass == 0.0


def test_feasibility_unbounded_family_never_certain_infinite():
    p = PassageProblem(lam=0.5, x=0.0, a=50.0, spec=Gaussian(0, 1))
    rep = feasibility_report(p)
    assert not rep.certain_infinite and rep.crossing_possible
    assert rep.sup_bound is None


# -- expectation identity ----------------------------------------------------


def test_deterministic_identity_exact():
    lc = DET.limit_cumulant()
    nodes = identity_nodes(DET, lc)
    sim = simulate_passage(DET, n_paths=512, max_steps=50, seed=0, mgf_u_nodes=nodes.u)
    assert sim.e_tau_hat == 3.0 and sim.e_tau_std_err == 0.0
    value, std_err = identity_e_tau(
        DET, sim.mgf_u, sim.mgf_value, sim.mgf_std_err, nodes, lc
    )
    assert abs(value - 3.0) < 1e-8
    assert std_err < 1e-6


def test_identity_rejects_foreign_nodes():
    lc = DET.limit_cumulant()
    nodes = identity_nodes(DET, lc)
    u = np.linspace(0.01, 5.0, 40)
    with pytest.raises(CoverageError):
        identity_e_tau(DET, u, np.ones_like(u), np.zeros_like(u), nodes, lc)


def test_identity_nodes_deterministic_envelope_is_hard():
    nodes = identity_nodes(DET, DET.limit_cumulant())
    assert nodes.env_is_hard and nodes.y_env == 1.75  # lam*a + ess-sup
    gn = identity_nodes(GAUSS, GAUSS.limit_cumulant())
    assert not gn.env_is_hard


# -- bounds ------------------------------------------------------------------


def test_bound_sandwich_deterministic():
    lower = lower_bound_e_tau(DET)
    upper = upper_bound_e_tau(DET, h_cap=4.0)
    assert lower <= 3.0 <= upper + 1e-9
    assert math.isclose(lower, 2.0, rel_tol=1e-9)  # H(1.5) - H(0) = log2(4)
    assert math.isclose(upper, 3.0, rel_tol=1e-8)  # cap truncates to ess-sup


def test_bound_sandwich_two_point():
    p = PassageProblem(lam=0.5, x=0.0, a=1.0, spec=TwoPoint(1.0, -1.0, 0.5))
    sim = simulate_passage(p, n_paths=50_000, max_steps=10**5, seed=13)
    lower = lower_bound_e_tau(p)
    upper = upper_bound_e_tau(p, h_cap=4.0)
    slack = 3 * sim.e_tau_std_err
    assert lower <= sim.e_tau_hat + slack
    assert sim.e_tau_hat - slack <= upper


def test_upper_bound_infeasible_cap():
    # effective cap at/below a(1-lam) leaves no room to cross
    with pytest.raises(InfeasibleTruncationError):
        upper_bound_e_tau(DET, h_cap=0.75)


def test_lower_bound_nonnegative():
    p = PassageProblem(lam=0.5, x=0.0, a=0.0, spec=Gaussian(0, 1))
    assert lower_bound_e_tau(p) >= 0.0


# -- exponential certificate -------------------------------------------------


def test_certificate_structure_and_validity():
    cert = exponential_certificate(GAUSS)
    assert cert.alpha > 0 and cert.c_bound > 0
    assert math.isclose(cert.alpha, -cert.v_star * math.log(1.0 / 0.5), rel_tol=1e-12)
    assert cert.n_cap_used > GAUSS.a * (1.0 - GAUSS.lam)
    bound = cert.survival_bound(np.array([0, 10, 100]))
    assert np.all(np.diff(bound) < 0)


def test_certificate_dominates_survival_curve():
    cert = exponential_certificate(GAUSS)
    sim = simulate_passage(GAUSS, n_paths=100_000, max_steps=10**4, seed=77)
    allowance = 2.326 * np.sqrt(
        np.maximum(sim.survival_p * (1 - sim.survival_p), 1e-12) / sim.n_paths
    )
    assert np.all(sim.survival_p <= cert.survival_bound(sim.survival_n) + allowance)


def test_certificate_no_crossing():
    p = PassageProblem(lam=0.5, x=0.0, a=3.0, spec=TwoPoint(1.0, -1.0, 0.5))
    with pytest.raises(NoCrossingError):
        exponential_certificate(p)
