"""Conserved functionals, norms and run-health reports.

The quantities tracked per snapshot:

* the a = 2 metric energy  int u_x^2 + int (u - alpha/2)^2 + alpha^2/2
  + kappa int rho^2, conserved by the flow when a = 2 for any alpha and
  kappa;
* the mean of u, conserved for every member of the family;
* the Casimir  int rho^{1/(a-1)}, conserved whenever rho stays positive;
* min rho and max |u_x| (the breakdown monitor);
* squared Sobolev pairs  ||m||_{H^k}^2 + ||rho||_{H^{k+1}}^2;
* for flow-map runs, the sup-norm drift of sigma * phi_x^{a-1}, which is
  a pointwise invariant of the transport equation.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .eulerian import EulerianState
from .lagrangian import LagrangianState
from .model import ModelParams
from .spectral import TWO_PI, DiffeoMap, Field, compose, derivative


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    energy_a2: float
    mean_u: float
    casimir: Optional[float]
    min_rho: float
    max_ux: float
    h_norms: dict
    lemma_deviation: Optional[float] = None


def energy_a2(u: Field, rho: Field, alpha: float, kappa: float) -> float:
    """The a = 2 metric energy; a conservation law only at a = 2."""
    grid = u.grid
    ux = derivative(u).values
    return (
        grid.integrate(ux * ux)
        + grid.integrate((u.values - alpha / 2.0) ** 2)
        + alpha * alpha / 2.0
        + kappa * grid.integrate(rho.values * rho.values)
    )


def casimir(rho: Field, a: float) -> Optional[float]:
    """int rho^{1/(a-1)} dx, or None when rho is not strictly positive.

    The power is evaluated as exp(log(rho)/(a-1)) so a fractional
    exponent never sees a nonpositive base.
    """
    if a == 1.0:
        raise ValueError("the Casimir exponent is undefined at a = 1")
    vals = rho.values
    if float(np.min(vals)) <= 0.0:
        return None
    return rho.grid.integrate(np.exp(np.log(vals) / (a - 1.0)))


def mean_velocity(u: Field) -> float:
    return u.grid.integrate(u.values)


def sobolev_norm_pair(m: Field, rho: Field, k: int) -> float:
    """Squared pair norm ||m||_{H^k}^2 + ||rho||_{H^{k+1}}^2.

    Spectral weights (1 + j^2)^s with the L^2 normalization matching the
    integral over the period; meaningful up to the dealiasing cutoff.
    """
    return _h_sq(m, k) + _h_sq(rho, k + 1)


def _h_sq(f: Field, s: int) -> float:
    grid = f.grid
    w = (1.0 + grid.wavenumbers.astype(float) ** 2) ** s
    return float(np.sum(w * np.abs(f.coeffs) ** 2) * TWO_PI / grid.n**2)


def lemma_invariant(state: LagrangianState, a: float) -> Field:
    """sigma * phi_x^{a-1} at the nodes; constant in time along solutions."""
    phi = state.phi
    vals = state.sigma.values * phi.deriv_values ** (a - 1.0)
    return Field(phi.grid, vals)


def transported_density_invariant(rho: Field, phi: DiffeoMap, a: float) -> Field:
    """The same invariant built from Eulerian rho and a tracked flow map."""
    pulled = compose(rho, phi)
    return Field(phi.grid, pulled.values * phi.deriv_values ** (a - 1.0))


@dataclass(frozen=True)
class PositivityReport:
    applicable: bool
    preserved: bool
    first_violation_t: Optional[float]


def positivity_report(rho_trajectory) -> PositivityReport:
    """Scan (t, rho) snapshots for loss of strict positivity.

    Not applicable when the initial density vanishes identically.  An
    initial density that merely touches zero is reported as violated at
    the initial time.
    """
    pairs = [(float(t), rho) for t, rho in rho_trajectory]
    if not pairs:
        raise ValueError("empty trajectory")
    t0, rho0 = pairs[0]
    if not np.any(rho0.values):
        return PositivityReport(applicable=False, preserved=False, first_violation_t=None)
    for t, rho in pairs:
        if float(np.min(rho.values)) <= 0.0:
            return PositivityReport(applicable=True, preserved=False, first_violation_t=t)
    return PositivityReport(applicable=True, preserved=True, first_violation_t=None)


def make_record(
    t: float,
    state: EulerianState,
    params: ModelParams,
    max_ux: Optional[float] = None,
    lemma_deviation: Optional[float] = None,
    h_orders=(0, 1, 2),
) -> DiagnosticsRecord:
    """Assemble the per-snapshot record from an Eulerian view of the state."""
    u = state.velocity()
    rho = state.rho
    if max_ux is None:
        max_ux = float(np.max(np.abs(derivative(u).values)))
    return DiagnosticsRecord(
        t=t,
        energy_a2=energy_a2(u, rho, state.alpha, params.kappa),
        mean_u=mean_velocity(u),
        casimir=casimir(rho, params.a),
        min_rho=float(np.min(rho.values)),
        max_ux=max_ux,
        h_norms={k: sobolev_norm_pair(state.m, rho, k) for k in h_orders},
        lemma_deviation=lemma_deviation,
    )
