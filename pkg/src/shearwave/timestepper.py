"""Time integration: fixed-step RK4, an embedded 4(5) pair, and run().

Both formulations advance through the same machinery.  A scheme object
packs a state into a list of arrays, evaluates the right-hand side, and
measures the embedded error in the norm ||dm||_L2 + ||drho||_H1 (with
the natural flow-map analogue).  The vorticity alpha is never stepped:
it is copied bit for bit from the previous state.

run() drives either stepper to time T, records snapshots on a simulated
time cadence, and watches two breakdown monitors after every accepted
step: the slope criterion max|u_x| > max_ux (wave breaking happens iff
the slope blows up, so exceeding the threshold is reported as a detected
criterion, not as a fact about the PDE solution), and for flow-map runs
the mesh criterion min phi_x < 1e-3.  Under the adaptive stepper a
collapse of dt below dt_min is reported the same way.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .diagnostics import (
    DiagnosticsRecord,
    lemma_invariant,
    make_record,
    transported_density_invariant,
)
from .eulerian import EulerianState, rhs_m_form, rhs_u_form
from .lagrangian import LagrangianState, from_eulerian, spray_rhs, to_eulerian
from .model import ModelParams
from .spectral import (
    DiffeoMap,
    Field,
    InversionError,
    NonDiffeomorphismError,
    compose,
    derivative,
    helmholtz_apply,
    helmholtz_invert,
)

STATUS_COMPLETED = "completed"
STATUS_BLOWUP = "blowup_detected"
STATUS_MESH = "mesh_degenerate"

MESH_FLOOR = 1e-3
_TEPS = 1e-12


@dataclass
class StepControl:
    """Step size and tolerances for the steppers and monitors."""

    dt: float = 1e-3
    abs_tol: float = 1e-8
    rel_tol: float = 1e-8
    dt_min: float = 1e-12
    max_ux: float = 1e6

    def __post_init__(self):
        if not self.dt > 0.0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.abs_tol < 0.0 or self.rel_tol < 0.0:
            raise ValueError("tolerances must be nonnegative")
        if not self.dt_min > 0.0:
            raise ValueError(f"dt_min must be positive, got {self.dt_min}")


@dataclass(frozen=True)
class RunOutcome:
    status: str
    t_final: float
    trajectory: tuple
    diagnostics: tuple
    message: str = ""


# ---------------------------------------------------------------------------
# schemes: pack/unpack plus norms and monitors for each formulation


def _l2(grid, vals) -> float:
    return math.sqrt(grid.integrate(vals * vals))


def _h1(grid, f: Field) -> float:
    dv = derivative(f).values
    return math.sqrt(grid.integrate(f.values * f.values) + grid.integrate(dv * dv))


class _EulerianScheme:
    has_mesh = False

    def __init__(self, params: ModelParams, driver: str = "u_form"):
        if driver not in ("u_form", "m_form"):
            raise ValueError(f"driver must be u_form or m_form, got {driver!r}")
        self.params = params
        self.driver = driver

    def pack(self, state: EulerianState):
        return [state.m.values, state.rho.values]

    def unpack(self, vec, template: EulerianState) -> EulerianState:
        grid = template.m.grid
        return EulerianState(
            m=Field(grid, vec[0]), rho=Field(grid, vec[1]), alpha=template.alpha
        )

    def rhs(self, vec, template: EulerianState):
        return self._euler_slopes(self.unpack(vec, template))

    def _euler_slopes(self, state: EulerianState):
        if self.driver == "u_form":
            du, drho = rhs_u_form(
                state.velocity(), state.rho, state.alpha, self.params
            )
            dm = helmholtz_apply(du)
        else:
            dm, drho = rhs_m_form(state, self.params)
        return [dm.values, drho.values]

    def error_norm(self, grid, diff) -> float:
        return _l2(grid, diff[0]) + _h1(grid, Field(grid, diff[1]))

    def solution_scale(self, grid, vec) -> float:
        return _l2(grid, vec[0]) + _h1(grid, Field(grid, vec[1]))

    def max_ux(self, state: EulerianState) -> float:
        return float(np.max(np.abs(derivative(state.velocity()).values)))

    def min_mesh(self, state) -> Optional[float]:
        return None

    def eulerian_view(self, state: EulerianState) -> EulerianState:
        return state

    def lemma_field(self, state) -> Optional[Field]:
        return None


class _TrackedEulerianScheme(_EulerianScheme):
    """Eulerian driver that co-integrates the flow map phi_t = u o phi.

    The map is diagnostic only; it feeds the transport-invariant drift
    column and is subject to the same mesh-degeneracy monitor as a
    flow-map run.
    """

    has_mesh = True

    def pack(self, state):
        e_state, disp = state
        return [e_state.m.values, e_state.rho.values, disp.values]

    def unpack(self, vec, template):
        e_template, _ = template
        grid = e_template.m.grid
        e_state = EulerianState(
            m=Field(grid, vec[0]), rho=Field(grid, vec[1]), alpha=e_template.alpha
        )
        return (e_state, Field(grid, vec[2]))

    def rhs(self, vec, template):
        state, disp = self.unpack(vec, template)
        ddisp = compose(state.velocity(), DiffeoMap(disp))
        return self._euler_slopes(state) + [ddisp.values]

    def error_norm(self, grid, diff) -> float:
        return super().error_norm(grid, diff[:2]) + _l2(grid, diff[2])

    def solution_scale(self, grid, vec) -> float:
        return super().solution_scale(grid, vec[:2]) + _l2(grid, vec[2])

    def max_ux(self, state) -> float:
        return super().max_ux(state[0])

    def min_mesh(self, state) -> Optional[float]:
        _, disp = state
        return DiffeoMap(disp).min_deriv()

    def eulerian_view(self, state) -> EulerianState:
        return state[0]

    def lemma_field(self, state) -> Optional[Field]:
        e_state, disp = state
        return transported_density_invariant(
            e_state.rho, DiffeoMap(disp), self.params.a
        )


class _LagrangianScheme:
    has_mesh = True

    def __init__(self, params: ModelParams):
        self.params = params

    def pack(self, state: LagrangianState):
        return [
            state.phi.displacement.values,
            state.f.values,
            np.array([state.s]),
            state.v.values,
            state.sigma.values,
        ]

    def unpack(self, vec, template: LagrangianState) -> LagrangianState:
        grid = template.v.grid
        return LagrangianState(
            phi=DiffeoMap(Field(grid, vec[0])),
            f=Field(grid, vec[1]),
            s=float(vec[2][0]),
            v=Field(grid, vec[3]),
            sigma=Field(grid, vec[4]),
            alpha=template.alpha,
        )

    def rhs(self, vec, template: LagrangianState):
        state = self.unpack(vec, template)
        d = spray_rhs(state, self.params)
        return [
            d.dphi.values,
            d.df.values,
            np.array([d.ds]),
            d.dv.values,
            d.dsigma.values,
        ]

    def error_norm(self, grid, diff) -> float:
        dv = Field(grid, diff[3])
        return (
            _l2(grid, helmholtz_apply(dv).values)
            + _h1(grid, Field(grid, diff[4]))
            + _l2(grid, diff[0])
            + _l2(grid, diff[1])
            + abs(float(diff[2][0]))
        )

    def solution_scale(self, grid, vec) -> float:
        v = Field(grid, vec[3])
        return (
            _l2(grid, helmholtz_apply(v).values)
            + _h1(grid, Field(grid, vec[4]))
            + _l2(grid, vec[0])
            + _l2(grid, vec[1])
            + abs(float(vec[2][0]))
        )

    def max_ux(self, state: LagrangianState) -> float:
        # u_x o phi = v_x / phi_x shares its sup norm with u_x
        slope = derivative(state.v).values / state.phi.deriv_values
        return float(np.max(np.abs(slope)))

    def min_mesh(self, state: LagrangianState) -> Optional[float]:
        return state.phi.min_deriv()

    def eulerian_view(self, state: LagrangianState) -> EulerianState:
        return to_eulerian(state)

    def lemma_field(self, state: LagrangianState) -> Optional[Field]:
        return lemma_invariant(state, self.params.a)


def _make_scheme(initial, params, formulation, driver, track_flowmap):
    if formulation is None:
        formulation = "lagrangian" if isinstance(initial, LagrangianState) else "eulerian"
    if formulation == "eulerian":
        if not isinstance(initial, EulerianState):
            raise TypeError("eulerian run needs an EulerianState initial condition")
        if track_flowmap:
            return _TrackedEulerianScheme(params, driver), (
                initial,
                Field(initial.m.grid, np.zeros(initial.m.grid.n)),
            )
        return _EulerianScheme(params, driver), initial
    if formulation == "lagrangian":
        if isinstance(initial, EulerianState):
            initial = from_eulerian(initial)
        if not isinstance(initial, LagrangianState):
            raise TypeError("lagrangian run needs a LagrangianState initial condition")
        if track_flowmap:
            raise ValueError("track_flowmap applies to eulerian runs only")
        return _LagrangianScheme(params), initial
    raise ValueError(f"unknown formulation {formulation!r}")


# ---------------------------------------------------------------------------
# steppers on packed vectors


def _axpy(vec, s, k):
    return [y + s * ki for y, ki in zip(vec, k)]


def _rk4_vec(scheme, vec, template, dt):
    k1 = scheme.rhs(vec, template)
    k2 = scheme.rhs(_axpy(vec, 0.5 * dt, k1), template)
    k3 = scheme.rhs(_axpy(vec, 0.5 * dt, k2), template)
    k4 = scheme.rhs(_axpy(vec, dt, k3), template)
    return [
        y + (dt / 6.0) * (a + 2.0 * b + 2.0 * c + d)
        for y, a, b, c, d in zip(vec, k1, k2, k3, k4)
    ]


# Dormand-Prince 5(4): the fifth-order result propagates, the embedded
# fourth-order difference drives the step-size controller.
_DP_A = (
    (),
    (1.0 / 5.0,),
    (3.0 / 40.0, 9.0 / 40.0),
    (44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0),
    (19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0),
    (9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0),
    (35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0),
)
_DP_B5 = (35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0)
_DP_B4 = (
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
)
_DP_ERR = tuple(b5 - b4 for b5, b4 in zip(_DP_B5, _DP_B4))

_SAFETY = 0.9
_SHRINK = 0.2
_GROW = 5.0


def _dopri_vec(scheme, vec, template, dt):
    ks = [scheme.rhs(vec, template)]
    for row in _DP_A[1:]:
        stage = vec
        for a_ij, k in zip(row, ks):
            if a_ij != 0.0:
                stage = _axpy(stage, dt * a_ij, k)
        ks.append(scheme.rhs(stage, template))
    new = vec
    err = [np.zeros_like(y) for y in vec]
    for b, e, k in zip(_DP_B5, _DP_ERR, ks):
        if b != 0.0:
            new = _axpy(new, dt * b, k)
        if e != 0.0:
            err = _axpy(err, dt * e, k)
    return new, err


# ---------------------------------------------------------------------------
# public single-step entry points


def _scheme_for(state, params, driver):
    if isinstance(state, LagrangianState):
        return _LagrangianScheme(params)
    if isinstance(state, EulerianState):
        return _EulerianScheme(params, driver)
    raise TypeError(f"unsupported state type {type(state).__name__}")


def rk4_step(state, params: ModelParams, dt: float, driver: str = "u_form"):
    """One classical RK4 step; alpha is copied unchanged."""
    if not dt > 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    scheme = _scheme_for(state, params, driver)
    return scheme.unpack(_rk4_vec(scheme, scheme.pack(state), state, dt), state)


def adaptive_step(state, params: ModelParams, control: StepControl, driver: str = "u_form"):
    """One embedded 4(5) attempt.

    Returns (state, next_dt, accepted).  On rejection the state comes
    back unchanged.  next_dt may fall below control.dt_min; interpreting
    that as a blow-up suspicion is the caller's job (run() does).
    """
    scheme = _scheme_for(state, params, driver)
    grid = _grid_of(state)
    vec = scheme.pack(state)
    try:
        new_vec, err_vec = _dopri_vec(scheme, vec, state, control.dt)
    except (NonDiffeomorphismError, InversionError):
        return state, control.dt * _SHRINK, False
    err = scheme.error_norm(grid, err_vec)
    finite = math.isfinite(err) and all(np.all(np.isfinite(y)) for y in new_vec)
    tol = control.abs_tol + control.rel_tol * scheme.solution_scale(grid, vec)
    if not finite:
        return state, control.dt * _SHRINK, False
    if err <= tol:
        factor = _GROW if err == 0.0 else min(_GROW, max(_SHRINK, _SAFETY * (tol / err) ** 0.2))
        return scheme.unpack(new_vec, state), control.dt * factor, True
    factor = max(_SHRINK, _SAFETY * (tol / err) ** 0.2)
    return state, control.dt * factor, False


def _grid_of(state):
    if isinstance(state, LagrangianState):
        return state.v.grid
    if isinstance(state, EulerianState):
        return state.m.grid
    # tracked pair
    return state[0].m.grid


def eulerian_view(state) -> EulerianState:
    """Fixed-frame view of any trajectory state run() can produce."""
    if isinstance(state, EulerianState):
        return state
    if isinstance(state, LagrangianState):
        return to_eulerian(state)
    if isinstance(state, tuple) and len(state) == 2:
        return state[0]
    raise TypeError(f"unsupported state type {type(state).__name__}")


# ---------------------------------------------------------------------------
# the driver


def run(
    initial,
    params: ModelParams,
    T: float,
    control: Optional[StepControl] = None,
    formulation: Optional[str] = None,
    snapshot_every: float = 0.1,
    stepper: str = "rk4",
    driver: str = "u_form",
    track_flowmap: bool = False,
    h_orders=(0, 1, 2),
) -> RunOutcome:
    """Integrate to time T, recording snapshots and diagnostics.

    Snapshots are taken at t = 0, at the first accepted step past every
    multiple of snapshot_every, and at the final time.  Identical inputs
    give bit-identical outcomes: the integration is deterministic and
    seeds nothing.
    """
    if not T > 0.0:
        raise ValueError(f"T must be positive, got {T}")
    if not snapshot_every > 0.0:
        raise ValueError(f"snapshot_every must be positive, got {snapshot_every}")
    if stepper not in ("rk4", "adaptive"):
        raise ValueError(f"stepper must be rk4 or adaptive, got {stepper!r}")
    control = StepControl() if control is None else control
    scheme, state = _make_scheme(initial, params, formulation, driver, track_flowmap)
    grid = _grid_of(state)

    trajectory = []
    records = []
    lemma_ref = scheme.lemma_field(state)

    def observe(t, current):
        dev = None
        if lemma_ref is not None:
            dev = float(
                np.max(np.abs(scheme.lemma_field(current).values - lemma_ref.values))
            )
        rec = make_record(
            t,
            scheme.eulerian_view(current),
            params,
            max_ux=scheme.max_ux(current),
            lemma_deviation=dev,
            h_orders=h_orders,
        )
        trajectory.append((t, current))
        records.append(rec)

    observe(0.0, state)
    status = STATUS_COMPLETED
    message = ""
    t = 0.0
    next_snap = snapshot_every
    dt_next = control.dt

    while t < T - _TEPS:
        dt_step = min(control.dt if stepper == "rk4" else dt_next, T - t)
        if stepper == "rk4":
            try:
                vec = _rk4_vec(scheme, scheme.pack(state), state, dt_step)
                state = scheme.unpack(vec, state)
            except (NonDiffeomorphismError, InversionError) as exc:
                status = STATUS_MESH
                message = f"flow map degenerated during the step from t={t:.6f}: {exc}"
                break
            t += dt_step
        else:
            failure = None
            try:
                new_vec, err_vec = _dopri_vec(scheme, scheme.pack(state), state, dt_step)
            except (NonDiffeomorphismError, InversionError) as exc:
                failure = exc
                accepted = False
                dt_next = dt_step * _SHRINK
            else:
                err = scheme.error_norm(grid, err_vec)
                finite = math.isfinite(err) and all(
                    np.all(np.isfinite(y)) for y in new_vec
                )
                tol = control.abs_tol + control.rel_tol * scheme.solution_scale(
                    grid, scheme.pack(state)
                )
                accepted = finite and err <= tol
                if not finite:
                    dt_next = dt_step * _SHRINK
                elif err == 0.0:
                    dt_next = dt_step * _GROW
                else:
                    dt_next = dt_step * min(
                        _GROW, max(_SHRINK, _SAFETY * (tol / err) ** 0.2)
                    )
                if accepted:
                    state = scheme.unpack(new_vec, state)
                    t += dt_step
                    if dt_next < control.dt_min and t < T - _TEPS:
                        status = STATUS_BLOWUP
                        message = (
                            f"step size collapsed below dt_min={control.dt_min:g} at "
                            f"t={t:.6f}; slope criterion presumed exceeded"
                        )
                        break
            if not accepted:
                if dt_next < control.dt_min:
                    if failure is not None:
                        status = STATUS_MESH
                        message = (
                            f"step size collapsed below dt_min={control.dt_min:g} at "
                            f"t={t:.6f} while the flow map degenerated: {failure}"
                        )
                    else:
                        status = STATUS_BLOWUP
                        message = (
                            f"step size collapsed below dt_min={control.dt_min:g} at "
                            f"t={t:.6f}; slope criterion presumed exceeded"
                        )
                    break
                continue

        # monitors run after every accepted step
        mesh = scheme.min_mesh(state)
        if mesh is not None and mesh < MESH_FLOOR:
            status = STATUS_MESH
            message = f"mesh criterion crossed: min phi_x = {mesh:.3e} at t={t:.6f}"
            break
        slope = scheme.max_ux(state)
        if not math.isfinite(slope) or slope > control.max_ux:
            status = STATUS_BLOWUP
            message = (
                f"slope criterion exceeded: max |u_x| = {slope:.6e} > "
                f"{control.max_ux:g} at t={t:.6f}"
            )
            break
        if t >= next_snap - _TEPS and t < T - _TEPS:
            observe(t, state)
            while next_snap <= t + _TEPS:
                next_snap += snapshot_every

    if status == STATUS_COMPLETED:
        t = T
    if not trajectory or trajectory[-1][0] < t:
        try:
            observe(t, state)
        except (NonDiffeomorphismError, InversionError, FloatingPointError):
            pass  # the terminal state may be beyond diagnosing after a breakdown
    return RunOutcome(
        status=status,
        t_final=t,
        trajectory=tuple(trajectory),
        diagnostics=tuple(records),
        message=message,
    )
