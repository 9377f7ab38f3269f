"""Fixed-step multirate closed-loop executor.

The plant integrates with classical RK4 at the fast rate while the controller
runs at an integer fraction of it under zero-order hold. Every control sample
appends one row to the result; the finished series is scored with tracking
metrics and a stability monitor. Runs are fully deterministic: the same
inputs always produce bit-identical series.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .controller import (
    ControllerParams,
    ReferencePoint,
    combined_error,
    control_law,
    equivalent_control,
    input_gain_b,
    model_coefficients,
)
from .fuzzy import DEFAULT_CENTERS, FuzzyEstimator, adapt, infer, membership
from .plant import (
    BlowUpError,
    PlantParams,
    PlantState,
    acceleration,
    dead_zone_d,
    plant_derivatives,
    sgn,
)

SUPPLY_MODES = ("constant", "varying")


@dataclass(frozen=True)
class Scenario:
    """One closed-loop experiment: rates, reference, supply mode, initial state."""

    duration: float = 120.0
    dt_plant: float = 1.0 / 800.0
    dt_control: float = 1.0 / 400.0
    amplitude: float = 0.5          # reference amplitude [m]
    omega: float = 0.1              # reference angular frequency [rad/s]
    supply_pressure_mode: str = "constant"
    initial_state: PlantState = field(default_factory=PlantState)
    freeze_adaptation: bool = False

    def __post_init__(self):
        for name in ("duration", "dt_plant", "dt_control", "amplitude", "omega"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite, got {getattr(self, name)}")
        if not self.duration > 0.0:
            raise ValueError(f"duration must be strictly positive, got {self.duration}")
        if not self.dt_plant > 0.0:
            raise ValueError(f"dt_plant must be strictly positive, got {self.dt_plant}")
        if not self.dt_control > 0.0:
            raise ValueError(f"dt_control must be strictly positive, got {self.dt_control}")
        n = round(self.dt_control / self.dt_plant)
        if n < 1 or abs(self.dt_control - n * self.dt_plant) > 1e-9 * self.dt_control:
            raise ValueError(
                f"dt_control ({self.dt_control}) must be an integer multiple of "
                f"dt_plant ({self.dt_plant})"
            )
        if self.supply_pressure_mode not in SUPPLY_MODES:
            raise ValueError(
                f"supply_pressure_mode must be one of {SUPPLY_MODES}, "
                f"got {self.supply_pressure_mode!r}"
            )
        s0 = self.initial_state
        if not (math.isfinite(s0.x) and math.isfinite(s0.v) and math.isfinite(s0.PL)):
            raise ValueError(f"initial_state must be finite, got {s0}")

    @property
    def substeps(self) -> int:
        """Plant integration steps per control period."""
        return round(self.dt_control / self.dt_plant)


@dataclass(frozen=True)
class MonitorParams:
    """Knobs of the stability monitor and of the metric windows."""

    window: float = 10.0            # RMS window length [s]
    tol: float = 1.05               # allowed window-to-window RMS growth factor
    transient_fraction: float = 0.25
    e_threshold: float = 0.1        # final-window mean |e| bound
    centers: tuple[float, ...] = DEFAULT_CENTERS


@dataclass(frozen=True)
class MonitorReport:
    """Violation counts emitted by the stability monitor."""

    n_windows: int
    window_rms: tuple[float, ...]
    rms_violations: int             # type (i): windowed RMS of e grew
    final_window_mean_abs_e: float
    e_threshold: float
    final_mean_ok: bool             # type (ii)
    sign_violations: int            # type (iii): d_hat sign against the active edge


@dataclass(frozen=True)
class SimMetrics:
    """Summary numbers over the standard quarters of the run."""

    rms_xerr_first_quarter: float
    rms_xerr_final_quarter: float
    max_abs_xerr_post_transient: float
    mean_dz_err_first_quarter: float
    mean_dz_err_final_quarter: float
    e2_decrease_fraction: float
    rms_violations: int


@dataclass
class SimResult:
    """Control-rate time series of one run plus its summary metrics."""

    t: np.ndarray
    x: np.ndarray
    xd: np.ndarray
    xerr: np.ndarray
    v: np.ndarray
    PL: np.ndarray
    u: np.ndarray
    uhat: np.ndarray
    d: np.ndarray
    dhat: np.ndarray
    e: np.ndarray
    Ps: np.ndarray
    dt_control: float
    metrics: SimMetrics
    monitor: MonitorReport


def reference_at(t: float, amplitude: float, omega: float) -> ReferencePoint:
    """Sinusoidal position reference and its first three derivatives at time t."""
    wt = omega * t
    s = math.sin(wt)
    c = math.cos(wt)
    return ReferencePoint(
        amplitude * s,
        amplitude * omega * c,
        -amplitude * omega * omega * s,
        -amplitude * omega * omega * omega * c,
    )


def supply_pressure(mode: str, x: float, ps_nominal: float) -> float:
    """Supply pressure [Pa]: fixed, or swinging +/-20% with piston position."""
    if mode == "constant":
        return ps_nominal
    if mode == "varying":
        return ps_nominal * (1.0 + 0.2 * math.sin(x))
    raise ValueError(f"unknown supply_pressure_mode: {mode!r}")


def rk4_step(s: PlantState, u: float, dt: float, p: PlantParams) -> PlantState:
    """One classical Runge-Kutta step with the control voltage held constant.

    The load pressure is clamped to [-Ps, Ps] afterwards; beyond that range
    the orifice model stops being physical.
    """
    if not dt > 0.0:
        raise ValueError(f"dt must be strictly positive, got {dt}")
    k1x, k1v, k1p = plant_derivatives(s, u, p)
    h = 0.5 * dt
    k2x, k2v, k2p = plant_derivatives(
        PlantState(s.x + h * k1x, s.v + h * k1v, s.PL + h * k1p), u, p
    )
    k3x, k3v, k3p = plant_derivatives(
        PlantState(s.x + h * k2x, s.v + h * k2v, s.PL + h * k2p), u, p
    )
    k4x, k4v, k4p = plant_derivatives(
        PlantState(s.x + dt * k3x, s.v + dt * k3v, s.PL + dt * k3p), u, p
    )
    w = dt / 6.0
    x = s.x + w * (k1x + 2.0 * (k2x + k3x) + k4x)
    v = s.v + w * (k1v + 2.0 * (k2v + k3v) + k4v)
    PL = s.PL + w * (k1p + 2.0 * (k2p + k3p) + k4p)
    if not (math.isfinite(x) and math.isfinite(v) and math.isfinite(PL)):
        raise BlowUpError(f"non-finite state after RK4 step: x={x}, v={v}, PL={PL}")
    if PL > p.Ps:
        PL = p.Ps
    elif PL < -p.Ps:
        PL = -p.Ps
    return PlantState(x, v, PL)


def run(
    scenario: Scenario,
    plant: PlantParams,
    cp: ControllerParams,
    est: FuzzyEstimator,
    monitor: MonitorParams | None = None,
) -> SimResult:
    """Execute one closed-loop scenario and score the resulting series.

    Per control period: read the state, build the tracking errors against the
    reference, compute the input gain with the previous sample's voltage sign,
    form the equivalent control, infer the dead-zone compensation, apply the
    control law, adapt the estimator, then hold the voltage over the RK4
    substeps. Raises BlowUpError (carrying the offending time) if the state
    leaves the finite range.
    """
    if monitor is None:
        monitor = MonitorParams(centers=est.centers)
    n_steps = int(round(scenario.duration / scenario.dt_control))
    n_sub = scenario.substeps
    dt_c = scenario.dt_control
    dt_p = scenario.dt_plant
    varying = scenario.supply_pressure_mode == "varying"
    frozen = scenario.freeze_adaptation

    a = model_coefficients(cp.model)
    s = scenario.initial_state
    sign_prev = 0.0
    rows = [[] for _ in range(12)]

    for k in range(n_steps):
        t = k * dt_c
        ps_now = supply_pressure(scenario.supply_pressure_mode, s.x, plant.Ps)

        x_ddot = acceleration(s, plant)
        ref = reference_at(t, scenario.amplitude, scenario.omega)
        xerr = s.x - ref.xd
        xerr_dot = s.v - ref.xd_dot
        xerr_ddot = x_ddot - ref.xd_ddot
        e = combined_error(xerr, xerr_dot, xerr_ddot, cp)
        b = input_gain_b(s.x, s.v, x_ddot, sign_prev, cp.model)
        u_hat = equivalent_control(s.x, s.v, x_ddot, ref, a, b, cp)
        if not math.isfinite(u_hat):
            raise BlowUpError(f"non-finite equivalent control at t={t:.6g} s", time=t)
        psi = membership(u_hat, est.centers)
        d_hat_val = 0.0 if frozen else infer(est, psi)
        u = control_law(u_hat, d_hat_val, e, cp)
        if not math.isfinite(u):
            raise BlowUpError(f"non-finite control voltage at t={t:.6g} s", time=t)

        for col, val in zip(
            rows,
            (t, s.x, ref.xd, xerr, s.v, s.PL, u, u_hat,
             dead_zone_d(u, plant), d_hat_val, e, ps_now),
        ):
            col.append(val)

        if not frozen:
            est = adapt(est, e, psi, cp.phi, dt_c)
        sign_prev = sgn(u)

        try:
            for _ in range(n_sub):
                p_now = plant
                if varying:
                    p_now = replace(
                        plant, Ps=supply_pressure("varying", s.x, plant.Ps)
                    )
                s = rk4_step(s, u, dt_p, p_now)
        except BlowUpError as err:
            raise BlowUpError(
                f"{err} (control period starting at t={t:.6g} s)", time=t
            ) from None

    arrays = [np.asarray(col, dtype=float) for col in rows]
    metrics_input = dict(
        zip(("t", "x", "xd", "xerr", "v", "PL", "u", "uhat", "d", "dhat", "e", "Ps"), arrays)
    )
    report = _monitor_series(
        metrics_input["e"], metrics_input["uhat"], metrics_input["dhat"], dt_c, monitor
    )
    metrics = _compute_metrics(
        metrics_input["xerr"], metrics_input["d"], metrics_input["dhat"],
        metrics_input["e"], monitor.transient_fraction, report.rms_violations,
    )
    return SimResult(**metrics_input, dt_control=dt_c, metrics=metrics, monitor=report)


def stability_monitor(result: SimResult, params: MonitorParams | None = None) -> MonitorReport:
    """Score a completed run against the expected closed-loop behavior.

    Checks, after the transient: (i) the windowed RMS of the combined error
    does not grow from one window to the next beyond the tolerance factor,
    (ii) the final-window mean |e| sits below the configured threshold, and
    (iii) in the final window the compensation estimate has the sign of the
    active dead-zone edge whenever the equivalent control is clearly outside
    the innermost membership centers. Emits counts, never raises.
    """
    if params is None:
        params = MonitorParams()
    return _monitor_series(result.e, result.uhat, result.dhat, result.dt_control, params)


def _monitor_series(
    e: np.ndarray,
    uhat: np.ndarray,
    dhat: np.ndarray,
    dt_control: float,
    params: MonitorParams,
) -> MonitorReport:
    n = len(e)
    i0 = int(round(params.transient_fraction * n))
    w_n = max(1, int(round(params.window / dt_control)))

    window_rms: list[float] = []
    start = i0
    while start + w_n <= n:
        seg = e[start:start + w_n]
        window_rms.append(float(np.sqrt(np.mean(seg * seg))))
        start += w_n
    rms_violations = sum(
        1 for lo, hi in zip(window_rms, window_rms[1:]) if hi > params.tol * lo
    )

    if window_rms:
        final_start = i0 + (len(window_rms) - 1) * w_n
        final = slice(final_start, final_start + w_n)
    else:
        final = slice(i0, n) if i0 < n else slice(0, n)
    final_mean = float(np.mean(np.abs(e[final]))) if e[final].size else 0.0

    pos_inner = min((c for c in params.centers if c > 0.0), default=None)
    neg_inner = max((c for c in params.centers if c < 0.0), default=None)
    sign_violations = 0
    uh = uhat[final]
    dh = dhat[final]
    if pos_inner is not None:
        sign_violations += int(np.sum((uh > pos_inner) & (dh <= 0.0)))
    if neg_inner is not None:
        sign_violations += int(np.sum((uh < neg_inner) & (dh >= 0.0)))

    return MonitorReport(
        n_windows=len(window_rms),
        window_rms=tuple(window_rms),
        rms_violations=rms_violations,
        final_window_mean_abs_e=final_mean,
        e_threshold=params.e_threshold,
        final_mean_ok=final_mean <= params.e_threshold,
        sign_violations=sign_violations,
    )


def _compute_metrics(
    xerr: np.ndarray,
    d: np.ndarray,
    dhat: np.ndarray,
    e: np.ndarray,
    transient_fraction: float,
    rms_violations: int,
) -> SimMetrics:
    n = len(xerr)
    q = n // 4
    i0 = int(round(transient_fraction * n))

    def _rms(seg: np.ndarray) -> float:
        return float(np.sqrt(np.mean(seg * seg))) if seg.size else 0.0

    dz_err = np.abs(dhat - d)
    post = xerr[i0:]
    e2 = e * e
    post_e2 = e2[i0:]
    if post_e2.size > 1:
        decrease = float(np.mean(post_e2[1:] <= post_e2[:-1]))
    else:
        decrease = 1.0
    return SimMetrics(
        rms_xerr_first_quarter=_rms(xerr[:q]),
        rms_xerr_final_quarter=_rms(xerr[n - q:]),
        max_abs_xerr_post_transient=float(np.max(np.abs(post))) if post.size else 0.0,
        mean_dz_err_first_quarter=float(np.mean(dz_err[:q])) if q else 0.0,
        mean_dz_err_final_quarter=float(np.mean(dz_err[n - q:])) if q else 0.0,
        e2_decrease_fraction=decrease,
        rms_violations=rms_violations,
    )
