"""Single-excitation time evolution i du/dt = H u with overflow-safe rescaling.

Amplifying regimes grow the state norm pseudo-exponentially over hundreds of
decades, so amplitudes are stored together with an accumulated log factor:
physical amplitude = exp(log_scale) * stored amplitude.  Whenever the stored
2-norm leaves [1/threshold, threshold] the vector is renormalized and the
log absorbed into log_scale; for the linear equation of motion this is an
exact change of representation.

Two integrators are provided:

* an adaptive embedded Dormand-Prince 5(4) pair (default) that steps exactly
  onto every requested sample time, and
* a fixed-step classical RK4 for bit-reproducible runs, with cubic-Hermite
  interpolation onto sample times that fall between grid points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import IntegrationError, SpecError
from .model import Boundary, HamiltonianOperator, SystemSpec

__all__ = [
    "StateVector",
    "IntegratorConfig",
    "Trajectory",
    "ObservableSeries",
    "initial_state",
    "evolve",
    "light_cone_guard",
    "gauge_transform",
    "extract_observables",
    "uniform_times",
]


@dataclass(frozen=True)
class StateVector:
    """Complex amplitudes (lattice sites first, then emitters) plus the
    accumulated natural-log scale factor."""

    amplitudes: np.ndarray
    log_scale: float = 0.0
    n_sites: int = 0

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        object.__setattr__(self, "amplitudes", amps)
        if not np.all(np.isfinite(amps.view(float))):
            raise SpecError("state amplitudes must be finite")

    @property
    def stored_norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def uniform_times(t_max: float, samples: int = 2000) -> np.ndarray:
    return np.linspace(0.0, float(t_max), int(samples))


@dataclass(frozen=True)
class IntegratorConfig:
    """Integration controls.

    method "rk45" is the adaptive pair (rtol/atol); "rk4" is fixed step (dt).
    ``sample_times`` must increase strictly and start at 0.
    """

    sample_times: np.ndarray
    method: str = "rk45"
    dt: float | None = None
    rtol: float = 1e-9
    atol: float = 1e-12
    rescale_threshold: float = math.exp(50.0)
    step_safety: float = 0.85

    def __post_init__(self):
        times = np.asarray(self.sample_times, dtype=float)
        object.__setattr__(self, "sample_times", times)
        if times.ndim != 1 or times.size < 1:
            raise SpecError("sample_times must be a non-empty 1-D grid")
        if times[0] != 0.0:
            raise SpecError("sample_times must start at 0")
        if times.size > 1 and not np.all(np.diff(times) > 0):
            raise SpecError("sample_times must be strictly increasing")
        if self.method not in ("rk45", "rk4"):
            raise SpecError(f"unknown integrator method {self.method!r}")
        if self.method == "rk4":
            if self.dt is None or self.dt <= 0:
                raise SpecError("fixed-step method needs dt > 0")
        else:
            if self.rtol <= 0 or self.atol <= 0:
                raise SpecError("adaptive method needs rtol > 0 and atol > 0")
        if self.rescale_threshold <= 1.0:
            raise SpecError("rescale_threshold must exceed 1")


@dataclass(frozen=True)
class Trajectory:
    """Sampled evolution: stored emitter amplitudes plus the scale bookkeeping
    needed to reconstruct physical observables."""

    times: np.ndarray
    labels: tuple[str, ...]
    emitter_amplitudes: np.ndarray  # (samples, E) stored (unscaled) values
    log_scale: np.ndarray  # (samples,)
    stored_norm: np.ndarray  # (samples,)
    field_intensities: np.ndarray | None = None  # (samples, M) stored |u_a,n|^2
    states: np.ndarray | None = None  # (samples, M+E) stored amplitudes
    warnings: tuple[str, ...] = ()


@dataclass(frozen=True)
class ObservableSeries:
    times: np.ndarray
    kind: str
    labels: tuple
    linear: np.ndarray
    log10: np.ndarray
    linear_ok: bool


def initial_state(spec: SystemSpec, excited: str) -> StateVector:
    """Unit excitation on one emitter, everything else empty."""
    labels = spec.labels
    if excited not in labels:
        raise SpecError(f"unknown emitter label {excited!r} (have {list(labels)})")
    n = spec.lattice.m + spec.n_emitters
    amps = np.zeros(n, dtype=complex)
    amps[spec.lattice.m + labels.index(excited)] = 1.0
    return StateVector(amplitudes=amps, log_scale=0.0, n_sites=spec.lattice.m)


def light_cone_guard(spec: SystemSpec, t_max: float) -> str | None:
    """Warn when ballistic spreading may reach a lattice edge.

    The bound 2*max(|t_R|, |t_L|)*t_max is compared against the smallest
    distance from any coupling point to an open boundary.  PBC rings have no
    edges, so no warning is issued there.
    """
    if t_max <= 0 or spec.n_emitters == 0:
        return None
    if spec.lattice.boundary is Boundary.PBC:
        return None
    m = spec.lattice.m
    dist = min(
        min(site, m - 1 - site) for e in spec.emitters for site in e.sites
    )
    reach = 2.0 * max(abs(spec.lattice.t_r), abs(spec.lattice.t_l)) * t_max
    if reach >= dist:
        return (
            f"light-cone guard: 2*max(|t_R|,|t_L|)*t_max = {reach:.4g} reaches the "
            f"nearest edge distance {dist}; boundary effects may contaminate the run"
        )
    return None


def gauge_transform(state: StateVector, beta: float) -> StateVector:
    """Imaginary gauge transform: lattice amplitude at site n is multiplied by
    beta**(-n); emitter amplitudes and log_scale are untouched."""
    if beta <= 0:
        raise SpecError(f"beta must be positive, got {beta}")
    amps = state.amplitudes.copy()
    m = state.n_sites
    amps[:m] = amps[:m] * float(beta) ** (-np.arange(m, dtype=float))
    return StateVector(amplitudes=amps, log_scale=state.log_scale, n_sites=m)


# Dormand-Prince 5(4) tableau.  The equation of motion is linear and
# autonomous, so an RK step reduces to a polynomial in (h*A) applied to y:
# the solution polynomial has coefficients b^T A_butcher^{j-1} 1 (the
# classical 1/j! up to order five plus the 1/600 z^6 stage term) and the
# error estimator uses (b5 - b4)^T A_butcher^{j-1} 1.  Each step then costs
# six sparse matvecs; a rejected step reuses them all.
_DP_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_B4 = np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)


def _tableau_power_coefficients():
    a = np.zeros((7, 7))
    a[1, 0] = 1 / 5
    a[2, :2] = [3 / 40, 9 / 40]
    a[3, :3] = [44 / 45, -56 / 15, 32 / 9]
    a[4, :4] = [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]
    a[5, :5] = [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]
    a[6, :6] = _DP_B5[:6]
    vec = np.ones(7)
    sol = np.empty(7)
    err = np.empty(7)
    for j in range(7):
        sol[j] = _DP_B5 @ vec
        err[j] = (_DP_B5 - _DP_B4) @ vec
        vec = a @ vec
    return sol[:6], err  # z^6 solution coefficient is zero beyond six terms


_DP_SOL_POW, _DP_ERR_POW = _tableau_power_coefficients()
_RK4_POW = np.array([1.0, 1 / 2, 1 / 6, 1 / 24])


class _Recorder:
    def __init__(self, h, n_samples, record_fields, record_states):
        e = h.n_emitters
        self.m = h.m
        self.emitter_amps = np.zeros((n_samples, e), dtype=complex)
        self.log_scale = np.zeros(n_samples)
        self.stored_norm = np.zeros(n_samples)
        self.fields = np.zeros((n_samples, h.m)) if record_fields else None
        self.states = (
            np.zeros((n_samples, h.dimension), dtype=complex) if record_states else None
        )
        self.i = 0

    def take(self, y, log_scale):
        i = self.i
        self.emitter_amps[i] = y[self.m :]
        self.log_scale[i] = log_scale
        self.stored_norm[i] = np.linalg.norm(y)
        if self.fields is not None:
            self.fields[i] = np.abs(y[: self.m]) ** 2
        if self.states is not None:
            self.states[i] = y
        self.i += 1


def evolve(
    h: HamiltonianOperator,
    state0: StateVector,
    cfg: IntegratorConfig,
    record_fields: bool = False,
    record_states: bool = False,
) -> Trajectory:
    """Integrate i du/dt = H u over cfg.sample_times.

    Deterministic for a fixed configuration.  The stored vector is rescaled
    whenever its norm leaves [1/threshold, threshold]; the physical
    trajectory exp(log_scale)*u is unaffected.  Non-finite amplitudes abort
    with the last good time in the exception.
    """
    if state0.amplitudes.size != h.dimension:
        raise SpecError(
            f"state dimension {state0.amplitudes.size} != operator dimension {h.dimension}"
        )
    times = cfg.sample_times
    warnings: list[str] = []
    guard = light_cone_guard(h.spec, float(times[-1]))
    if guard:
        warnings.append(guard)

    rec = _Recorder(h, times.size, record_fields, record_states)
    if cfg.method == "rk4":
        log_scale = _run_rk4(h, state0, cfg, times, rec)
    else:
        log_scale = _run_dp54(h, state0, cfg, times, rec)

    return Trajectory(
        times=times.copy(),
        labels=h.labels,
        emitter_amplitudes=rec.emitter_amps,
        log_scale=rec.log_scale,
        stored_norm=rec.stored_norm,
        field_intensities=rec.fields,
        states=rec.states,
        warnings=tuple(warnings),
    )


def _run_dp54(h, state0, cfg, times, rec):
    a_op = (-1j) * h.to_sparse()  # generator of du/dt = A u
    y = state0.amplitudes.astype(complex)
    log_scale = float(state0.log_scale)
    t = float(times[0])
    rec.take(y, log_scale)

    t_end = float(times[-1])
    if t >= t_end:
        return log_scale

    n = y.size
    v = np.empty((8, n), dtype=complex)  # v[j] = A^j y for j = 1..7
    v[1] = a_op.dot(y)

    # Initial step: standard two-probe heuristic on y and f = A y.
    sc = cfg.atol + cfg.rtol * np.abs(y)
    d0 = _rms(y / sc)
    d1 = _rms(v[1] / sc)
    h0 = 1e-6 if d1 == 0 else 0.01 * d0 / d1
    d2 = _rms((a_op.dot(y + h0 * v[1]) - v[1]) / sc) / h0
    dmax = max(d1, d2)
    h1 = (0.01 / dmax) ** 0.2 if dmax > 0 else h0 * 10
    step = min(100 * h0, h1, t_end - t)

    next_sample = 1
    min_step_floor = 1e-14 * max(t_end, 1.0)
    powers_fresh = False
    while next_sample < times.size:
        t_target = float(times[next_sample])
        hit_target = False
        if t + step >= t_target:
            step = t_target - t
            hit_target = True

        if not powers_fresh:
            for j in range(1, 7):
                v[j + 1] = a_op.dot(v[j])
            powers_fresh = True
        hp = step ** np.arange(1.0, 8.0)
        y_new = y + (_DP_SOL_POW * hp[:6]) @ v[1:7]
        err_vec = (_DP_ERR_POW * hp) @ v[1:8]
        sc = cfg.atol + cfg.rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = _rms(err_vec / sc)

        if math.isnan(err) or math.isinf(err):
            step *= 0.1
            if step < min_step_floor:
                raise IntegrationError("non-finite error estimate", t)
            continue
        if err <= 1.0:
            t = t_target if hit_target else t + step
            f_new = v[1] + (_DP_SOL_POW * hp[:6]) @ v[2:8]
            y = y_new
            v[1] = f_new
            powers_fresh = False
            if not np.all(np.isfinite(y.view(float))):
                raise IntegrationError("amplitudes became non-finite", t)
            nrm = np.linalg.norm(y)
            if not math.isfinite(nrm):
                raise IntegrationError("state norm overflow", t)
            if nrm > cfg.rescale_threshold or (0.0 < nrm < 1.0 / cfg.rescale_threshold):
                y = y / nrm
                v[1] = v[1] / nrm
                log_scale += math.log(nrm)
            if hit_target:
                rec.take(y, log_scale)
                next_sample += 1
            factor = min(5.0, max(0.2, cfg.step_safety * err ** -0.2 if err > 0 else 5.0))
        else:
            factor = max(0.2, cfg.step_safety * err ** -0.2)
        step = step * factor
        if step < min_step_floor:
            raise IntegrationError("step size underflow", t)
    return log_scale


def _run_rk4(h, state0, cfg, times, rec):
    a_op = (-1j) * h.to_sparse()
    y = state0.amplitudes.astype(complex)
    log_scale = float(state0.log_scale)
    dt = float(cfg.dt)
    rec.take(y, log_scale)
    t_end = float(times[-1])
    if times[0] >= t_end:
        return log_scale

    n_steps = int(math.ceil(t_end / dt - 1e-12))
    n = y.size
    v = np.empty((5, n), dtype=complex)
    v[1] = a_op.dot(y)
    next_sample = 1
    t0 = 0.0
    for step_idx in range(n_steps):
        t1 = min((step_idx + 1) * dt, t_end)
        hh = t1 - t0
        for j in range(1, 4):
            v[j + 1] = a_op.dot(v[j])
        hp = hh ** np.arange(1.0, 5.0)
        y1 = y + (_RK4_POW * hp) @ v[1:5]
        if not np.all(np.isfinite(y1.view(float))):
            raise IntegrationError("amplitudes became non-finite", t0)
        f1 = a_op.dot(y1)

        # Emit samples inside (t0, t1] via cubic Hermite interpolation.
        while next_sample < times.size and times[next_sample] <= t1 + 1e-12 * t_end:
            ts = float(times[next_sample])
            if abs(ts - t1) <= 1e-12 * max(t_end, 1.0):
                rec.take(y1, log_scale)
            else:
                theta = (ts - t0) / hh
                ys = _hermite(theta, hh, y, v[1], y1, f1)
                rec.take(ys, log_scale)
            next_sample += 1

        y, t0 = y1, t1
        v[1] = f1
        nrm = np.linalg.norm(y)
        if not math.isfinite(nrm):
            raise IntegrationError("state norm overflow", t0)
        if nrm > cfg.rescale_threshold or (0.0 < nrm < 1.0 / cfg.rescale_threshold):
            y = y / nrm
            v[1] = v[1] / nrm
            log_scale += math.log(nrm)
    return log_scale


def _hermite(theta, hh, y0, f0, y1, f1):
    t2 = theta * theta
    t3 = t2 * theta
    h00 = 2 * t3 - 3 * t2 + 1
    h10 = t3 - 2 * t2 + theta
    h01 = -2 * t3 + 3 * t2
    h11 = t3 - t2
    return h00 * y0 + (h10 * hh) * f0 + h01 * y1 + (h11 * hh) * f1


def _rms(v):
    return float(np.sqrt(np.mean(np.abs(v) ** 2)))


_LOG10_MAX = math.log10(np.finfo(float).max) - 1.0  # keep a decade of headroom


def extract_observables(traj: Trajectory, kind: str = "population") -> ObservableSeries:
    """Physical observables from stored amplitudes: value = e^{2L} |u|^2.

    kind "population" gives per-emitter mean particle numbers, "intensity"
    per-site field intensities (requires the run to have recorded fields).
    The log10 series is always returned; linear values overflowing float64
    are set to +inf and flagged via ``linear_ok``.
    """
    if kind == "population":
        if traj.emitter_amplitudes.shape[1] == 0:
            raise SpecError("trajectory has no emitters to report populations for")
        stored = np.abs(traj.emitter_amplitudes) ** 2
        labels = traj.labels
    elif kind == "intensity":
        if traj.field_intensities is None:
            raise SpecError("field intensities were not recorded for this trajectory")
        stored = traj.field_intensities
        labels = tuple(range(stored.shape[1]))
    else:
        raise SpecError(f"unknown observable kind {kind!r}")

    two_l = 2.0 * traj.log_scale[:, None]
    with np.errstate(divide="ignore"):
        log10 = (two_l + np.log(np.maximum(stored, 0.0))) / math.log(10.0)
    overflow = log10 > _LOG10_MAX
    linear = np.where(overflow, np.inf, np.exp(np.minimum(two_l + np.log(np.maximum(stored, 1e-320)), 700.0)))
    linear = np.where(stored == 0.0, 0.0, linear)
    return ObservableSeries(
        times=traj.times,
        kind=kind,
        labels=labels,
        linear=linear,
        log10=log10,
        linear_ok=not bool(np.any(overflow)),
    )


def population_series(traj: Trajectory, label: str) -> np.ndarray:
    """Convenience accessor: linear P(t) for one emitter."""
    obs = extract_observables(traj, "population")
    return obs.linear[:, traj.labels.index(label)]
