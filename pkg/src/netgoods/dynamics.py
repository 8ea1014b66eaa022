"""Continuous-time effort dynamics as RK4 integrators, plus convergence-rate fits.

Two flows: the alpha-scaled ascent along own-utility derivatives, and the
social-welfare gradient flow.  States are projected onto the action box after
every step (a no-op on interior trajectories); stage evaluations use
box-clipped states so gains never leave the value domains.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import InputError, IntegrationError
from .game import (
    Game,
    br_gap,
    pseudo_gradient,
    sw_gradient,
    utility_profile,
    weighted_welfare,
    weighted_welfare_gradient,
)

#: the flow is declared converged once the driving field is this small
FIELD_TOL = 1e-8
DEFAULT_STEP = 1e-2
DEFAULT_HORIZON = 50.0
#: leading fraction of samples discarded by rate fits to skip transients
FIT_DISCARD = 0.1


@dataclass(frozen=True)
class Trajectory:
    """Time-stamped states with per-step diagnostics.

    ``clipped[k]`` is True when the box projection was active at step k, which
    flags boundary episodes the interior analysis does not cover.  ``energy``
    is present only when the integrator was given a reference point.
    """

    times: np.ndarray
    states: np.ndarray
    sw: np.ndarray
    br_gaps: np.ndarray
    clipped: np.ndarray
    energy: np.ndarray | None
    converged: bool

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]


@dataclass(frozen=True)
class RateFit:
    """Least-squares decay-rate fit: gap ~ exp(rate*t) or gap ~ rate/t + const."""

    model: str  # "exponential" | "inverse_linear"
    rate: float
    r_squared: float


def _integrate(game: Game, field, x0: np.ndarray, step: float, horizon: float,
               energy_fn=None) -> Trajectory:
    if step <= 0 or horizon <= 0:
        raise InputError(f"need step>0 and horizon>0, got step={step}, horizon={horizon}")
    x = game.require_feasible(np.asarray(x0, dtype=float))

    times, states, sws, gaps, clipped, energies = [], [], [], [], [], []

    def record(t, x, was_clipped):
        times.append(t)
        states.append(x.copy())
        sws.append(utility_profile(game, x)[1])
        gaps.append(br_gap(game, x)[0])
        clipped.append(was_clipped)
        if energy_fn is not None:
            energies.append(energy_fn(x))

    def clipped_field(y):
        return field(game.project(y))

    record(0.0, x, False)
    converged = bool(np.max(np.abs(field(x))) < FIELD_TOL)
    n_steps = int(round(horizon / step))
    t = 0.0
    for _ in range(n_steps):
        if converged:
            break
        k1 = clipped_field(x)
        k2 = clipped_field(x + 0.5 * step * k1)
        k3 = clipped_field(x + 0.5 * step * k2)
        k4 = clipped_field(x + step * k3)
        raw = x + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(raw)):
            raise IntegrationError(
                f"non-finite state at t={t + step}", last_good=_finish(times, states, sws, gaps, clipped, energies, energy_fn, False)
            )
        x_new = game.project(raw)
        was_clipped = bool(np.any(x_new != raw))
        t += step
        x = x_new
        record(t, x, was_clipped)
        converged = bool(np.max(np.abs(field(x))) < FIELD_TOL)
    return _finish(times, states, sws, gaps, clipped, energies, energy_fn, converged)


def _finish(times, states, sws, gaps, clipped, energies, energy_fn, converged):
    return Trajectory(
        times=np.asarray(times),
        states=np.asarray(states),
        sw=np.asarray(sws),
        br_gaps=np.asarray(gaps),
        clipped=np.asarray(clipped, dtype=bool),
        energy=np.asarray(energies) if energy_fn is not None else None,
        converged=converged,
    )


def integrate_pseudo_gradient(
    game: Game,
    alpha: np.ndarray,
    x0: np.ndarray,
    step: float = DEFAULT_STEP,
    horizon: float = DEFAULT_HORIZON,
    x_star: np.ndarray | None = None,
) -> Trajectory:
    """Integrate dx_i/dt = alpha_i * (f_i'(k_i) - c_i'(x_i)) from x0.

    When ``x_star`` is supplied, the trajectory also records the energy
    E(x) = U(x*) - U(x) + <x - x*, grad U(x*)> of the alpha-weighted welfare
    U = sum_i alpha_i u_i, the quantity that decays exponentially under a
    passing uniqueness certificate.
    """
    alpha = np.asarray(alpha, dtype=float)
    if alpha.shape != (game.n,) or np.any(alpha <= 0):
        raise InputError("alpha must be a strictly positive n-vector")

    def field(x):
        return alpha * pseudo_gradient(game, x)

    energy_fn = None
    if x_star is not None:
        x_star = game.require_feasible(np.asarray(x_star, dtype=float))
        u_star = weighted_welfare(game, alpha, x_star)
        g_star = weighted_welfare_gradient(game, alpha, x_star)

        def energy_fn(x):
            return u_star - weighted_welfare(game, alpha, x) + float((x - x_star) @ g_star)

    return _integrate(game, field, x0, step, horizon, energy_fn=energy_fn)


def integrate_sw_flow(
    game: Game,
    x0: np.ndarray,
    step: float = DEFAULT_STEP,
    horizon: float = DEFAULT_HORIZON,
) -> Trajectory:
    """Integrate the social-welfare gradient flow dx/dt = grad SW(x) from x0."""

    def field(x):
        return sw_gradient(game, x)

    return _integrate(game, field, x0, step, horizon)


def _r_squared(resp, pred):
    ss_res = float(np.sum((resp - pred) ** 2))
    ss_tot = float(np.sum((resp - np.mean(resp)) ** 2))
    if ss_tot == 0.0:
        raise InputError("degenerate series: constant gaps")
    return max(0.0, min(1.0, 1.0 - ss_res / ss_tot))


def _prepare_series(times, gaps):
    times = np.asarray(times, dtype=float)
    gaps = np.asarray(gaps, dtype=float)
    if times.shape != gaps.shape or times.ndim != 1:
        raise InputError("times and gaps must be 1-D arrays of equal length")
    if times.size < 10:
        raise InputError(f"need at least 10 samples, got {times.size}")
    if np.any(gaps <= 0):
        raise InputError("degenerate series: non-positive gaps")
    skip = int(FIT_DISCARD * times.size)
    return times[skip:], gaps[skip:]


def fit_exponential(times, gaps) -> RateFit:
    """Fit log(gap) = log(A) + rate*t; r^2 measured on log(gap)."""
    t, g = _prepare_series(times, gaps)
    logg = np.log(g)
    slope, intercept = np.polyfit(t, logg, 1)
    return RateFit("exponential", float(slope), _r_squared(logg, slope * t + intercept))


def fit_inverse_linear(times, gaps) -> RateFit:
    """Fit gap = rate*(1/t) + const on the strictly positive times."""
    t, g = _prepare_series(times, gaps)
    mask = t > 0
    if int(np.sum(mask)) < 2:
        raise InputError("inverse-linear fit needs at least 2 samples with t > 0")
    u = 1.0 / t[mask]
    slope, intercept = np.polyfit(u, g[mask], 1)
    return RateFit("inverse_linear", float(slope), _r_squared(g[mask], slope * u + intercept))


def fit_rate(times, gaps) -> RateFit:
    """Fit both decay models to a positive gap series and return the better r^2."""
    expo = fit_exponential(times, gaps)
    try:
        inv = fit_inverse_linear(times, gaps)
    except InputError:
        return expo
    return expo if expo.r_squared >= inv.r_squared else inv


def trajectory_to_csv(traj: Trajectory, path) -> None:
    """Write columns t, x_1..x_n, sw, br_gap, energy (energy blank if absent)."""
    n = traj.states.shape[1]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", *[f"x_{i + 1}" for i in range(n)], "sw", "br_gap", "energy"])
        for k in range(traj.times.size):
            energy = "" if traj.energy is None else repr(float(traj.energy[k]))
            writer.writerow(
                [repr(float(traj.times[k])),
                 *[repr(float(v)) for v in traj.states[k]],
                 repr(float(traj.sw[k])),
                 repr(float(traj.br_gaps[k])),
                 energy]
            )
