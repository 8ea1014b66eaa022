"""Core model: game container, gains, utilities, welfare, gradients, best responses.

Effort profiles are plain numpy vectors; a profile x is feasible when
lower <= x <= upper componentwise.  All operations are pure and the Game is
immutable, so everything here is safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InputError
from .functions import ScalarFunction

#: slack allowed when clamping a marginally out-of-domain gain back inside
GAIN_CLAMP_TOL = 1e-9
#: default bisection tolerance for 1-D best responses
BR_TOL = 1e-12


@dataclass(frozen=True)
class GainBounds:
    """Componentwise gain interval [k_lo, k_hi] and externality interval [d_lo, d_hi]."""

    k_lo: np.ndarray
    k_hi: np.ndarray
    d_lo: np.ndarray
    d_hi: np.ndarray


@dataclass(frozen=True)
class Game:
    """n-player networked public-goods game.

    ``w[i, j]`` is the marginal gain of player i from player j's effort, with
    unit diagonal.  ``values[i]``/``costs[i]`` are the concave value and convex
    cost specs of player i; the box action space of player i is
    [lower[i], upper[i]].
    """

    w: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    values: tuple[ScalarFunction, ...]
    costs: tuple[ScalarFunction, ...]

    def __post_init__(self):
        w = np.array(self.w, dtype=float)
        lower = np.array(self.lower, dtype=float)
        upper = np.array(self.upper, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise InputError(f"W must be square, got shape {w.shape}")
        n = w.shape[0]
        if lower.shape != (n,) or upper.shape != (n,):
            raise InputError("lower/upper must be length-n vectors")
        if not np.all(np.isfinite(w)):
            raise InputError("W has non-finite entries")
        if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
            raise InputError("bounds must be finite")
        bad = np.nonzero(np.abs(np.diag(w) - 1.0) > 1e-12)[0]
        if bad.size:
            raise InputError(f"diagonal must be 1 (w[{bad[0]},{bad[0]}]={w[bad[0], bad[0]]})")
        if not np.all(lower < upper):
            i = int(np.nonzero(~(lower < upper))[0][0])
            raise InputError(f"need lower < upper for every player (player {i}: [{lower[i]}, {upper[i]}])")
        values = tuple(self.values)
        costs = tuple(self.costs)
        if len(values) != n or len(costs) != n:
            raise InputError("need one value spec and one cost spec per player")
        for i, v in enumerate(values):
            if v.kind != "value":
                raise InputError(f"player {i}: values[{i}] is a {v.kind} family, expected a value")
        for i, c in enumerate(costs):
            if c.kind != "cost":
                raise InputError(f"player {i}: costs[{i}] is a {c.kind} family, expected a cost")

        for arr in (w, lower, upper):
            arr.setflags(write=False)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "costs", costs)

        # reachable gains must live inside the value domains, actions inside
        # the cost domains; rejecting here keeps every downstream evaluation safe
        gb = gain_bounds(self)
        for i in range(n):
            dlo, dhi = values[i].domain()
            if gb.k_lo[i] < dlo - GAIN_CLAMP_TOL or gb.k_hi[i] > dhi + GAIN_CLAMP_TOL:
                raise InputError(
                    f"player {i}: gain interval [{gb.k_lo[i]}, {gb.k_hi[i]}] "
                    f"not contained in value domain [{dlo}, {dhi}]"
                )
            clo, chi = costs[i].domain()
            if lower[i] < clo - GAIN_CLAMP_TOL or upper[i] > chi + GAIN_CLAMP_TOL:
                raise InputError(
                    f"player {i}: action box [{lower[i]}, {upper[i]}] "
                    f"not contained in cost domain [{clo}, {chi}]"
                )

    @property
    def n(self) -> int:
        return self.w.shape[0]

    def project(self, x: np.ndarray) -> np.ndarray:
        """Componentwise projection onto the action box."""
        return np.clip(x, self.lower, self.upper)

    def require_feasible(self, x: np.ndarray, tol: float = 1e-9) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise InputError(f"profile must have shape ({self.n},), got {x.shape}")
        if np.any(x < self.lower - tol) or np.any(x > self.upper + tol):
            i = int(np.argmax(np.maximum(self.lower - x, x - self.upper)))
            raise InputError(f"infeasible profile: x[{i}]={x[i]} outside [{self.lower[i]}, {self.upper[i]}]")
        return np.clip(x, self.lower, self.upper)


def gains(game: Game, x: np.ndarray) -> np.ndarray:
    """Gain vector k = W x."""
    x = np.asarray(x, dtype=float)
    if x.shape != (game.n,):
        raise InputError(f"profile must have shape ({game.n},), got {x.shape}")
    return game.w @ x


def gain_bounds(game: Game) -> GainBounds:
    """Tight componentwise bounds on gains and externalities over the box.

    Positive weights contribute their source's bound of matching direction,
    negative weights the opposite one; the diagonal is excluded for the
    externality interval.
    """
    w = np.asarray(game.w, dtype=float)
    lower = np.asarray(game.lower, dtype=float)
    upper = np.asarray(game.upper, dtype=float)
    pos = np.maximum(w, 0.0)
    neg = np.minimum(w, 0.0)
    k_lo = pos @ lower + neg @ upper
    k_hi = pos @ upper + neg @ lower
    off = w - np.diag(np.diag(w))
    pos_o = np.maximum(off, 0.0)
    neg_o = np.minimum(off, 0.0)
    d_lo = pos_o @ lower + neg_o @ upper
    d_hi = pos_o @ upper + neg_o @ lower
    return GainBounds(k_lo=k_lo, k_hi=k_hi, d_lo=d_lo, d_hi=d_hi)


def _clamped_gain(spec: ScalarFunction, k: float) -> float:
    """Clamp a gain marginally outside the value domain back in; error beyond tol."""
    dlo, dhi = spec.domain()
    if k < dlo:
        if dlo - k > GAIN_CLAMP_TOL:
            raise DomainError(f"gain {k} below value domain start {dlo}")
        return dlo
    if k > dhi:
        if k - dhi > GAIN_CLAMP_TOL:
            raise DomainError(f"gain {k} above value domain end {dhi}")
        return dhi
    return k


def utility_profile(game: Game, x: np.ndarray) -> tuple[np.ndarray, float]:
    """Per-player utilities u_i = f_i(k_i) - c_i(x_i) and their sum (social welfare)."""
    x = game.require_feasible(x)
    k = gains(game, x)
    u = np.empty(game.n)
    for i in range(game.n):
        ki = _clamped_gain(game.values[i], float(k[i]))
        u[i] = float(game.values[i].value(ki)) - float(game.costs[i].value(float(x[i])))
    return u, float(np.sum(u))


def pseudo_gradient(game: Game, x: np.ndarray) -> np.ndarray:
    """Own-action utility derivatives (f_i'(k_i) - c_i'(x_i))_i (unit diagonal)."""
    x = game.require_feasible(x)
    k = gains(game, x)
    g = np.empty(game.n)
    for i in range(game.n):
        ki = _clamped_gain(game.values[i], float(k[i]))
        g[i] = float(game.values[i].d1(ki)) - float(game.costs[i].d1(float(x[i])))
    return g


def sw_gradient(game: Game, x: np.ndarray) -> np.ndarray:
    """Gradient of social welfare: component j is sum_i f_i'(k_i) w_ij - c_j'(x_j)."""
    x = game.require_feasible(x)
    k = gains(game, x)
    fp = np.empty(game.n)
    cp = np.empty(game.n)
    for i in range(game.n):
        ki = _clamped_gain(game.values[i], float(k[i]))
        fp[i] = float(game.values[i].d1(ki))
        cp[i] = float(game.costs[i].d1(float(x[i])))
    return game.w.T @ fp - cp


def weighted_welfare(game: Game, gamma: np.ndarray, x: np.ndarray) -> float:
    """Weighted sum of utilities sum_i gamma_i u_i(x)."""
    u, _ = utility_profile(game, x)
    return float(np.dot(np.asarray(gamma, dtype=float), u))


def weighted_welfare_gradient(game: Game, gamma: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Gradient of the gamma-weighted welfare."""
    gamma = np.asarray(gamma, dtype=float)
    x = game.require_feasible(x)
    k = gains(game, x)
    fp = np.empty(game.n)
    cp = np.empty(game.n)
    for i in range(game.n):
        ki = _clamped_gain(game.values[i], float(k[i]))
        fp[i] = gamma[i] * float(game.values[i].d1(ki))
        cp[i] = gamma[i] * float(game.costs[i].d1(float(x[i])))
    return game.w.T @ fp - cp


def externality(game: Game, i: int, x: np.ndarray) -> float:
    """Gain player i receives from everyone else: sum_{j != i} w_ij x_j."""
    x = np.asarray(x, dtype=float)
    return float(game.w[i] @ x - game.w[i, i] * x[i])


def best_response(game: Game, i: int, x: np.ndarray, tol: float = BR_TOL) -> float:
    """Smallest maximizer of f_i(t + d_i) - c_i(t) over [lower_i, upper_i].

    The own-utility derivative g(t) = f_i'(t + d_i) - c_i'(t) is non-increasing
    (concave value, convex cost), so the smallest maximizer is the left edge of
    the set {g <= 0}, found by bisection; ties across a flat optimum resolve to
    the smallest maximizer.
    """
    x = np.asarray(x, dtype=float)
    d_i = externality(game, i, x)
    f, c = game.values[i], game.costs[i]
    lo, hi = float(game.lower[i]), float(game.upper[i])

    def slope(t):
        return float(f.d1(_clamped_gain(f, t + d_i))) - float(c.d1(t))

    if slope(lo) <= 0.0:
        return lo
    if slope(hi) > 0.0:
        return hi
    a, b = lo, hi  # slope(a) > 0 >= slope(b)
    while b - a > tol:
        m = 0.5 * (a + b)
        if not a < m < b:
            break  # interval at machine resolution for this scale
        if slope(m) <= 0.0:
            b = m
        else:
            a = m
    return 0.5 * (a + b)


def _own_utility(game: Game, i: int, t: float, d_i: float) -> float:
    f, c = game.values[i], game.costs[i]
    return float(f.value(_clamped_gain(f, t + d_i))) - float(c.value(t))


def br_gap(game: Game, x: np.ndarray) -> tuple[float, int]:
    """Largest unilateral improvement any player can make at x, and who attains it."""
    x = game.require_feasible(x)
    gaps = np.empty(game.n)
    for i in range(game.n):
        d_i = externality(game, i, x)
        bi = best_response(game, i, x)
        gaps[i] = _own_utility(game, i, bi, d_i) - _own_utility(game, i, float(x[i]), d_i)
    worst = int(np.argmax(gaps))
    return max(0.0, float(gaps[worst])), worst
