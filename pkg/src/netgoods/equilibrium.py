"""NE computation and verification.

The workhorse is the projected contraction iteration
x <- Pi_X(x + eps * gamma * pseudo_gradient(x)), whose unique fixed point is
the NE whenever a uniqueness certificate passes and eps is small enough.
Around it: epsilon-NE verification, a vanishing-regularization existence path
for non-strongly-convex costs, a brute-force grid oracle, a clustered
multi-start probe, and backward induction for triangular networks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .certificates import spectral_bounds
from .errors import InputError
from .game import Game, best_response, br_gap, gain_bounds, pseudo_gradient

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 50_000
#: hard cap on grid-oracle size
GRID_POINT_CAP = 10_000_000
_GRID_CHUNK = 1 << 18


@dataclass(frozen=True)
class SolveResult:
    """Fixed-point solve outcome.

    ``residual`` is the final infinity-norm displacement of one iteration;
    ``final_gap`` the best-response gap at ``x_star`` (NaN if diverged).
    ``iterates`` is present only when history was requested.
    """

    x_star: np.ndarray
    status: str  # "converged" | "max_iter" | "diverged"
    iterations: int
    final_gap: float
    residual: float
    iterates: np.ndarray | None = None

    @property
    def converged(self) -> bool:
        return self.status == "converged"


def default_step_eps(game: Game, gamma: np.ndarray) -> float:
    """Conservative contraction step from the game's interaction scale.

    The scaled field's Jacobian is bounded by the value-derivative Lipschitz
    constants spread through W plus the cost curvature, so 0.5/(1 + that
    scale) keeps the iteration inside the contraction regime with room to
    spare; clipped to [1e-4, 1e-1].
    """
    gb = gain_bounds(game)
    l_val = max(
        float(gamma[i]) * game.values[i].lipschitz_d1_on(float(gb.k_lo[i]), float(gb.k_hi[i]))
        for i in range(game.n)
    )
    l_cost = max(
        float(gamma[i]) * game.costs[i].lipschitz_d1_on(float(game.lower[i]), float(game.upper[i]))
        for i in range(game.n)
    )
    s_w, _ = spectral_bounds(np.abs(game.w))
    scale = l_val * s_w + l_cost
    return float(np.clip(0.5 / (1.0 + scale), 1e-4, 1e-1))


def _prep(game, gamma, step_eps, x0):
    gamma = np.ones(game.n) if gamma is None else np.asarray(gamma, dtype=float)
    if gamma.shape != (game.n,) or np.any(gamma <= 0):
        raise InputError("gamma must be a strictly positive n-vector")
    if step_eps is None:
        step_eps = default_step_eps(game, gamma)
    if step_eps <= 0:
        raise InputError(f"step_eps must be positive, got {step_eps}")
    if x0 is None:
        x0 = 0.5 * (game.lower + game.upper)
    x0 = game.require_feasible(np.asarray(x0, dtype=float))
    return gamma, float(step_eps), x0


def solve_ne(
    game: Game,
    gamma: np.ndarray | None = None,
    step_eps: float | None = None,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    x0: np.ndarray | None = None,
    keep_iterates: bool = False,
    field=None,
) -> SolveResult:
    """Projected fixed-point iteration on the (gamma-scaled) pseudo-gradient.

    Stops when the iteration displacement drops below tol*step_eps.  ``field``
    overrides the driving field (used internally by the regularized path); it
    must have the same signature as pseudo_gradient's partial application.
    """
    if tol <= 0:
        raise InputError(f"tol must be positive, got {tol}")
    gamma, eps, x = _prep(game, gamma, step_eps, x0)
    f = field if field is not None else (lambda y: pseudo_gradient(game, y))
    history = [x.copy()] if keep_iterates else None
    status = "max_iter"
    iterations = max_iter
    residual = np.inf
    for it in range(1, max_iter + 1):
        x_new = game.project(x + eps * gamma * f(x))
        if not np.all(np.isfinite(x_new)):
            return SolveResult(
                x_star=x, status="diverged", iterations=it,
                final_gap=float("nan"), residual=float("inf"),
                iterates=np.asarray(history) if history is not None else None,
            )
        residual = float(np.max(np.abs(x_new - x)))
        x = x_new
        if history is not None:
            history.append(x.copy())
        if residual < tol * eps:
            status = "converged"
            iterations = it
            break
    gap, _ = br_gap(game, x)
    return SolveResult(
        x_star=x, status=status, iterations=iterations,
        final_gap=gap, residual=residual,
        iterates=np.asarray(history) if history is not None else None,
    )


def verify_ne(game: Game, x: np.ndarray, eps: float) -> tuple[bool, float, int]:
    """Accept x as an eps-NE iff no unilateral deviation gains more than eps."""
    if eps < 0:
        raise InputError(f"eps must be non-negative, got {eps}")
    gap, worst = br_gap(game, x)
    return gap <= eps, gap, worst


def solve_regularized(
    game: Game,
    beta_schedule,
    gamma: np.ndarray | None = None,
    step_eps: float | None = None,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    x0: np.ndarray | None = None,
) -> SolveResult:
    """Existence path: solve under costs c_i(x) + beta*x^2 for decreasing beta.

    Each stage adds 2*beta*x_i to the cost derivative (the quadratic
    regularizer makes every cost strongly convex), solves with a warm start
    from the previous stage, and the final point is judged against the
    original game.
    """
    betas = [float(b) for b in beta_schedule]
    if not betas or any(b <= 0 for b in betas) or any(
        b2 >= b1 for b1, b2 in zip(betas[:-1], betas[1:])
    ):
        raise InputError("beta_schedule must be strictly decreasing and positive")
    gamma_v = np.ones(game.n) if gamma is None else np.asarray(gamma, dtype=float)
    x = x0
    total_iters = 0
    for beta in betas:
        eps_b = step_eps
        if eps_b is None:
            eps_b = float(np.clip(default_step_eps(game, gamma_v) / (1.0 + 2.0 * beta), 1e-4, 1e-1))

        def field(y, beta=beta):
            return pseudo_gradient(game, y) - 2.0 * beta * y

        res = solve_ne(
            game, gamma=gamma_v, step_eps=eps_b, tol=tol, max_iter=max_iter,
            x0=x, field=field,
        )
        total_iters += res.iterations
        if res.status == "diverged":
            return SolveResult(
                x_star=res.x_star, status="diverged", iterations=total_iters,
                final_gap=float("nan"), residual=res.residual,
            )
        x = res.x_star
    gap, _ = br_gap(game, x)
    return SolveResult(
        x_star=x, status=res.status, iterations=total_iters,
        final_gap=gap, residual=res.residual,
    )


def _batch_field(game: Game, xs: np.ndarray) -> np.ndarray:
    """Pseudo-gradient for a whole (S, n) batch of profiles at once."""
    ks = xs @ game.w.T
    out = np.empty_like(xs)
    for i in range(game.n):
        dlo, dhi = game.values[i].domain()
        ki = np.clip(ks[:, i], dlo, dhi)
        out[:, i] = np.asarray(game.values[i].d1(ki)) - np.asarray(game.costs[i].d1(xs[:, i]))
    return out


def multi_start_probe(
    game: Game,
    n_starts: int,
    seed: int,
    cluster_tol: float = 1e-4,
    gamma: np.ndarray | None = None,
    step_eps: float | None = None,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> list[SolveResult]:
    """Solve from deterministic random starts and cluster the limits.

    Starts iterate as one vectorized batch; converged limits are merged by
    infinity-norm distance in start order, and one representative SolveResult
    per cluster comes back.  A certified-unique game must yield one cluster.
    """
    if n_starts < 1:
        raise InputError(f"need n_starts >= 1, got {n_starts}")
    gamma_v, eps, _ = _prep(game, gamma, step_eps, None)
    rng = np.random.default_rng(seed)
    xs = game.lower + rng.random((n_starts, game.n)) * (game.upper - game.lower)

    active = np.ones(n_starts, dtype=bool)
    iters = np.zeros(n_starts, dtype=int)
    residuals = np.full(n_starts, np.inf)
    for it in range(1, max_iter + 1):
        if not np.any(active):
            break
        sub = xs[active]
        stepped = sub + eps * gamma_v[None, :] * _batch_field(game, sub)
        stepped = np.clip(stepped, game.lower, game.upper)
        res = np.max(np.abs(stepped - sub), axis=1)
        xs[active] = stepped
        idx = np.nonzero(active)[0]
        residuals[idx] = res
        iters[idx] = it
        done = res < tol * eps
        bad = ~np.all(np.isfinite(stepped), axis=1)
        active[idx[done | bad]] = False

    reps: list[SolveResult] = []
    for s in range(n_starts):
        x = xs[s]
        if not np.all(np.isfinite(x)):
            continue
        converged = residuals[s] < tol * eps
        if not converged:
            continue
        if any(np.max(np.abs(x - r.x_star)) <= cluster_tol for r in reps):
            continue
        gap, _ = br_gap(game, x)
        reps.append(SolveResult(
            x_star=x.copy(), status="converged", iterations=int(iters[s]),
            final_gap=gap, residual=float(residuals[s]),
        ))
    return reps


#: own-axis deviation resolution for the oracle's second pass
_FINE_DEVIATIONS = 2048


def _deviation_gains(game: Game, coords: np.ndarray, devs: list[np.ndarray]) -> np.ndarray:
    """Best single-player deviation gain per profile, scanning dev grids per player."""
    ks = coords @ game.w.T
    best = np.full(coords.shape[0], -np.inf)
    for i in range(game.n):
        f, c = game.values[i], game.costs[i]
        dlo, dhi = f.domain()
        ki = np.clip(ks[:, i], dlo, dhi)
        u_base = np.asarray(f.value(ki)) - np.asarray(c.value(coords[:, i]))
        k_alt = ki[:, None] + (devs[i][None, :] - coords[:, i][:, None])
        u_alt = np.asarray(f.value(np.clip(k_alt, dlo, dhi))) - np.asarray(c.value(devs[i]))[None, :]
        best = np.maximum(best, u_alt.max(axis=1) - u_base)
    return best


def grid_oracle(game: Game, m: int, eps: float) -> list[np.ndarray]:
    """All profiles on the m^n uniform grid where no unilateral deviation gains > eps.

    Brute force: a first pass screens all m^n profiles against deviations on
    the m-point axis grid; survivors are re-checked against a dense own-axis
    deviation grid, which rejects grid-locked near-equilibria (profiles that
    only look stable because the coarse grid cannot express the profitable
    move) and keeps exactly the grid points that are epsilon-NEs of the game.
    """
    if game.n > 6:
        raise InputError(f"grid oracle supports n <= 6, got n={game.n}")
    if m < 2:
        raise InputError(f"need m >= 2, got {m}")
    total = m**game.n
    if total > GRID_POINT_CAP:
        raise InputError(f"instance too large: {m}^{game.n} = {total} > {GRID_POINT_CAP}")

    axes = [np.linspace(game.lower[i], game.upper[i], m) for i in range(game.n)]
    fine = [
        np.union1d(np.linspace(game.lower[i], game.upper[i], _FINE_DEVIATIONS), axes[i])
        for i in range(game.n)
    ]
    found: list[np.ndarray] = []
    for start in range(0, total, _GRID_CHUNK):
        idx = np.arange(start, min(start + _GRID_CHUNK, total))
        coords = np.empty((idx.size, game.n))
        rem = idx.copy()
        for i in range(game.n - 1, -1, -1):
            coords[:, i] = axes[i][rem % m]
            rem //= m
        ok = _deviation_gains(game, coords, axes) <= eps
        if not np.any(ok):
            continue
        survivors = coords[ok]
        for s0 in range(0, survivors.shape[0], 4096):
            block = survivors[s0:s0 + 4096]
            keep = _deviation_gains(game, block, fine) <= eps
            for row in block[keep]:
                found.append(row.copy())
    return found


def backward_induction(game: Game, tol: float = 1e-12) -> np.ndarray:
    """Exact NE of an upper-triangular network by solving players n..1 in turn.

    With w_ij = 0 below the diagonal, player n faces no externalities, so her
    best response is unconditional; fixing it makes player n-1 unconditional,
    and so on down to player 1.
    """
    il = np.tril_indices(game.n, k=-1)
    if np.any(game.w[il] != 0.0):
        raise InputError("W must be upper-triangular (w_ij = 0 for i > j)")
    x = game.lower.copy()
    for i in range(game.n - 1, -1, -1):
        x[i] = best_response(game, i, x, tol=tol)
    return x
