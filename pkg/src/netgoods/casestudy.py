"""Random-network case studies for the homogeneous clipped-quadratic family.

Case 1 draws directed Erdos-Renyi interaction matrices (edge probability
p0/n), measures the coupling statistic delta_i whose maximum is the infinity
norm of the weak-coupling residual matrix, and compares empirical moments to
exact closed forms plus the Chebyshev-style tail bound.  Case 2 runs the
upper-triangular pipeline: scale-normalize, certify near-symmetric, and
cross-check the solver against backward induction through the equivalence map.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .certificates import CertificateReport, cert_near_symmetric, spectral_bounds
from .equilibrium import backward_induction, solve_ne, verify_ne
from .equivalence import auto_epsilon, map_profile, transform_game, upper_triangular_normalizer
from .errors import InputError
from .functions import QuadraticClippedValue, QuadraticCost
from .game import Game

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class Case1Report:
    """Monte Carlo summary for the random-network uniqueness condition."""

    n: int
    p0: float
    samples: int
    seed: int
    sample_seeds: list[int]
    emp_delta_mean: float
    emp_delta_var: float
    se_delta_mean: float
    se_delta_var: float
    closed_delta_mean: float
    closed_delta_var: float
    bound: float
    frac_inf_norm_within: float
    frac_certificate: float
    inf_norms: np.ndarray
    sigma_maxes: np.ndarray


@dataclass(frozen=True)
class Case2Report:
    """Upper-triangular pipeline outcome for one sampled network."""

    n: int
    density: float
    seed: int
    epsilon: float
    w: np.ndarray
    scaling: np.ndarray
    certificate: CertificateReport
    x_solver: np.ndarray
    x_backward: np.ndarray
    x_transformed_back: np.ndarray
    solver_vs_backward: float
    solver_vs_transformed: float
    mapped_ne_verified: bool


def _philox(seed: int, stream: int = 0) -> np.random.Generator:
    key = np.array([seed & _MASK64, stream & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def sample_seed(seed: int, index: int) -> int:
    """Per-sample key derived from (seed, index); independent of drawing order."""
    return int(np.random.SeedSequence([int(seed), int(index)]).generate_state(1, np.uint64)[0])


def random_er_game(n: int, p0: float, a: float, b: float, c0: float, seed: int) -> Game:
    """Directed Erdos-Renyi game: off-diagonal w_ij ~ Bernoulli(p0/n), unit diagonal.

    Homogeneous clipped-quadratic values {a, b} and quadratic costs {c0}; the
    action box is [0, a/(2b) + 1], whose top is strictly dominated.  Entries
    come from a counter-based generator keyed by the seed, so any entry is
    reproducible independent of how many samples are drawn around it.
    """
    if n < 1:
        raise InputError(f"need n >= 1, got {n}")
    p = p0 / n
    if not 0.0 <= p <= 1.0:
        raise InputError(f"edge probability p0/n = {p} outside [0, 1]")
    rng = _philox(seed)
    w = (rng.random((n, n)) < p).astype(float)
    np.fill_diagonal(w, 1.0)
    x_hi = a / (2.0 * b) + 1.0
    return Game(
        w=w, lower=np.zeros(n), upper=np.full(n, x_hi),
        values=tuple(QuadraticClippedValue(a=a, b=b) for _ in range(n)),
        costs=tuple(QuadraticCost(c0=c0) for _ in range(n)),
    )


def coupling_residual(w: np.ndarray) -> np.ndarray:
    """The weak-coupling residual matrix for unit weights: sum_{k != i} w_ki w_kj."""
    w = np.abs(np.asarray(w, dtype=float))
    return w.T @ w - w


def delta_row_stats(w: np.ndarray) -> tuple[np.ndarray, float]:
    """Row statistics delta_i = 2*indegree_i + paired-out-edge count, and max_i delta_i.

    The maximum equals the infinity norm of the coupling residual matrix; both
    routes are computed and must agree exactly for 0/1 matrices.
    """
    w = np.asarray(w, dtype=float)
    n = w.shape[0]
    if np.max(np.abs(np.diag(w) - 1.0)) > 0:
        raise InputError("need unit diagonal")
    off_vals = w[~np.eye(n, dtype=bool)]
    if not np.all((off_vals == 0.0) | (off_vals == 1.0)):
        raise InputError("need 0/1 off-diagonal entries")
    indeg = w.sum(axis=0) - 1.0
    row_sums = w.sum(axis=1)
    # pair_i = sum_{k != i} w_ki * (#out-edges of k excluding targets i and k)
    pair_all = (w * (row_sums[:, None] - w - 1.0)).sum(axis=0)
    pair = pair_all - (row_sums - 2.0)  # drop the k = i term
    delta = 2.0 * indeg + pair
    inf_norm = float(np.max(delta)) if n else 0.0
    sigma_route = float(np.max(coupling_residual(w).sum(axis=1))) if n else 0.0
    if inf_norm != sigma_route:
        raise AssertionError(
            f"internal cross-check failed: delta route {inf_norm} != matrix route {sigma_route}"
        )
    return delta, inf_norm


def closed_form_delta_mean(n: int, p0: float) -> float:
    p = p0 / n
    return 2 * (n - 1) * p + (n - 1) * (n - 2) * p**2


def closed_form_delta_sq_mean(n: int, p0: float) -> float:
    # exact second moment, verified against exhaustive enumeration for small n
    p = p0 / n
    return (
        4 * (n - 1) * p
        + 9 * (n - 1) * (n - 2) * p**2
        + (n - 1) * (n - 2) * (5 * n - 11) * p**3
        + (n - 1) * (n - 2) ** 3 * p**4
    )


def closed_form_delta_var(n: int, p0: float) -> float:
    return closed_form_delta_sq_mean(n, p0) - closed_form_delta_mean(n, p0) ** 2


def sigma_inf_bound(n: int, p0: float) -> float:
    """Mean-plus-tail bound 2p0 + p0^2 + sqrt(n(8p0 + 10p0^2 + 4p0^3)).

    Chebyshev at probability 1/2 with the dimension-free variance bound, so
    at least half of sampled networks satisfy max_i delta_i <= this value.
    """
    return 2 * p0 + p0**2 + math.sqrt(n * (8 * p0 + 10 * p0**2 + 4 * p0**3))


def monte_carlo_case1(
    n: int, p0: float, a: float, b: float, c0: float, samples: int, seed: int
) -> Case1Report:
    """Sample games, compare delta moments to closed forms, measure both fractions.

    The certificate fraction instantiates the weak-coupling theorem for the
    homogeneous family: curvature c0 against Lipschitz constant 2b, so the
    condition is sigma_max(residual) < c0/(2b).
    """
    if samples < 100:
        raise InputError(f"need samples >= 100, got {samples}")
    seeds = [sample_seed(seed, s) for s in range(samples)]
    bound = sigma_inf_bound(n, p0)
    threshold = c0 / (2.0 * b)

    means = np.empty(samples)
    sq_means = np.empty(samples)
    inf_norms = np.empty(samples)
    sigma_maxes = np.empty(samples)
    for s in range(samples):
        g = random_er_game(n, p0, a, b, c0, seeds[s])
        delta, inf_norm = delta_row_stats(g.w)
        means[s] = float(np.mean(delta))
        sq_means[s] = float(np.mean(delta**2))
        inf_norms[s] = inf_norm
        sigma_maxes[s] = spectral_bounds(coupling_residual(g.w))[0]

    emp_mean = float(np.mean(means))
    emp_sq = float(np.mean(sq_means))
    emp_var = emp_sq - emp_mean**2
    # across-sample spread of per-sample statistics; samples are independent
    se_mean = float(np.std(means, ddof=1) / math.sqrt(samples))
    var_samples = sq_means - means**2
    se_var = float(np.std(var_samples, ddof=1) / math.sqrt(samples))
    return Case1Report(
        n=n, p0=p0, samples=samples, seed=seed, sample_seeds=seeds,
        emp_delta_mean=emp_mean,
        emp_delta_var=emp_var,
        se_delta_mean=se_mean,
        se_delta_var=se_var,
        closed_delta_mean=closed_form_delta_mean(n, p0),
        closed_delta_var=closed_form_delta_var(n, p0),
        bound=bound,
        frac_inf_norm_within=float(np.mean(inf_norms <= bound)),
        frac_certificate=float(np.mean(sigma_maxes < threshold)),
        inf_norms=inf_norms,
        sigma_maxes=sigma_maxes,
    )


def random_upper_triangular(n: int, density: float, seed: int) -> np.ndarray:
    """Unit-diagonal 0/1 matrix with Bernoulli(density) strict upper entries."""
    if not 0.0 <= density <= 1.0:
        raise InputError(f"density must lie in [0, 1], got {density}")
    rng = _philox(seed, stream=1)
    w = np.eye(n)
    iu = np.triu_indices(n, k=1)
    w[iu] = (rng.random(len(iu[0])) < density).astype(float)
    return w


def case2_pipeline(
    n: int, a: float, b: float, c0: float, density: float, seed: int,
    x_upper: float | None = None,
) -> Case2Report:
    """Sample an upper-triangular network and run the full uniqueness pipeline.

    Normalizes with the auto-chosen scaling, certifies the transformed game
    near-symmetric against the identity, solves the original game with the
    contraction iteration, and cross-checks against backward induction plus
    the inverse-mapped transformed-game solution.
    """
    x_hi = a / (2.0 * b) if x_upper is None else float(x_upper)
    w = random_upper_triangular(n, density, seed)
    game = Game(
        w=w, lower=np.zeros(n), upper=np.full(n, x_hi),
        values=tuple(QuadraticClippedValue(a=a, b=b) for _ in range(n)),
        costs=tuple(QuadraticCost(c0=c0) for _ in range(n)),
    )
    eps = auto_epsilon(game)
    if eps ** -n > 1e12:
        raise InputError(f"scaling overflow: eps^-n = {eps**-n:.3g} exceeds 1e12")
    emap = upper_triangular_normalizer(game, eps=eps)
    g2 = transform_game(game, emap)
    cert = cert_near_symmetric(g2, np.eye(n))

    x_solver = solve_ne(game, tol=1e-11).x_star
    x_backward = backward_induction(game)
    # the transformed game's fields scale like 1/d_i^2; the per-player weights
    # undo that so the iteration is as well-conditioned as the original
    res2 = solve_ne(g2, gamma=emap.d**2, tol=1e-11)
    x_back_mapped = map_profile(emap, res2.x_star, "inverse")
    mapped_ok = verify_ne(g2, map_profile(emap, x_backward, "forward"), 1e-8)[0]
    return Case2Report(
        n=n, density=density, seed=seed, epsilon=eps,
        w=w, scaling=emap.d, certificate=cert,
        x_solver=x_solver, x_backward=x_backward,
        x_transformed_back=x_back_mapped,
        solver_vs_backward=float(np.max(np.abs(x_solver - x_backward))),
        solver_vs_transformed=float(np.max(np.abs(x_solver - x_back_mapped))),
        mapped_ne_verified=mapped_ok,
    )
