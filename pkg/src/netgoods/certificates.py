"""Uniqueness certificates for the NE, plus the spectral numerics they need.

Three sufficient conditions are checked, each comparing a curvature constant
against the largest singular value of a constructed non-negative residual
matrix: near-individual (weak coupling), near-potential (couplings near one
and values near a common spec), near-symmetric (W near a positive-definite
symmetric W0).  A passing verdict certifies a unique NE; a failing one proves
nothing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .equivalence import EquivalenceMap, transform_game
from .errors import ConvergenceError, InputError
from .functions import ScalarFunction, closeness_sigma
from .game import Game, gain_bounds

POWER_TOL = 1e-10
POWER_MAX_ITER = 10_000
JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100


@dataclass(frozen=True)
class CertificateReport:
    """Outcome of one uniqueness check.

    ``threshold`` is the curvature side of the theorem's inequality and
    ``margin`` the amount by which it beats the spectral side; the verdict is
    "pass" exactly when the strict inequality holds.  ``details`` carries the
    per-player constants for audit; ``transform`` names the equivalence map the
    certificate was evaluated under, if any.
    """

    theorem: str
    gamma: np.ndarray
    matrix: np.ndarray
    sigma_max: float
    threshold: float
    margin: float
    verdict: str
    notes: tuple[str, ...] = ()
    details: dict = field(default_factory=dict)
    transform: str | None = None

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"


def _off_norm(a: np.ndarray) -> float:
    """Frobenius norm of the off-diagonal part, summed directly (no cancellation)."""
    b = a.copy()
    np.fill_diagonal(b, 0.0)
    return float(np.linalg.norm(b))


def jacobi_eigenvalues(
    m: np.ndarray, tol: float = JACOBI_TOL, max_sweeps: int = JACOBI_MAX_SWEEPS
) -> np.ndarray:
    """All eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending."""
    a = np.array(m, dtype=float)
    n = a.shape[0]
    if a.ndim != 2 or a.shape != (n, n):
        raise InputError(f"need a square matrix, got shape {a.shape}")
    if np.max(np.abs(a - a.T)) > 1e-12 * max(1.0, np.max(np.abs(a))):
        raise InputError("matrix is not symmetric")
    a = 0.5 * (a + a.T)
    if n == 1:
        return np.diag(a).copy()
    scale = float(np.linalg.norm(a))
    if scale == 0.0:
        return np.zeros(n)
    for _ in range(max_sweeps):
        if _off_norm(a) <= tol * scale:
            return np.sort(np.diag(a))
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 0.1 * tol * scale / n:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(theta, 1.0))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                ap = a[p, :].copy()
                aq = a[q, :].copy()
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
    off = _off_norm(a)
    if off <= 1e3 * tol * scale:
        return np.sort(np.diag(a))
    raise ConvergenceError(f"Jacobi sweeps exceeded {max_sweeps} (off-norm {off:g})")


def _power_iteration(b: np.ndarray, v: np.ndarray, tol: float) -> float:
    """Largest eigenvalue of symmetric PSD b from start v; -1 on stagnation."""
    lam = 0.0
    for _ in range(POWER_MAX_ITER):
        w = b @ v
        norm = float(np.linalg.norm(w))
        if norm == 0.0:
            return 0.0
        v = w / norm
        lam_new = float(v @ (b @ v))
        if abs(lam_new - lam) <= tol * max(1.0, abs(lam_new)):
            return lam_new
        lam = lam_new
    return -1.0


def spectral_bounds(
    m: np.ndarray, tol: float = POWER_TOL
) -> tuple[float, tuple[float, float] | None]:
    """(sigma_max, (min_eig, max_eig) when symmetric, else None).

    sigma_max comes from power iteration on M^T M with a deterministic
    all-ones start; a deterministic ramp restart (and finally Jacobi) covers
    the measure-zero case of a start orthogonal to the top singular space.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InputError(f"need a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InputError("matrix has non-finite entries")
    n = m.shape[0]
    b = m.T @ m
    # any column or row 2-norm is a valid lower bound on sigma_max
    floor = max(
        float(np.max(np.sqrt(np.sum(m * m, axis=0)))),
        float(np.max(np.sqrt(np.sum(m * m, axis=1)))),
    )
    lam = _power_iteration(b, np.ones(n) / math.sqrt(n), tol)
    sigma = math.sqrt(max(lam, 0.0))
    if lam < 0 or sigma < floor * (1.0 - 1e-8):
        ramp = np.linspace(1.0, 2.0, n)
        lam = _power_iteration(b, ramp / float(np.linalg.norm(ramp)), tol)
        sigma = math.sqrt(max(lam, 0.0))
    if lam < 0 or sigma < floor * (1.0 - 1e-8):
        sigma = math.sqrt(max(0.0, float(jacobi_eigenvalues(b)[-1])))

    sym_eigs = None
    if np.max(np.abs(m - m.T)) <= 1e-12 * max(1.0, float(np.max(np.abs(m)))):
        eigs = jacobi_eigenvalues(m)
        sym_eigs = (float(eigs[0]), float(eigs[-1]))
    return sigma, sym_eigs


def _default_gamma(game: Game, gamma) -> np.ndarray:
    if gamma is None:
        return np.ones(game.n)
    gamma = np.asarray(gamma, dtype=float)
    if gamma.shape != (game.n,) or np.any(gamma <= 0):
        raise InputError("gamma must be a strictly positive n-vector")
    return gamma


def _kink_caveats(game: Game, gb) -> tuple[str, ...]:
    notes = []
    for i, spec in enumerate(game.values):
        if any(gb.k_lo[i] < q < gb.k_hi[i] for q in spec.kinks()):
            notes.append(
                f"player {i}: value kink inside reachable gain interval; "
                "second-order smoothness holds only piecewise"
            )
    return tuple(notes)


def cert_near_individual(game: Game, gamma: np.ndarray | None = None) -> CertificateReport:
    """Weak-coupling certificate: c > L0 * sigma_max(Sigma).

    c is the worst-case modulus of gamma_i*(f_i(x+d) - c_i(x)) over the box,
    minimized over reachable externalities (equivalently, the value modulus
    over the full gain interval plus the cost modulus); L0 bounds every f_i'
    Lipschitz constant; sigma_ij = sum_{k != i} gamma_k |w_ki w_kj|.
    """
    gamma = _default_gamma(game, gamma)
    gb = gain_bounds(game)
    per_c = np.empty(game.n)
    l_ones = np.empty(game.n)
    for i in range(game.n):
        vmod = game.values[i].modulus_on(float(gb.k_lo[i]), float(gb.k_hi[i]))
        cmod = game.costs[i].modulus_on(float(game.lower[i]), float(game.upper[i]))
        per_c[i] = gamma[i] * (vmod + cmod)
        l_ones[i] = game.values[i].lipschitz_d1_on(float(gb.k_lo[i]), float(gb.k_hi[i]))
    c = float(np.min(per_c))
    l0 = float(np.max(l_ones))

    abs_w = np.abs(game.w)
    sigma = abs_w.T @ (gamma[:, None] * abs_w) - gamma[:, None] * abs_w
    sigma = np.maximum(sigma, 0.0)  # roundoff guard; entries are sums of products
    s_max, _ = spectral_bounds(sigma)
    margin = c - l0 * s_max
    notes = _kink_caveats(game, gb)
    if c == 0.0:
        notes = notes + ("zero modulus: no strong concavity available",)
    return CertificateReport(
        theorem="near_individual",
        gamma=gamma,
        matrix=sigma,
        sigma_max=s_max,
        threshold=c,
        margin=margin,
        verdict="pass" if (c > 0 and margin > 0) else "fail",
        notes=notes,
        details={"c": c, "l0": l0, "per_player_c": per_c.tolist()},
    )


def cert_near_potential(
    game: Game,
    f_common: ScalarFunction,
    gamma: np.ndarray | None = None,
) -> CertificateReport:
    """Common-value certificate: c > sigma_max(B).

    sigma_i measures how far gamma_i*f_i' drifts from f_common' over player i's
    gains; c is the worst modulus of f_common(x+d) - gamma_i*c_i(x); the matrix
    B combines sigma_i with how far W sits from the all-ones matrix, weighted
    by the Lipschitz constants of f_common' and f_common''.
    """
    gamma = _default_gamma(game, gamma)
    gb = gain_bounds(game)
    if f_common.kind != "value":
        raise InputError("f_common must be a value family")

    sum_lo = float(np.sum(game.lower))
    sum_hi = float(np.sum(game.upper))
    hull_lo = min(float(np.min(gb.k_lo)), sum_lo)
    hull_hi = max(float(np.max(gb.k_hi)), sum_hi)
    dlo, dhi = f_common.domain()
    if hull_lo < dlo or hull_hi > dhi:
        raise InputError(
            f"f_common domain [{dlo}, {dhi}] does not cover the required "
            f"interval [{hull_lo}, {hull_hi}]"
        )

    sigmas = np.empty(game.n)
    per_c = np.empty(game.n)
    for i in range(game.n):
        k_int = (float(gb.k_lo[i]), float(gb.k_hi[i]))
        sigmas[i] = closeness_sigma(game.values[i], f_common, float(gamma[i]), k_int)
        vmod = f_common.modulus_on(*k_int)
        cmod = game.costs[i].modulus_on(float(game.lower[i]), float(game.upper[i]))
        per_c[i] = vmod + gamma[i] * cmod
    c = float(np.min(per_c))
    c1 = float(f_common.lipschitz_d1_on(hull_lo, hull_hi))
    c2 = f_common.lipschitz_d2_on(hull_lo, hull_hi)

    dev = np.abs(game.w - 1.0)
    box_mag = np.maximum(-game.lower, game.upper)
    s_row = dev @ box_mag  # per-row sum |w_il - 1| * max(-lo_l, hi_l)

    notes = list(_kink_caveats(game, gb))
    if c2 is None:
        if float(np.max(s_row)) == 0.0:
            c2 = 0.0
            notes.append("f_common'' Lipschitz constant unused: W is exactly all-ones")
        else:
            b_part = sigmas[:, None] * np.abs(game.w) + c1 * dev
            notes.append(
                "not applicable: f_common'' is discontinuous on the required interval "
                "and W deviates from all-ones"
            )
            return CertificateReport(
                theorem="near_potential",
                gamma=gamma,
                matrix=b_part,
                sigma_max=math.inf,
                threshold=c,
                margin=-math.inf,
                verdict="fail",
                notes=tuple(notes),
                details={"c": c, "c1": c1, "c2": None, "sigma_i": sigmas.tolist()},
            )

    b = sigmas[:, None] * np.abs(game.w) + c1 * dev + c2 * s_row[:, None]
    s_max, _ = spectral_bounds(b)
    margin = c - s_max
    if c == 0.0:
        notes.append("zero modulus: no strong concavity available")
    return CertificateReport(
        theorem="near_potential",
        gamma=gamma,
        matrix=b,
        sigma_max=s_max,
        threshold=c,
        margin=margin,
        verdict="pass" if (c > 0 and margin > 0) else "fail",
        notes=tuple(notes),
        details={"c": c, "c1": c1, "c2": c2, "sigma_i": sigmas.tolist()},
    )


def cert_near_symmetric(game: Game, w0: np.ndarray) -> CertificateReport:
    """Near-positive-definite certificate: sigma_min(W0) > sigma_max(Sigma).

    Off-diagonal sigma_ij = 2 L_i |w_ij| / C_i + |w0_ij - w_ij| with zero
    diagonal, where L_i is the Lipschitz constant of c_i' and C_i the value
    modulus over the part of the gain interval where f_i still climbs (the
    only region an optimal gain can occupy).
    """
    w0 = np.asarray(w0, dtype=float)
    if w0.shape != game.w.shape:
        raise InputError(f"W0 must have shape {game.w.shape}, got {w0.shape}")
    gamma = np.ones(game.n)
    if np.max(np.abs(w0 - w0.T)) > 1e-12 * max(1.0, float(np.max(np.abs(w0)))):
        raise InputError("W0 must be symmetric")
    if np.max(np.abs(np.diag(w0) - 1.0)) > 1e-12:
        raise InputError("W0 must have unit diagonal")

    eigs = jacobi_eigenvalues(w0)
    sigma_0 = float(eigs[0])
    gb = gain_bounds(game)
    notes = list(_kink_caveats(game, gb))

    l_costs = np.array(
        [game.costs[i].lipschitz_d1_on(float(game.lower[i]), float(game.upper[i]))
         for i in range(game.n)]
    )
    c_vals = np.array(
        [game.values[i].modulus_on_increasing(float(gb.k_lo[i]), float(gb.k_hi[i]))
         for i in range(game.n)]
    )

    details = {"sigma_0": sigma_0, "l_costs": l_costs.tolist(), "c_values": c_vals.tolist()}
    if sigma_0 <= 0.0:
        notes.append("W0 is not positive definite")
        return CertificateReport(
            theorem="near_symmetric", gamma=gamma, matrix=np.abs(w0 - game.w),
            sigma_max=math.inf, threshold=sigma_0, margin=-math.inf,
            verdict="fail", notes=tuple(notes), details=details,
        )
    if np.any(c_vals <= 0.0):
        notes.append("zero modulus: some value has no curvature over its optimal-gain range")
        return CertificateReport(
            theorem="near_symmetric", gamma=gamma, matrix=np.abs(w0 - game.w),
            sigma_max=math.inf, threshold=sigma_0, margin=-math.inf,
            verdict="fail", notes=tuple(notes), details=details,
        )

    sigma = (2.0 * l_costs / c_vals)[:, None] * np.abs(game.w) + np.abs(w0 - game.w)
    np.fill_diagonal(sigma, 0.0)
    s_max, _ = spectral_bounds(sigma)
    margin = sigma_0 - s_max
    return CertificateReport(
        theorem="near_symmetric",
        gamma=gamma,
        matrix=sigma,
        sigma_max=s_max,
        threshold=sigma_0,
        margin=margin,
        verdict="pass" if margin > 0 else "fail",
        notes=tuple(notes),
        details=details,
    )


def _sym_candidates(game: Game) -> list[np.ndarray]:
    cands = [np.eye(game.n)]
    sym = 0.5 * (game.w + game.w.T)
    if np.max(np.abs(sym - np.eye(game.n))) > 0:
        cands.append(sym)
    return cands


def certify_any(
    game: Game,
    gamma: np.ndarray | None = None,
    f_common: ScalarFunction | None = None,
    w0_candidates: list[np.ndarray] | None = None,
    maps: list[EquivalenceMap] | None = None,
) -> CertificateReport:
    """Best certificate over all applicable theorems and candidate transforms.

    Evaluates every applicable certificate on the game itself and on each
    equivalence-transformed variant (a pass there certifies the original via
    NE transport); returns the report with the largest margin, or the
    least-negative one when everything fails.  Provenance lands in
    ``transform``.
    """
    gamma = _default_gamma(game, gamma)
    candidates: list[tuple[str, Game]] = [("identity", game)]
    for idx, emap in enumerate(maps or []):
        candidates.append((f"map[{idx}] d={np.round(emap.d, 6).tolist()}", transform_game(game, emap)))

    reports: list[CertificateReport] = []
    for label, g in candidates:
        try:
            reports.append(_with_transform(cert_near_individual(g, gamma), label))
        except InputError:
            pass
        fc = f_common
        if fc is None and all(v == g.values[0] for v in g.values):
            fc = g.values[0]
        if fc is not None:
            try:
                reports.append(_with_transform(cert_near_potential(g, fc, gamma), label))
            except InputError:
                pass
        for w0 in (w0_candidates if w0_candidates is not None else _sym_candidates(g)):
            try:
                reports.append(_with_transform(cert_near_symmetric(g, w0), label))
            except InputError:
                pass
    if not reports:
        raise InputError("no certificate was applicable to this game")
    return max(reports, key=lambda r: (r.passed, r.margin))


def _with_transform(report: CertificateReport, label: str) -> CertificateReport:
    return CertificateReport(
        theorem=report.theorem, gamma=report.gamma, matrix=report.matrix,
        sigma_max=report.sigma_max, threshold=report.threshold, margin=report.margin,
        verdict=report.verdict, notes=report.notes, details=report.details,
        transform=label,
    )


def _json_num(v):
    v = float(v)
    return v if math.isfinite(v) else None


def report_to_dict(report: CertificateReport) -> dict:
    """JSON-ready form of a certificate report, including the full matrix.

    Non-finite constants (inapplicable certificates) serialize as null.
    """
    return {
        "theorem": report.theorem,
        "gamma": [float(v) for v in report.gamma],
        "matrix": [[float(v) for v in row] for row in np.atleast_2d(report.matrix)],
        "sigma_max": _json_num(report.sigma_max),
        "threshold": _json_num(report.threshold),
        "margin": _json_num(report.margin),
        "verdict": report.verdict,
        "notes": list(report.notes),
        "details": report.details,
        "transform": report.transform,
    }
