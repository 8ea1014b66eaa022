"""Acceptance suite: one test per criterion, each printing a PASS line.

Run with -s to see the per-criterion lines; every tolerance here is part of
the package's contract, not a tunable.
"""

import time

import numpy as np
import pytest

from conftest import make_fig1a_game
from netgoods.casestudy import case2_pipeline, monte_carlo_case1
from netgoods.certificates import (
    cert_near_individual,
    cert_near_potential,
    cert_near_symmetric,
    certify_any,
    jacobi_eigenvalues,
    spectral_bounds,
)
from netgoods.dynamics import (
    fit_exponential,
    fit_inverse_linear,
    integrate_pseudo_gradient,
    integrate_sw_flow,
)
from netgoods.equilibrium import grid_oracle, multi_start_probe, solve_ne, solve_regularized, verify_ne
from netgoods.equivalence import EquivalenceMap, map_profile, transform_game
from netgoods.functions import LinearCost, LogValue, QuadraticClippedValue, QuadraticCost
from netgoods.game import Game, br_gap, utility_profile
from netgoods.statics import equilibrium_derivative, fd_check, utility_derivative


def n1_game():
    return Game(
        w=np.eye(1), lower=np.zeros(1), upper=np.array([2.0]),
        values=(QuadraticClippedValue(a=3.0, b=1.0),),
        costs=(QuadraticCost(c0=1.0),),
    )


def two_player_half():
    return Game(
        w=np.array([[1.0, 0.5], [0.5, 1.0]]), lower=np.zeros(2), upper=np.full(2, 1.2),
        values=tuple(QuadraticClippedValue(a=3.0, b=1.0) for _ in range(2)),
        costs=tuple(QuadraticCost(c0=1.0) for _ in range(2)),
    )


def test_criterion_01_multi_ne_example():
    t0 = time.monotonic()
    g = make_fig1a_game()
    out = grid_oracle(g, m=15, eps=1e-8)
    found = sorted(tuple(np.round(x, 9)) for x in out)
    interior = np.linspace(0, 1, 15)[6]
    expected = sorted(
        [(1.0, 1.0, 0.0, 0.0), (0.0, 0.0, 1.0, 1.0), tuple(np.round([interior] * 4, 9))]
    )
    assert found == expected
    for x in out:
        assert verify_ne(g, np.asarray(x), 1e-8)[0]
    clusters = multi_start_probe(g, n_starts=50, seed=7)
    assert len(clusters) >= 2
    elapsed = time.monotonic() - t0
    assert elapsed < 30.0
    print(f"\nACCEPTANCE 1 PASS: grid oracle returns exactly the three verified NEs, "
          f"{len(clusters)} solver clusters ({elapsed:.1f}s)")


def test_criterion_02_existence_path_linear_costs():
    t0 = time.monotonic()
    w = np.array([[1.0, 0.3, 0.2], [0.1, 1.0, 0.3], [0.2, 0.2, 1.0]])
    g = Game(
        w=w, lower=np.zeros(3), upper=np.full(3, 2.0),
        values=tuple(QuadraticClippedValue(a=3.0, b=1.0) for _ in range(3)),
        costs=tuple(LinearCost(c1=1.0) for _ in range(3)),
    )
    betas = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6]
    res = solve_regularized(g, betas)
    ok, gap, _ = verify_ne(g, res.x_star, 1e-4)
    assert ok
    elapsed = time.monotonic() - t0
    assert elapsed < 5.0
    print(f"ACCEPTANCE 2 PASS: regularization path lands on a 1e-4 NE "
          f"(gap {gap:.2e}, {elapsed:.1f}s)")


def test_criterion_03_welfare_dynamics_rates():
    t0 = time.monotonic()
    # exponential regime: 3-strongly-concave welfare decays at rate 2*3
    traj = integrate_sw_flow(n1_game(), np.zeros(1), step=1e-2, horizon=3.0)
    gaps = 1.5 - traj.sw
    fit = fit_exponential(traj.times, gaps)
    assert fit.rate == pytest.approx(-6.0, rel=0.10)

    # flat-curvature regime: linear costs, value curvatures spread over
    # decades so no uniform modulus exists; the welfare gap tracks 1/t
    n = 10
    b = 2.0 * 0.5 ** np.arange(n)
    a = 1.0 + 2.0 * b
    g = Game(
        w=np.eye(n), lower=np.zeros(n), upper=np.full(n, 1.3),
        values=tuple(QuadraticClippedValue(a=float(a[i]), b=float(b[i])) for i in range(n)),
        costs=tuple(LinearCost(c1=1.0) for _ in range(n)),
    )
    traj = integrate_sw_flow(g, np.full(n, 1.2), step=0.05, horizon=50.0)
    sw_star = utility_profile(g, np.ones(n))[1]
    gaps = sw_star - traj.sw
    assert np.all(gaps > 0)
    inv = fit_inverse_linear(traj.times, gaps)
    expo = fit_exponential(traj.times, gaps)
    assert inv.r_squared > 0.99
    assert expo.r_squared <= inv.r_squared
    elapsed = time.monotonic() - t0
    assert elapsed < 10.0
    print(f"ACCEPTANCE 3 PASS: exponential rate {fit.rate:.2f} (target -6 +-10%), "
          f"inverse-linear r2 {inv.r_squared:.4f} > exponential r2 {expo.r_squared:.4f} "
          f"({elapsed:.1f}s)")


def _certified_interior_candidate(rng):
    n = int(rng.integers(2, 21))
    r = 0.15 / n
    w = rng.uniform(-r, r, size=(n, n))
    np.fill_diagonal(w, 1.0)
    kind = rng.integers(0, 3)
    if kind == 0:
        values = [QuadraticClippedValue(a=float(rng.uniform(1.2, 2.2)), b=1.0) for _ in range(n)]
        costs = [QuadraticCost(c0=float(rng.uniform(0.8, 2.0))) for _ in range(n)]
        upper = np.full(n, 1.0)
    elif kind == 1:
        values = [LogValue(a=float(rng.uniform(1.0, 3.0)), s=2.0) for _ in range(n)]
        costs = [QuadraticCost(c0=float(rng.uniform(0.8, 2.0))) for _ in range(n)]
        upper = np.full(n, 1.2)
    else:
        values = [LogValue(a=float(rng.uniform(1.5, 2.5)), s=2.0) for _ in range(n)]
        costs = [LinearCost(c1=float(rng.uniform(0.6, 0.9))) for _ in range(n)]
        upper = np.full(n, 1.2)
    return Game(w=w, lower=np.zeros(n), upper=upper,
                values=tuple(values), costs=tuple(costs))


def test_criterion_04_contraction_convergence():
    # the exponential-decay claim describes interior equilibria (projection
    # pinning converges even faster, breaking a two-sided fit), so the pool
    # conditions on certified instances whose NE is interior
    t0 = time.monotonic()
    rng = np.random.default_rng(4242)
    checked = 0
    attempts = 0
    while checked < 100:
        attempts += 1
        assert attempts < 500, "generator failed to produce certified instances"
        g = _certified_interior_candidate(rng)
        if not certify_any(g).passed:
            continue
        res = solve_ne(g, tol=1e-12, keep_iterates=True, x0=g.lower.copy())
        assert res.converged
        margin = float(np.min(np.minimum(res.x_star - g.lower, g.upper - res.x_star)))
        if margin < 1e-3:
            continue
        checked += 1
        d = np.max(np.abs(res.iterates - res.x_star[None, :]), axis=1)
        keep = np.nonzero(d > 1e-10)[0]
        fit = fit_exponential(keep.astype(float), d[keep])
        assert fit.r_squared > 0.99, f"instance {checked}: r2 {fit.r_squared}"
        assert fit.rate < 0
        clusters = multi_start_probe(g, n_starts=20, seed=1, cluster_tol=1e-5)
        assert len(clusters) == 1, f"instance {checked}: {len(clusters)} clusters"
    elapsed = time.monotonic() - t0
    assert elapsed < 120.0
    print(f"ACCEPTANCE 4 PASS: {checked} certified interior instances, every decay "
          f"exponential (r2 > 0.99), every 20-start probe single-cluster ({elapsed:.1f}s)")


def test_criterion_05_certificate_zero_cases():
    # weak coupling, trivially: no off-diagonal interactions at all
    g1 = Game(
        w=np.eye(3), lower=np.zeros(3), upper=np.full(3, 0.6),
        values=tuple(QuadraticClippedValue(a=3.0, b=1.0) for _ in range(3)),
        costs=tuple(QuadraticCost(c0=1.0) for _ in range(3)),
    )
    r1 = cert_near_individual(g1)
    assert r1.passed and np.array_equal(r1.matrix, np.zeros((3, 3)))

    # identical-interest limit: all-ones W, identical players
    f = LogValue(a=2.0, s=2.0)
    g2 = Game(
        w=np.ones((3, 3)), lower=np.zeros(3), upper=np.ones(3),
        values=tuple(f for _ in range(3)),
        costs=tuple(QuadraticCost(c0=1.0) for _ in range(3)),
    )
    r2 = cert_near_potential(g2, f)
    assert r2.passed and np.array_equal(r2.matrix, np.zeros((3, 3)))

    # flat costs with a positive-definite symmetric network, W0 = W
    w = np.array([[1.0, 0.4, 0.0], [0.4, 1.0, 0.3], [0.0, 0.3, 1.0]])
    assert float(np.min(np.linalg.eigvalsh(w))) > 0
    g3 = Game(
        w=w, lower=np.zeros(3), upper=np.ones(3),
        values=tuple(LogValue(a=2.0, s=1.0) for _ in range(3)),
        costs=tuple(LinearCost(c1=0.5) for _ in range(3)),
    )
    r3 = cert_near_symmetric(g3, w)
    assert r3.passed and np.array_equal(r3.matrix, np.zeros((3, 3)))
    print("ACCEPTANCE 5 PASS: all three trivial certificates pass with exact-zero matrices")


def test_criterion_06_equivalence_transport():
    rng = np.random.default_rng(606)
    for pair in range(50):
        n = int(rng.integers(1, 7))
        r = 0.3 / n
        w = rng.uniform(-r, r, size=(n, n))
        np.fill_diagonal(w, 1.0)
        g = Game(
            w=w, lower=np.zeros(n), upper=rng.uniform(0.8, 1.5, size=n),
            values=tuple(
                QuadraticClippedValue(a=float(rng.uniform(2.0, 4.0)), b=1.0) for _ in range(n)
            ),
            costs=tuple(QuadraticCost(c0=float(rng.uniform(0.5, 2.0))) for _ in range(n)),
        )
        emap = EquivalenceMap(
            d=rng.uniform(0.5, 2.0, size=n), b=rng.uniform(-0.3, 0.3, size=n)
        )
        g2 = transform_game(g, emap)

        for _ in range(20):
            x = rng.uniform(g.lower, g.upper)
            u1, _ = utility_profile(g, x)
            u2, _ = utility_profile(g2, map_profile(emap, x, "forward"))
            assert np.max(np.abs(u2 - u1)) < 1e-10

        # NE status transported in both directions at matched tolerance
        x_ne = solve_ne(g, tol=1e-12).x_star
        y_ne = map_profile(emap, x_ne, "forward")
        assert verify_ne(g, x_ne, 1e-8)[0] and verify_ne(g2, y_ne, 1e-8)[0]
        x_off = np.clip(x_ne + 0.25 * (g.upper - g.lower), g.lower, g.upper)
        gap1 = br_gap(g, x_off)[0]
        gap2 = br_gap(g2, map_profile(emap, x_off, "forward"))[0]
        assert abs(gap1 - gap2) < 1e-9
        assert verify_ne(g, x_off, 1e-8)[0] == verify_ne(g2, map_profile(emap, x_off, "forward"), 1e-8)[0]

        back = transform_game(g2, emap.inverse())
        assert np.max(np.abs(back.w - g.w)) < 1e-12
        assert np.max(np.abs(back.lower - g.lower)) < 1e-12
        assert np.max(np.abs(back.upper - g.upper)) < 1e-12
        for _ in range(5):
            x = rng.uniform(g.lower, g.upper)
            u1, _ = utility_profile(g, x)
            ub, _ = utility_profile(back, x)
            assert np.max(np.abs(ub - u1)) < 1e-12
    print("ACCEPTANCE 6 PASS: 50 random transforms preserve utilities (1e-10), "
          "NE status both ways, and round-trip games (1e-12)")


def test_criterion_07_comparative_statics_closed_form():
    g1 = n1_game()
    x1 = np.array([1.0])
    res1 = utility_derivative(g1, x1, np.array([1.0]))
    # n=1 envelope value: u'(0) = f'(k*) * delta exactly
    assert abs(res1.du_dt[0] - 1.0) <= 1e-10
    rep1 = fd_check(g1, x1, np.array([1.0]), t=1e-4)
    assert rep1.du_rel_err < 1e-3 and rep1.dx_rel_err < 1e-3

    g2 = two_player_half()
    x2 = np.full(2, 0.75)
    rng = np.random.default_rng(707)
    fp = np.array([float(g2.values[i].d1(1.125)) for i in range(2)])
    for _ in range(5):
        delta = rng.normal(size=2)
        res2 = utility_derivative(g2, x2, delta)
        rhs = fp * delta + fp * ((g2.w - np.eye(2)) @ res2.dx_dt)
        assert np.max(np.abs(res2.du_dt - rhs)) < 1e-9
    rep2 = fd_check(g2, x2, np.array([1.0, 0.0]), t=1e-4)
    assert rep2.du_rel_err < 1e-3 and rep2.dx_rel_err < 1e-3
    print("ACCEPTANCE 7 PASS: closed forms match finite differences (<1e-3), "
          "consistency identity holds (<1e-9), n=1 envelope exact (1e-10)")


def test_criterion_08_case1_quantities():
    t0 = time.monotonic()
    rep = monte_carlo_case1(50, 1.0, 3.0, 1.0, 1.0, samples=1000, seed=808)
    assert rep.closed_delta_mean == pytest.approx(2.9008)
    assert abs(rep.emp_delta_mean - 2.9008) <= 4 * rep.se_delta_mean
    assert abs(rep.emp_delta_var - rep.closed_delta_var) <= 4 * rep.se_delta_var
    assert rep.bound == pytest.approx(36.17, abs=0.01)
    assert rep.frac_inf_norm_within >= 0.5
    elapsed = time.monotonic() - t0
    assert elapsed < 120.0
    print(f"ACCEPTANCE 8 PASS: mean {rep.emp_delta_mean:.4f} ~ 2.9008, "
          f"var {rep.emp_delta_var:.3f} ~ {rep.closed_delta_var:.3f}, "
          f"bound fraction {rep.frac_inf_norm_within:.3f} >= 0.5 ({elapsed:.1f}s)")


def test_criterion_09_case2_pipeline():
    for n in (2, 3, 4, 5):
        rep = case2_pipeline(n, 3.0, 1.0, 1.0, density=1.0, seed=909, x_upper=1.5)
        assert rep.certificate.passed and rep.certificate.margin > 0
        assert rep.solver_vs_backward < 1e-6
        if n == 2:
            assert np.allclose(rep.x_backward, [1 / 3, 1.0], atol=1e-9)
    print("ACCEPTANCE 9 PASS: n=2..5 full-density pipelines certify with positive "
          "margin and solver == backward induction (1e-6); n=2 NE is (1/3, 1)")


def test_criterion_10_numerics():
    # spectral: power-iteration route vs Jacobi route on M^T M
    rng = np.random.default_rng(1010)
    for _ in range(100):
        n = int(rng.integers(1, 21))
        m = rng.normal(size=(n, n))
        sigma_power, _ = spectral_bounds(m)
        sigma_jacobi = float(np.sqrt(max(0.0, jacobi_eigenvalues(m.T @ m)[-1])))
        assert abs(sigma_power - sigma_jacobi) < 1e-8

    # RK4 order: halving the step cuts the global error by at least 8x
    g = n1_game()
    exact = 1.0 - np.exp(-3.0)
    errs = []
    for h in (0.02, 0.01):
        traj = integrate_pseudo_gradient(g, np.ones(1), np.zeros(1), step=h, horizon=1.0)
        errs.append(abs(traj.final_state[0] - exact))
    assert errs[0] / errs[1] >= 8.0

    # linear-solve residual on the statics systems
    g2 = two_player_half()
    x2 = np.full(2, 0.75)
    rng = np.random.default_rng(1011)
    for _ in range(20):
        delta = rng.normal(size=2)
        dx = equilibrium_derivative(g2, x2, delta)
        fpp = np.array([float(g2.values[i].d2(1.125)) for i in range(2)])
        cpp = np.array([float(g2.costs[i].d2(0.75)) for i in range(2)])
        a = np.diag(cpp) - fpp[:, None] * g2.w
        assert float(np.max(np.abs(a @ dx - fpp * delta))) < 1e-10
    print(f"ACCEPTANCE 10 PASS: spectral routes agree (1e-8), RK4 order ratio "
          f"{errs[0] / errs[1]:.1f} >= 8, statics LU residuals < 1e-10")
