import numpy as np
import pytest

from netgoods.functions import (
    LinearCost,
    LogValue,
    QuadraticClippedValue,
    QuadraticCost,
)
from netgoods.game import Game


@pytest.fixture
def n1_game():
    """Single player, f(k)=3k-k^2 clipped, c(x)=x^2/2 on [0, 2]; NE at x=1."""
    return Game(
        w=np.eye(1),
        lower=np.array([0.0]),
        upper=np.array([2.0]),
        values=(QuadraticClippedValue(a=3.0, b=1.0),),
        costs=(QuadraticCost(c0=1.0),),
    )


def make_fig1a_game():
    """Four players on two sides; unit weight across sides, zero within."""
    w = np.array(
        [
            [1.0, 0.0, 1.0, 1.0],
            [0.0, 1.0, 1.0, 1.0],
            [1.0, 1.0, 1.0, 0.0],
            [1.0, 1.0, 0.0, 1.0],
        ]
    )
    return Game(
        w=w,
        lower=np.zeros(4),
        upper=np.ones(4),
        values=tuple(QuadraticClippedValue(a=3.0, b=1.0) for _ in range(4)),
        costs=tuple(QuadraticCost(c0=1.0) for _ in range(4)),
    )


@pytest.fixture
def fig1a_game():
    return make_fig1a_game()


@pytest.fixture
def two_player_triangular():
    """W=[[1,1],[0,1]], homogeneous a=3,b=1,c0=1 on [0,1.5]; NE (1/3, 1)."""
    return Game(
        w=np.array([[1.0, 1.0], [0.0, 1.0]]),
        lower=np.zeros(2),
        upper=np.full(2, 1.5),
        values=tuple(QuadraticClippedValue(a=3.0, b=1.0) for _ in range(2)),
        costs=tuple(QuadraticCost(c0=1.0) for _ in range(2)),
    )


@pytest.fixture
def two_player_symmetric():
    """Symmetric w=0.5 coupling, homogeneous a=3,b=1,c0=1; interior NE at 0.75."""
    return Game(
        w=np.array([[1.0, 0.5], [0.5, 1.0]]),
        lower=np.zeros(2),
        upper=np.full(2, 1.2),
        values=tuple(QuadraticClippedValue(a=3.0, b=1.0) for _ in range(2)),
        costs=tuple(QuadraticCost(c0=1.0) for _ in range(2)),
    )


def random_small_interaction_game(rng, n=None, coupling=0.25):
    """Random game with weak coupling; most draws pass the near-individual certificate.

    Values are quadratics whose peak lies beyond any reachable gain, or logs;
    costs quadratic or linear.
    """
    if n is None:
        n = int(rng.integers(2, 9))
    r = coupling / n
    w = rng.uniform(-r, r, size=(n, n))
    np.fill_diagonal(w, 1.0)
    lower = np.zeros(n)
    upper = rng.uniform(0.5, 1.0, size=n)
    values = []
    costs = []
    for i in range(n):
        if rng.random() < 0.5:
            # peak a/(2b) beyond any reachable gain (row sums < 1 + 0.5 = 1.5 < 2)
            values.append(QuadraticClippedValue(a=float(rng.uniform(4.0, 6.0)), b=1.0))
        else:
            values.append(LogValue(a=float(rng.uniform(1.0, 3.0)), s=2.0))
        if rng.random() < 0.5:
            costs.append(QuadraticCost(c0=float(rng.uniform(0.5, 2.0))))
        else:
            costs.append(LinearCost(c1=float(rng.uniform(0.3, 1.0))))
    return Game(w=w, lower=lower, upper=upper, values=tuple(values), costs=tuple(costs))
