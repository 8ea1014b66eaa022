"""Affine game equivalence: transforms preserving utilities and transporting NEs.

A positive scaling vector d and offset vector b reparameterize a game as
W' = D W D^{-1} with affinely mapped boxes; value/cost specs are wrapped in
the matching affine change of variable, so u'_i at the mapped profile equals
u_i at the original one and NEs map one-to-one in both directions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .functions import AffineReparam, QuadraticClippedValue, QuadraticCost
from .game import Game

#: transformed box bounds beyond this magnitude are rejected (cancellation risk)
MAX_MAPPED_BOUND = 1e12


@dataclass(frozen=True)
class EquivalenceMap:
    """Scaling d > 0 and offset b; the induced gain shifts m are derived.

    m is always recomputed from the source game's interaction matrix,
    never stored or user-supplied, so the map cannot drift out of sync.
    """

    d: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        d = np.array(self.d, dtype=float)
        b = np.array(self.b, dtype=float)
        if d.ndim != 1 or b.shape != d.shape:
            raise InputError("d and b must be equal-length vectors")
        if np.any(d <= 0) or not np.all(np.isfinite(d)) or not np.all(np.isfinite(b)):
            raise InputError("need finite d > 0 and finite b")
        d.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "b", b)

    @property
    def n(self) -> int:
        return self.d.size

    def shifts(self, game: Game) -> np.ndarray:
        """Gain shifts m_i = d_i * sum_j w_ij b_j / d_j, from the source game."""
        if game.n != self.n:
            raise InputError(f"map is for {self.n} players, game has {game.n}")
        return self.d * (game.w @ (self.b / self.d))

    def inverse(self) -> "EquivalenceMap":
        """The map sending the transformed game back to the source."""
        return EquivalenceMap(d=1.0 / self.d, b=-self.b / self.d)

    def to_dict(self) -> dict:
        return {"d": [float(v) for v in self.d], "b": [float(v) for v in self.b]}

    @staticmethod
    def from_dict(doc: dict, where: str = "map") -> "EquivalenceMap":
        for key in ("d", "b"):
            if key not in doc:
                raise InputError(f"{where}: missing required field '{key}'")
        return EquivalenceMap(d=np.asarray(doc["d"], dtype=float),
                              b=np.asarray(doc["b"], dtype=float))


def transform_game(game: Game, emap: EquivalenceMap) -> Game:
    """Build the equivalent game under (d, b).

    W' = D W D^{-1} keeps the unit diagonal exactly; boxes map affinely; the
    cost of player i becomes c_i((y - b_i)/d_i) and the value f_i((k - m_i)/d_i).
    """
    if game.n != emap.n:
        raise InputError(f"map is for {emap.n} players, game has {game.n}")
    d, b = emap.d, emap.b
    m = emap.shifts(game)
    w2 = (d[:, None] * game.w) / d[None, :]
    np.fill_diagonal(w2, 1.0)
    lower2 = d * game.lower + b
    upper2 = d * game.upper + b
    if np.max(np.abs(np.concatenate([lower2, upper2]))) > MAX_MAPPED_BOUND:
        raise InputError(f"mapped bounds exceed {MAX_MAPPED_BOUND:g}; map rejected")
    def reparam(spec, scale, shift):
        if scale == 1.0 and shift == 0.0:
            return spec
        return AffineReparam(inner=spec, scale=float(scale), shift=float(shift))

    values2 = tuple(reparam(game.values[i], d[i], m[i]) for i in range(game.n))
    costs2 = tuple(reparam(game.costs[i], d[i], b[i]) for i in range(game.n))
    return Game(w=w2, lower=lower2, upper=upper2, values=values2, costs=costs2)


def map_profile(
    emap: EquivalenceMap,
    x: np.ndarray,
    direction: str = "forward",
    game: Game | None = None,
) -> np.ndarray:
    """Map a profile x across the equivalence: forward y = d*x + b, inverse x = (y-b)/d.

    When the source game is supplied, the input (and the mapped output) are
    checked against the corresponding boxes; an infeasible result signals an
    inconsistent map.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (emap.n,):
        raise InputError(f"profile must have shape ({emap.n},), got {x.shape}")
    if direction == "forward":
        y = emap.d * x + emap.b
    elif direction == "inverse":
        y = (x - emap.b) / emap.d
    else:
        raise InputError(f"direction must be 'forward' or 'inverse', got {direction!r}")
    if game is not None:
        lo, hi = game.lower, game.upper
        if direction == "forward":
            src_lo, src_hi = lo, hi
            dst_lo, dst_hi = emap.d * lo + emap.b, emap.d * hi + emap.b
        else:
            src_lo, src_hi = emap.d * lo + emap.b, emap.d * hi + emap.b
            dst_lo, dst_hi = lo, hi
        tol = 1e-9 * np.maximum(1.0, np.abs(src_hi - src_lo))
        if np.any(x < src_lo - tol) or np.any(x > src_hi + tol):
            raise InputError("profile infeasible in the source of the map")
        tol = 1e-9 * np.maximum(1.0, np.abs(dst_hi - dst_lo))
        if np.any(y < dst_lo - tol) or np.any(y > dst_hi + tol):
            raise InputError("mapped profile infeasible in the target (inconsistent map)")
    return y


def _homogeneous_quadratic_params(game: Game) -> tuple[float, float]:
    """(b, c0) when every player has the same clipped-quadratic value and quadratic cost."""
    v0, c0 = game.values[0], game.costs[0]
    if not isinstance(v0, QuadraticClippedValue) or not isinstance(c0, QuadraticCost):
        raise InputError(
            "auto epsilon needs homogeneous clipped-quadratic values and quadratic costs"
        )
    if any(v != v0 for v in game.values) or any(c != c0 for c in game.costs):
        raise InputError("auto epsilon needs identical players")
    return v0.b, c0.c0


def auto_epsilon(game: Game) -> float:
    """90% of the contraction bound b/(n(b+c0)) for the homogeneous quadratic family."""
    b, c0 = _homogeneous_quadratic_params(game)
    return 0.9 * b / (game.n * (b + c0))


def upper_triangular_normalizer(game: Game, eps: float | str = "auto") -> EquivalenceMap:
    """Scaling map d_i = eps^-i shrinking an upper-triangular W's couplings to <= eps.

    Requires w_ij = 0 below the diagonal and |w_ij| <= 1 above it; the
    transformed couplings become eps^(j-i) * w_ij.  In auto mode, eps is
    derived from the homogeneous quadratic family's contraction bound.
    """
    w = game.w
    n = game.n
    il = np.tril_indices(n, k=-1)
    if np.any(w[il] != 0.0):
        raise InputError("W must be upper-triangular (w_ij = 0 for i > j)")
    iu = np.triu_indices(n, k=1)
    if np.any(np.abs(w[iu]) > 1.0 + 1e-12):
        raise InputError("need |w_ij| <= 1 above the diagonal")
    if eps == "auto":
        eps = auto_epsilon(game)
    eps = float(eps)
    if not 0 < eps < 1:
        raise InputError(f"need 0 < eps < 1, got {eps}")
    d = eps ** -(1.0 + np.arange(n))
    return EquivalenceMap(d=d, b=np.zeros(n))
