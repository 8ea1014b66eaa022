"""Scalar value and cost families with exact derivatives and smoothness constants.

Every family is a closed-form, immutable spec exposing zeroth/first/second
derivative oracles plus analytically exact (or certified-conservative)
curvature and Lipschitz constants over intervals.  Value families are concave
and non-decreasing; cost families are convex and non-decreasing.  All
evaluation methods accept scalars or numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InputError

#: grid resolution for the numeric Lipschitz fallback in closeness_sigma
CLOSENESS_GRID_POINTS = 10_000
#: safety inflation applied to grid-estimated Lipschitz constants
CLOSENESS_SAFETY = 1.05


@dataclass(frozen=True)
class SmoothnessReport:
    """Curvature/Lipschitz certificate for one spec over one interval.

    ``modulus`` is the strong-concavity modulus for value families and the
    strong-convexity modulus for cost families.  ``lipschitz_d2`` is None when
    the second derivative is discontinuous inside the interval (clipped
    family straddling its kink), in which case no finite constant exists.
    """

    lo: float
    hi: float
    modulus: float
    lipschitz_d1: float
    lipschitz_d2: float | None
    strictly_increasing: bool


class ScalarFunction:
    """Base class for the closed family of scalar functions."""

    kind: str  # "value" or "cost"

    def domain(self) -> tuple[float, float]:
        raise NotImplementedError

    def value(self, k):
        raise NotImplementedError

    def d1(self, k):
        raise NotImplementedError

    def d2(self, k):
        raise NotImplementedError

    def kinks(self) -> tuple[float, ...]:
        """Points where the second derivative jumps."""
        return ()

    def piecewise_linear_d1(self) -> bool:
        """True when d1 is piecewise linear, enabling exact closeness constants."""
        return False

    def increasing_cutoff(self) -> float:
        """Supremum of the region where d1 > 0 (inf if strictly increasing)."""
        return math.inf

    def modulus_on_increasing(self, lo: float, hi: float) -> float:
        """Curvature modulus over the part of [lo, hi] where d1 > 0.

        That is the only region an own-utility argmax can occupy, so it is the
        right curvature constant for best-response sensitivity bounds.
        Computed in the family's own coordinates, so the cutoff intersection
        is exact even under affine reparameterization.
        """
        hi_eff = min(hi, self.increasing_cutoff())
        if not lo < hi_eff:
            return 0.0
        return self.modulus_on(lo, hi_eff)

    def modulus_on(self, lo: float, hi: float) -> float:
        raise NotImplementedError

    def lipschitz_d1_on(self, lo: float, hi: float) -> float:
        raise NotImplementedError

    def lipschitz_d2_on(self, lo: float, hi: float) -> float | None:
        raise NotImplementedError

    def strictly_increasing_on(self, lo: float, hi: float) -> bool:
        raise NotImplementedError

    def contains(self, lo: float, hi: float) -> bool:
        dlo, dhi = self.domain()
        return dlo <= lo and hi <= dhi

    def require_interval(self, lo: float, hi: float) -> None:
        if not (np.isfinite(lo) and np.isfinite(hi)) or lo >= hi:
            raise InputError(f"invalid interval [{lo}, {hi}]")
        if not self.contains(lo, hi):
            raise DomainError(
                f"interval [{lo}, {hi}] not contained in domain {self.domain()} of {self!r}"
            )


@dataclass(frozen=True)
class QuadraticClippedValue(ScalarFunction):
    """a*k - b*k^2 up to the peak k = a/(2b), constant a^2/(4b) beyond.

    C1 but not C2 at the peak; derivative oracles at the kink report the
    unclipped-side values (d2 = -2b), which keeps f'' defined everywhere.
    """

    a: float
    b: float
    kind = "value"

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise InputError(f"QuadraticClippedValue needs a>0, b>0, got a={self.a}, b={self.b}")

    @property
    def clip_point(self) -> float:
        return self.a / (2.0 * self.b)

    def domain(self):
        return (-math.inf, math.inf)

    def value(self, k):
        k = np.asarray(k, dtype=float)
        out = np.where(k <= self.clip_point, self.a * k - self.b * k * k, self.a**2 / (4.0 * self.b))
        return out if out.ndim else float(out)

    def d1(self, k):
        k = np.asarray(k, dtype=float)
        out = np.where(k <= self.clip_point, self.a - 2.0 * self.b * k, 0.0)
        return out if out.ndim else float(out)

    def d2(self, k):
        k = np.asarray(k, dtype=float)
        out = np.where(k <= self.clip_point, -2.0 * self.b, 0.0)
        return out if out.ndim else float(out)

    def kinks(self):
        return (self.clip_point,)

    def piecewise_linear_d1(self):
        return True

    def increasing_cutoff(self):
        return self.clip_point

    def modulus_on(self, lo, hi):
        # the flat branch contributes no curvature
        return 2.0 * self.b if hi <= self.clip_point else 0.0

    def lipschitz_d1_on(self, lo, hi):
        # d1 is 2b-Lipschitz on the full domain; kept on any subinterval
        return 2.0 * self.b

    def lipschitz_d2_on(self, lo, hi):
        if lo <= self.clip_point < hi:
            return None  # d2 jumps inside the interval
        return 0.0

    def strictly_increasing_on(self, lo, hi):
        return hi <= self.clip_point


@dataclass(frozen=True)
class QuadraticCost(ScalarFunction):
    """(c0/2) * x^2 on x >= 0."""

    c0: float
    kind = "cost"

    def __post_init__(self):
        if not self.c0 > 0:
            raise InputError(f"QuadraticCost needs c0>0, got {self.c0}")

    def domain(self):
        return (0.0, math.inf)

    def value(self, x):
        x = np.asarray(x, dtype=float)
        out = 0.5 * self.c0 * x * x
        return out if out.ndim else float(out)

    def d1(self, x):
        x = np.asarray(x, dtype=float)
        out = self.c0 * x
        return out if out.ndim else float(out)

    def d2(self, x):
        x = np.asarray(x, dtype=float)
        out = np.full_like(x, self.c0)
        return out if out.ndim else float(out)

    def piecewise_linear_d1(self):
        return True

    def modulus_on(self, lo, hi):
        return self.c0

    def lipschitz_d1_on(self, lo, hi):
        return self.c0

    def lipschitz_d2_on(self, lo, hi):
        return 0.0

    def strictly_increasing_on(self, lo, hi):
        return True  # d1 vanishes only at the left domain endpoint


@dataclass(frozen=True)
class LinearCost(ScalarFunction):
    """c1 * x."""

    c1: float
    kind = "cost"

    def __post_init__(self):
        if not self.c1 > 0:
            raise InputError(f"LinearCost needs c1>0, got {self.c1}")

    def domain(self):
        return (-math.inf, math.inf)

    def value(self, x):
        x = np.asarray(x, dtype=float)
        out = self.c1 * x
        return out if out.ndim else float(out)

    def d1(self, x):
        x = np.asarray(x, dtype=float)
        out = np.full_like(x, self.c1)
        return out if out.ndim else float(out)

    def d2(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        return out if out.ndim else float(out)

    def piecewise_linear_d1(self):
        return True

    def modulus_on(self, lo, hi):
        return 0.0

    def lipschitz_d1_on(self, lo, hi):
        return 0.0

    def lipschitz_d2_on(self, lo, hi):
        return 0.0

    def strictly_increasing_on(self, lo, hi):
        return True


@dataclass(frozen=True)
class LogValue(ScalarFunction):
    """a * ln(s + k) on k > -s; strictly increasing, strictly concave."""

    a: float
    s: float
    kind = "value"

    def __post_init__(self):
        if not (self.a > 0 and self.s > 0):
            raise InputError(f"LogValue needs a>0, s>0, got a={self.a}, s={self.s}")

    def domain(self):
        return (-self.s, math.inf)

    def value(self, k):
        k = np.asarray(k, dtype=float)
        out = self.a * np.log(self.s + k)
        return out if out.ndim else float(out)

    def d1(self, k):
        k = np.asarray(k, dtype=float)
        out = self.a / (self.s + k)
        return out if out.ndim else float(out)

    def d2(self, k):
        k = np.asarray(k, dtype=float)
        out = -self.a / (self.s + k) ** 2
        return out if out.ndim else float(out)

    def modulus_on(self, lo, hi):
        return self.a / (self.s + hi) ** 2

    def lipschitz_d1_on(self, lo, hi):
        return self.a / (self.s + lo) ** 2

    def lipschitz_d2_on(self, lo, hi):
        return 2.0 * self.a / (self.s + lo) ** 3

    def strictly_increasing_on(self, lo, hi):
        return True


@dataclass(frozen=True)
class AffineReparam(ScalarFunction):
    """inner((y - shift) / scale): the affine change of variable used by game equivalence.

    Exact chain rule: g'(y) = inner'(t)/scale and g''(y) = inner''(t)/scale^2
    with t = (y - shift)/scale.  Smoothness constants rescale as modulus/scale^2,
    L1/scale^2 and L2/scale^3 of the inner spec over the pre-image interval.
    """

    inner: ScalarFunction
    scale: float
    shift: float

    def __post_init__(self):
        if not self.scale > 0:
            raise InputError(f"AffineReparam needs scale>0, got {self.scale}")

    @property
    def kind(self):
        return self.inner.kind

    def _pre(self, y):
        return (np.asarray(y, dtype=float) - self.shift) / self.scale

    def _pre_interval(self, lo, hi):
        return (lo - self.shift) / self.scale, (hi - self.shift) / self.scale

    def domain(self):
        ilo, ihi = self.inner.domain()
        lo = -math.inf if ilo == -math.inf else ilo * self.scale + self.shift
        hi = math.inf if ihi == math.inf else ihi * self.scale + self.shift
        return (lo, hi)

    def value(self, y):
        out = np.asarray(self.inner.value(self._pre(y)))
        return out if out.ndim else float(out)

    def d1(self, y):
        out = np.asarray(self.inner.d1(self._pre(y))) / self.scale
        return out if out.ndim else float(out)

    def d2(self, y):
        out = np.asarray(self.inner.d2(self._pre(y))) / self.scale**2
        return out if out.ndim else float(out)

    def kinks(self):
        return tuple(k * self.scale + self.shift for k in self.inner.kinks())

    def piecewise_linear_d1(self):
        return self.inner.piecewise_linear_d1()

    def increasing_cutoff(self):
        cut = self.inner.increasing_cutoff()
        return math.inf if cut == math.inf else cut * self.scale + self.shift

    def modulus_on_increasing(self, lo, hi):
        # delegate before intersecting so the inner cutoff is used exactly,
        # with no float round-trip through the mapped coordinates
        return self.inner.modulus_on_increasing(*self._pre_interval(lo, hi)) / self.scale**2

    def modulus_on(self, lo, hi):
        return self.inner.modulus_on(*self._pre_interval(lo, hi)) / self.scale**2

    def lipschitz_d1_on(self, lo, hi):
        return self.inner.lipschitz_d1_on(*self._pre_interval(lo, hi)) / self.scale**2

    def lipschitz_d2_on(self, lo, hi):
        l2 = self.inner.lipschitz_d2_on(*self._pre_interval(lo, hi))
        return None if l2 is None else l2 / self.scale**3

    def strictly_increasing_on(self, lo, hi):
        return self.inner.strictly_increasing_on(*self._pre_interval(lo, hi))


def evaluate(spec: ScalarFunction, point: float) -> tuple[float, float, float]:
    """Exact (value, d1, d2) at a point inside the declared domain."""
    dlo, dhi = spec.domain()
    if not (dlo <= point <= dhi):
        raise DomainError(f"point {point} outside domain [{dlo}, {dhi}] of {spec!r}")
    return float(spec.value(point)), float(spec.d1(point)), float(spec.d2(point))


def smoothness(spec: ScalarFunction, interval: tuple[float, float]) -> SmoothnessReport:
    """Analytically exact smoothness constants of a spec over an interval."""
    lo, hi = float(interval[0]), float(interval[1])
    spec.require_interval(lo, hi)
    return SmoothnessReport(
        lo=lo,
        hi=hi,
        modulus=float(spec.modulus_on(lo, hi)),
        lipschitz_d1=float(spec.lipschitz_d1_on(lo, hi)),
        lipschitz_d2=spec.lipschitz_d2_on(lo, hi),
        strictly_increasing=spec.strictly_increasing_on(lo, hi),
    )


def closeness_sigma(
    f_i: ScalarFunction,
    f: ScalarFunction,
    gamma: float,
    interval: tuple[float, float],
) -> float:
    """Lipschitz constant of h(k) = gamma*f_i'(k) - f'(k) over an interval.

    Exact when both first derivatives are piecewise linear (the quadratic
    families); otherwise the maximum slope over a dense deterministic grid,
    inflated by a 5% safety factor.
    """
    if gamma <= 0:
        raise InputError(f"gamma must be positive, got {gamma}")
    lo, hi = float(interval[0]), float(interval[1])
    f_i.require_interval(lo, hi)
    f.require_interval(lo, hi)

    if f_i.piecewise_linear_d1() and f.piecewise_linear_d1():
        cuts = sorted(k for k in set(f_i.kinks()) | set(f.kinks()) if lo < k < hi)
        edges = [lo, *cuts, hi]
        sigma = 0.0
        for left, right in zip(edges[:-1], edges[1:]):
            mid = 0.5 * (left + right)
            sigma = max(sigma, abs(gamma * float(f_i.d2(mid)) - float(f.d2(mid))))
        return sigma

    grid = np.linspace(lo, hi, CLOSENESS_GRID_POINTS)
    h = gamma * np.asarray(f_i.d1(grid)) - np.asarray(f.d1(grid))
    step = grid[1] - grid[0]
    return float(np.max(np.abs(np.diff(h))) / step) * CLOSENESS_SAFETY


# --- serialization -----------------------------------------------------------

_FAMILY_TAGS = {
    QuadraticClippedValue: "quadratic_clipped_value",
    QuadraticCost: "quadratic_cost",
    LinearCost: "linear_cost",
    LogValue: "log_value",
    AffineReparam: "affine_reparam",
}


def spec_to_dict(spec: ScalarFunction) -> dict:
    """Serialize a spec as {"family": tag, "params": {...}}."""
    tag = _FAMILY_TAGS.get(type(spec))
    if tag is None:
        raise InputError(f"unknown function family {type(spec).__name__}")
    if isinstance(spec, QuadraticClippedValue):
        params = {"a": spec.a, "b": spec.b}
    elif isinstance(spec, QuadraticCost):
        params = {"c0": spec.c0}
    elif isinstance(spec, LinearCost):
        params = {"c1": spec.c1}
    elif isinstance(spec, LogValue):
        params = {"a": spec.a, "s": spec.s}
    else:
        params = {
            "inner": spec_to_dict(spec.inner),
            "scale": spec.scale,
            "shift": spec.shift,
        }
    return {"family": tag, "params": params}


def spec_from_dict(doc: dict, where: str = "spec") -> ScalarFunction:
    """Parse a serialized spec; errors name the offending field."""
    if not isinstance(doc, dict):
        raise InputError(f"{where}: expected an object, got {type(doc).__name__}")
    for key in ("family", "params"):
        if key not in doc:
            raise InputError(f"{where}: missing required field '{key}'")
    family, params = doc["family"], doc["params"]
    if not isinstance(params, dict):
        raise InputError(f"{where}.params: expected an object")

    def _num(name):
        if name not in params:
            raise InputError(f"{where}.params: missing '{name}' for family '{family}'")
        v = params[name]
        if not isinstance(v, (int, float)) or isinstance(v, bool):
            raise InputError(f"{where}.params.{name}: expected a number, got {v!r}")
        return float(v)

    try:
        if family == "quadratic_clipped_value":
            return QuadraticClippedValue(a=_num("a"), b=_num("b"))
        if family == "quadratic_cost":
            return QuadraticCost(c0=_num("c0"))
        if family == "linear_cost":
            return LinearCost(c1=_num("c1"))
        if family == "log_value":
            return LogValue(a=_num("a"), s=_num("s"))
        if family == "affine_reparam":
            if "inner" not in params:
                raise InputError(f"{where}.params: missing 'inner'")
            inner = spec_from_dict(params["inner"], where=f"{where}.params.inner")
            return AffineReparam(inner=inner, scale=_num("scale"), shift=_num("shift"))
    except InputError:
        raise
    except Exception as exc:  # parameter constraint violations carry context
        raise InputError(f"{where}: {exc}") from exc
    raise InputError(f"{where}.family: unknown family '{family}'")
