"""Potential data model: piecewise-constant and analytic decaying potentials.

A piecewise-constant potential is a step function with compact support,
described by ordered breakpoints a0 < a1 < ... < am and one amplitude per
interior interval; it evaluates to 0 outside [a0, am].  An analytic
potential wraps an evaluator together with a decay hint X0 beyond which
the absolute tail integral is negligible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Union

from scipy.integrate import quad

from .errors import (
    InfeasibleTriple,
    LengthMismatch,
    NonMonotoneBreakpoints,
    NonPositiveK,
    NotOneGap,
    TrivialPotential,
    ZeroIntegral,
)

__all__ = [
    "PiecewiseConstantPotential",
    "AnalyticPotential",
    "Potential",
    "GapKind",
    "SupportComponent",
    "GapStructure",
    "OneGapParams",
    "build_w",
    "l1_norm",
    "integral",
    "tail_l1",
    "classify_gaps",
    "one_gap_params",
    "synthesize_one_gap",
    "hrp_potential",
    "translate",
    "negate",
    "mirror",
    "transform",
    "to_record",
    "from_record",
]

_QUAD_TOL = 1e-10


@dataclass(frozen=True)
class PiecewiseConstantPotential:
    """Step function with breakpoints (a0..am) and one value per interval."""

    breakpoints: tuple[float, ...]
    values: tuple[float, ...]

    def __call__(self, x: float) -> float:
        """Evaluate; breakpoints take the right-limit value, outside is 0."""
        a = self.breakpoints
        if x < a[0] or x >= a[-1]:
            return 0.0
        # rightmost j with a[j] <= x; value of interval (a[j], a[j+1])
        lo, hi = 0, len(a) - 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if a[mid] <= x:
                lo = mid
            else:
                hi = mid
        return self.values[lo]

    @property
    def piece_lengths(self) -> tuple[float, ...]:
        a = self.breakpoints
        return tuple(a[j + 1] - a[j] for j in range(len(a) - 1))

    def support_hull(self) -> tuple[float, float] | None:
        """Convex hull [min supp, max supp] of the support, or None if V == 0."""
        nz = [j for j, v in enumerate(self.values) if v != 0.0]
        if not nz:
            return None
        return self.breakpoints[nz[0]], self.breakpoints[nz[-1] + 1]


@dataclass(frozen=True)
class AnalyticPotential:
    """Decaying potential given by an evaluator plus a tail cutoff hint.

    decay_hint is a position X0 such that the tail integral of |V| beyond
    X >= X0 is negligible for every use in this package; it is supplied by
    the caller because it is known analytically, not detected.
    """

    evaluator: Callable[[float], float]
    decay_hint: float
    name: str = ""

    def __call__(self, x: float) -> float:
        return self.evaluator(x)


Potential = Union[PiecewiseConstantPotential, AnalyticPotential]


class GapKind(Enum):
    NO_GAP = "no-gap"
    ONE_GAP = "one-gap"
    MULTI_GAP = "multi-gap"


@dataclass(frozen=True)
class SupportComponent:
    """Maximal run of nonzero pieces: its interval and its integral."""

    lo: float
    hi: float
    integral: float


@dataclass(frozen=True)
class GapStructure:
    kind: GapKind
    gap_count: int
    components: tuple[SupportComponent, ...]


@dataclass(frozen=True)
class OneGapParams:
    """Gap shape ratio alpha = tanh(k * gap length) and block-imbalance beta."""

    alpha: float
    beta: float
    k: float


def build_w(breakpoints, values) -> PiecewiseConstantPotential:
    """Construct a compactly supported step potential.

    Raises NonMonotoneBreakpoints unless the breakpoints strictly increase,
    and LengthMismatch unless len(values) == len(breakpoints) - 1.
    """
    bp = tuple(float(b) for b in breakpoints)
    vals = tuple(float(v) for v in values)
    if len(bp) < 2:
        raise LengthMismatch("need at least two breakpoints")
    if len(vals) != len(bp) - 1:
        raise LengthMismatch(
            f"{len(bp)} breakpoints require {len(bp) - 1} values, got {len(vals)}"
        )
    for a, b in zip(bp, bp[1:]):
        if not (b > a):
            raise NonMonotoneBreakpoints(f"breakpoints not strictly increasing at {a!r}, {b!r}")
    return PiecewiseConstantPotential(bp, vals)


def canonicalize(V: PiecewiseConstantPotential) -> PiecewiseConstantPotential:
    """Merge adjacent equal-valued pieces and strip zero-valued end pieces.

    Evaluates to the same function; used for structural comparisons and gap
    classification.  Returns a potential with no pieces at all (two equal-ish
    breakpoints are impossible, so a fully zero V keeps one zero piece).
    """
    bp, vals = list(V.breakpoints), list(V.values)
    # merge runs of equal values
    mbp, mvals = [bp[0]], []
    for j, v in enumerate(vals):
        if mvals and v == mvals[-1]:
            mbp[-1] = bp[j + 1]
        else:
            mvals.append(v)
            mbp.append(bp[j + 1])
    # strip zero edges (keep at least one piece)
    while len(mvals) > 1 and mvals[0] == 0.0:
        mvals.pop(0)
        mbp.pop(0)
    while len(mvals) > 1 and mvals[-1] == 0.0:
        mvals.pop()
        mbp.pop()
    return PiecewiseConstantPotential(tuple(mbp), tuple(mvals))


def l1_norm(V: Potential) -> float:
    """Integral of |V| over the line (exact for steps, quadrature otherwise)."""
    if isinstance(V, PiecewiseConstantPotential):
        return sum(abs(v) * ln for v, ln in zip(V.values, V.piece_lengths))
    total, _ = quad(lambda x: abs(V(x)), -V.decay_hint, V.decay_hint,
                    epsabs=_QUAD_TOL, epsrel=_QUAD_TOL, limit=400, points=[0.0])
    lo, _ = quad(lambda x: abs(V(x)), -math.inf, -V.decay_hint, epsabs=_QUAD_TOL)
    hi, _ = quad(lambda x: abs(V(x)), V.decay_hint, math.inf, epsabs=_QUAD_TOL)
    return total + lo + hi


def integral(V: Potential) -> float:
    """Integral of V over the line."""
    if isinstance(V, PiecewiseConstantPotential):
        return sum(v * ln for v, ln in zip(V.values, V.piece_lengths))
    total, _ = quad(V, -V.decay_hint, V.decay_hint,
                    epsabs=_QUAD_TOL, epsrel=_QUAD_TOL, limit=400, points=[0.0])
    lo, _ = quad(V, -math.inf, -V.decay_hint, epsabs=_QUAD_TOL)
    hi, _ = quad(V, V.decay_hint, math.inf, epsabs=_QUAD_TOL)
    return total + lo + hi


def tail_l1(V: Potential, X: float) -> float:
    """Integral of |V| over |x| > X (zero beyond the support of a step V)."""
    if X < 0:
        raise ValueError("X must be >= 0")
    if isinstance(V, PiecewiseConstantPotential):
        total = 0.0
        a = V.breakpoints
        for j, v in enumerate(V.values):
            if v == 0.0:
                continue
            lo, hi = a[j], a[j + 1]
            # overlap of (lo, hi) with (-inf, -X) and (X, inf)
            left = max(0.0, min(hi, -X) - lo)
            right = max(0.0, hi - max(lo, X))
            total += abs(v) * min(hi - lo, left + right)
        return total
    lo, _ = quad(lambda x: abs(V(x)), -math.inf, -X, epsabs=1e-13)
    hi, _ = quad(lambda x: abs(V(x)), X, math.inf, epsabs=1e-13)
    return lo + hi


def classify_gaps(V: PiecewiseConstantPotential) -> GapStructure:
    """Split the support into maximal nonzero components separated by gaps.

    Interior zero-valued pieces of positive length are gaps; zero pieces
    outside the support hull are padding and ignored.
    """
    W = canonicalize(V)
    if all(v == 0.0 for v in W.values):
        raise TrivialPotential("cannot classify the zero potential")
    comps = []
    a = W.breakpoints
    j = 0
    while j < len(W.values):
        if W.values[j] == 0.0:
            j += 1
            continue
        start = j
        acc = 0.0
        while j < len(W.values) and W.values[j] != 0.0:
            acc += W.values[j] * (a[j + 1] - a[j])
            j += 1
        comps.append(SupportComponent(a[start], a[j], acc))
    gaps = len(comps) - 1
    kind = GapKind.NO_GAP if gaps == 0 else GapKind.ONE_GAP if gaps == 1 else GapKind.MULTI_GAP
    return GapStructure(kind, gaps, tuple(comps))


def one_gap_params(V: PiecewiseConstantPotential, k: float) -> OneGapParams:
    """Shape parameters (alpha, beta) of a one-gap potential.

    alpha = tanh(k * gap length) in (0, 1); beta = |v1 - v2| / |v1 + v2|
    where v1, v2 are the two component integrals.  Raises ZeroIntegral when
    v1 + v2 == 0 (beta undefined; the real spectrum is then finite and the
    caller should use the finite-count prediction instead).
    """
    if k <= 0:
        raise NonPositiveK("k must be positive")
    gs = classify_gaps(V)
    if gs.kind is not GapKind.ONE_GAP:
        raise NotOneGap(f"potential has {gs.gap_count} gaps, need exactly 1")
    c1, c2 = gs.components
    v1, v2 = c1.integral, c2.integral
    if v1 + v2 == 0.0:
        raise ZeroIntegral("v1 + v2 == 0: beta undefined")
    alpha = math.tanh(k * (c2.lo - c1.hi))
    beta = abs((v1 - v2) / (v1 + v2))
    return OneGapParams(alpha, beta, k)


def synthesize_one_gap(v: float, A: float, u: float, k: float = 1.0) -> PiecewiseConstantPotential:
    """Build a one-gap step potential with |integral| = v, L1-norm = u and
    asymptotic counting slope A / pi.

    Requires 0 < v < A < u.  The construction picks an intermediate weight w
    in (A, u) with w/v protected against small-denominator rational
    approximation (a sqrt(2)-scaled offset), so the density prediction lands
    on the irrational branch, then solves for the gap length that makes the
    closed-form density equal A / v.
    """
    if k <= 0:
        raise NonPositiveK("k must be positive")
    if not (0.0 < v < A < u):
        raise InfeasibleTriple(f"need 0 < v < A < u, got v={v}, A={A}, u={u}")

    base = 0.5 * (u + v)
    if base <= A:
        base = 0.5 * (A + u)
    span = min(u - base, base - A)
    bump = math.sqrt(2.0) * 1e-3 * v
    while bump >= 0.5 * span:
        bump *= 0.5
    w = base + bump

    beta = w / v
    target = A / v  # in (1, beta)

    from scipy.optimize import brentq

    from .asymptotics import nu  # local import: asymptotics depends on this module

    lo = 1.0 / beta * (1.0 + 1e-12)
    hi = 1.0 - 1e-14
    alpha = brentq(lambda a: nu(a, beta) - target, lo, hi, xtol=1e-15, rtol=8.9e-16)
    g = math.atanh(alpha) / k

    v0 = 0.5 * (u - w)
    v1 = 0.5 * (v - w)
    v2 = 0.5 * (v + w)
    return build_w([-1.0, 0.0, g, g + 1.0, g + 2.0], [v1, 0.0, v2 + v0, -v0])


def _sech_well(x: float) -> float:
    # cosh overflows near |x| ~ 710; the tail is exactly 0 to double precision
    if abs(x) > 700.0:
        return 0.0
    return -1.0 / math.cosh(x)


def hrp_potential() -> AnalyticPotential:
    """The analytic reference well -1/cosh(x); tail beyond |x|=40 is < 1e-16."""
    return AnalyticPotential(_sech_well, decay_hint=40.0, name="hrp")


def translate(V: Potential, c: float) -> Potential:
    """Shift the potential by c: x -> V(x - c)."""
    if isinstance(V, PiecewiseConstantPotential):
        return PiecewiseConstantPotential(tuple(b + c for b in V.breakpoints), V.values)
    f = V.evaluator
    return AnalyticPotential(lambda x: f(x - c), V.decay_hint + abs(c))


def negate(V: Potential) -> Potential:
    """Pointwise sign flip."""
    if isinstance(V, PiecewiseConstantPotential):
        return PiecewiseConstantPotential(V.breakpoints, tuple(-v for v in V.values))
    f = V.evaluator
    return AnalyticPotential(lambda x: -f(x), V.decay_hint)


def mirror(V: Potential) -> Potential:
    """Spatial reflection: x -> V(-x)."""
    if isinstance(V, PiecewiseConstantPotential):
        bp = tuple(-b for b in reversed(V.breakpoints))
        return PiecewiseConstantPotential(bp, tuple(reversed(V.values)))
    f = V.evaluator
    return AnalyticPotential(lambda x: f(-x), V.decay_hint)


def transform(V: Potential, op: str, shift: float = 0.0) -> Potential:
    """Dispatch on op in {'translate', 'negate', 'mirror'}."""
    if op == "translate":
        return translate(V, shift)
    if op == "negate":
        return negate(V)
    if op == "mirror":
        return mirror(V)
    raise ValueError(f"unknown transform {op!r}")


# --- serialization -----------------------------------------------------------
#
# Flat text record, one key=value per line.  Floats are written with repr()
# so the piecewise round trip is bit exact.

_NAMED_ANALYTIC: dict[str, Callable[[], AnalyticPotential]] = {
    "hrp": hrp_potential,
}


def to_record(V: Potential) -> str:
    if isinstance(V, PiecewiseConstantPotential):
        bp = ",".join(repr(b) for b in V.breakpoints)
        vals = ",".join(repr(v) for v in V.values)
        return f"kind=piecewise\nbreakpoints={bp}\nvalues={vals}\n"
    if not V.name:
        raise ValueError("only named analytic potentials serialize")
    return f"kind=analytic\nname={V.name}\n"


def from_record(text: str) -> Potential:
    fields = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, val = line.partition("=")
        fields[key.strip()] = val.strip()
    kind = fields.get("kind")
    if kind == "piecewise":
        bp = [float(s) for s in fields["breakpoints"].split(",")]
        vals = [float(s) for s in fields["values"].split(",")] if fields.get("values") else []
        return build_w(bp, vals)
    if kind == "analytic":
        name = fields.get("name", "")
        if name not in _NAMED_ANALYTIC:
            raise ValueError(f"unknown analytic potential {name!r}")
        return _NAMED_ANALYTIC[name]()
    raise ValueError(f"unknown record kind {kind!r}")
