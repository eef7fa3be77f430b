"""Piecewise-linear function algebra: evaluation, shape verification, cut extraction.

A function is stored as a sorted breakpoint list plus linear extension slopes
beyond the first and last breakpoint, so it is defined on the whole real line.
Convex (resp. concave) functions are exactly representable as the max (resp.
min) of their supporting lines ("cuts"), which is what the LP compiler needs.
"""
from __future__ import annotations

import dataclasses
from typing import Iterable, Sequence

import numpy as np

CONVEX = "convex"
CONCAVE = "concave"
NONDECREASING = "nondecreasing"

VALID_FLAGS = (CONVEX, CONCAVE, NONDECREASING)

# Breakpoints are user inputs, not computed values, so slope comparisons can be
# near-exact.
SLOPE_TOL = 1e-12


@dataclasses.dataclass(frozen=True)
class ShapeReport:
    """Result of checking a slope sequence against required shape flags."""

    ok: bool
    violations: tuple[tuple[str, int], ...] = ()

    def first_violation(self) -> tuple[str, int] | None:
        return self.violations[0] if self.violations else None

    def message(self) -> str:
        if self.ok:
            return "shape verified"
        parts = [f"not {flag} at segment {idx}" for flag, idx in self.violations]
        return "; ".join(parts)


def _check_slopes(slopes: np.ndarray, required: Iterable[str]) -> ShapeReport:
    violations: list[tuple[str, int]] = []
    for flag in required:
        if flag not in VALID_FLAGS:
            raise ValueError(f"unknown shape flag {flag!r}")
        if flag == CONVEX:
            bad = np.nonzero(np.diff(slopes) < -SLOPE_TOL)[0]
            if bad.size:
                violations.append((CONVEX, int(bad[0]) + 1))
        elif flag == CONCAVE:
            bad = np.nonzero(np.diff(slopes) > SLOPE_TOL)[0]
            if bad.size:
                violations.append((CONCAVE, int(bad[0]) + 1))
        else:
            bad = np.nonzero(slopes < -SLOPE_TOL)[0]
            if bad.size:
                violations.append((NONDECREASING, int(bad[0])))
    return ShapeReport(ok=not violations, violations=tuple(violations))


@dataclasses.dataclass(frozen=True)
class PwlFunction:
    """Piecewise-linear function with linear extensions and declared shape flags.

    Immutable after construction; safe to share across concurrent readers.
    """

    breakpoints: tuple[tuple[float, float], ...]
    left_slope: float
    right_slope: float
    shape: tuple[str, ...] = ()
    provenance: str = "unspecified"

    def __post_init__(self) -> None:
        pts = tuple((float(x), float(y)) for x, y in self.breakpoints)
        if not pts:
            raise ValueError("PwlFunction needs at least one breakpoint")
        xs = [p[0] for p in pts]
        if any(not np.isfinite(v) for p in pts for v in p):
            raise ValueError("breakpoints must be finite")
        if any(b - a <= 0 for a, b in zip(xs, xs[1:])):
            raise ValueError("breakpoint arguments must be strictly increasing")
        if not (np.isfinite(self.left_slope) and np.isfinite(self.right_slope)):
            raise ValueError("extension slopes must be finite")
        object.__setattr__(self, "breakpoints", pts)
        object.__setattr__(self, "left_slope", float(self.left_slope))
        object.__setattr__(self, "right_slope", float(self.right_slope))
        object.__setattr__(self, "shape", tuple(self.shape))
        if self.shape:
            report = self.verify_shape(self.shape)
            if not report.ok:
                raise ValueError(f"declared shape does not verify: {report.message()}")

    # -- geometry ----------------------------------------------------------

    def slopes(self) -> np.ndarray:
        """Slope sequence: left extension, interior segments, right extension."""
        xs = np.array([p[0] for p in self.breakpoints])
        ys = np.array([p[1] for p in self.breakpoints])
        interior = np.diff(ys) / np.diff(xs) if len(xs) > 1 else np.empty(0)
        return np.concatenate(([self.left_slope], interior, [self.right_slope]))

    def evaluate(self, x):
        """Exact piecewise-linear value at `x` (scalar or array), total on reals."""
        xs = np.array([p[0] for p in self.breakpoints])
        ys = np.array([p[1] for p in self.breakpoints])
        arr = np.asarray(x, dtype=float)
        out = np.interp(arr, xs, ys)
        below = arr < xs[0]
        above = arr > xs[-1]
        if np.any(below):
            out = np.where(below, ys[0] + self.left_slope * (arr - xs[0]), out)
        if np.any(above):
            out = np.where(above, ys[-1] + self.right_slope * (arr - xs[-1]), out)
        if np.isscalar(x) or np.ndim(x) == 0:
            return float(out)
        return out

    def verify_shape(self, required: Sequence[str]) -> ShapeReport:
        """Accept iff the slope sequence satisfies every required flag."""
        return _check_slopes(self.slopes(), required)

    def cuts(self) -> tuple[tuple[float, float], ...]:
        """Supporting lines as (slope, intercept) pairs, one per distinct slope.

        For convex f, f(x) = max over cuts of slope*x + intercept; for concave
        f the max becomes a min. Rejects functions that are neither.
        """
        convex = self.verify_shape([CONVEX]).ok
        concave = self.verify_shape([CONCAVE]).ok
        if not (convex or concave):
            raise ValueError("cuts require a convex or concave function")
        slopes = self.slopes()
        # Anchor point for each piece: the breakpoint where the piece starts
        # (extensions anchor at the first/last breakpoint).
        anchors = [self.breakpoints[0]] + list(self.breakpoints)
        result: list[tuple[float, float]] = []
        for slope, (ax, ay) in zip(slopes, anchors):
            if result and abs(slope - result[-1][0]) <= SLOPE_TOL:
                continue
            result.append((float(slope), float(ay - slope * ax)))
        return tuple(result)

    def max_cut_slope(self) -> float:
        return float(np.max(np.abs(self.slopes())))

    def scale(self, factor: float) -> "PwlFunction":
        """Scale function values by a positive factor; shape flags are preserved."""
        if factor <= 0:
            raise ValueError("scale factor must be positive")
        return PwlFunction(
            breakpoints=tuple((x, y * factor) for x, y in self.breakpoints),
            left_slope=self.left_slope * factor,
            right_slope=self.right_slope * factor,
            shape=self.shape,
            provenance=self.provenance,
        )


# -- constructors for the experiment shapes ---------------------------------


def linear(slope: float) -> PwlFunction:
    """Linear function through the origin."""
    flags = (CONVEX, CONCAVE) + ((NONDECREASING,) if slope >= 0 else ())
    return PwlFunction(((0.0, 0.0),), slope, slope, flags)


def capped_linear(slope: float, cap: float) -> PwlFunction:
    """Rises with `slope` up to argument `cap`, constant beyond (demand cap)."""
    if slope < 0 or cap <= 0:
        raise ValueError("capped_linear needs slope >= 0 and cap > 0")
    return PwlFunction(
        ((0.0, 0.0), (float(cap), float(slope * cap))),
        left_slope=slope,
        right_slope=0.0,
        shape=(CONCAVE, NONDECREASING),
    )


def hinge(slope: float) -> PwlFunction:
    """Zero on nonpositive arguments, rises with `slope` beyond zero."""
    if slope < 0:
        raise ValueError("hinge needs slope >= 0")
    return PwlFunction(((0.0, 0.0),), 0.0, float(slope), (CONVEX, NONDECREASING))


def zero() -> PwlFunction:
    return PwlFunction(((0.0, 0.0),), 0.0, 0.0, (CONVEX, CONCAVE, NONDECREASING))
