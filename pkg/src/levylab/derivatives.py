"""First and second x1-partials of smooth norms on R^3.

For a power-Orlicz norm (which covers l_q, 2 <= q < inf, and the Euclidean
norm), implicit differentiation of the defining equation
sum_k M(|x_k| / s) = 1 gives closed forms at points with nonnegative
coordinates:

    d1 = ||x|| M'(x1/||x||) / sum_k x_k M'(x_k/||x||)
    d2 = [ (||x|| - x1 d1)^2 M''(x1/||x||)
           + x2^2 d1^2 M''(x2/||x||) + x3^2 d1^2 M''(x3/||x||) ]
         / [ ||x||^2 sum_k x_k M'(x_k/||x||) ]

The norm is even in each coordinate, so general points reduce to the
nonnegative orthant: d1 picks up the sign of x1 and d2 is even in x1.
d1 is homogeneous of degree 0 and d2 of degree -1; inputs are prescaled by
an exact power of two so the formulas stay in a well-conditioned range.

``fd_d1`` / ``fd_d2`` are the independent central-difference oracles; they
see only the norm itself, never the analytic formulas.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .norms import NormSpec, OrliczFunction, norm_batch

FD_STEP_FLOOR = 1e-5


class DerivativeError(RuntimeError):
    """Internal inconsistency: the implicit-differentiation denominator
    vanished at a point with (x2, x3) != 0, which a valid convex power
    combination cannot produce (M'(t) > 0 for t > 0)."""


@dataclass(frozen=True)
class DerivativePair:
    d1: float
    d2: float


def _pow2_scale(ax: np.ndarray) -> np.ndarray:
    """Per-row exact power-of-two scale near max|x_k| (1 for zero rows)."""
    m = ax.max(axis=1)
    safe = np.where(m > 0.0, m, 1.0)
    return np.exp2(np.round(np.log2(safe)))


def _power_orlicz_norm(fn: OrliczFunction, ax: np.ndarray) -> np.ndarray:
    """Norm of nonnegative rows; single-term M(t) = t^q has the l_q closed form."""
    if len(fn.terms) == 1:
        q = fn.terms[0][1]
        m = ax.max(axis=1)
        safe = np.where(m > 0.0, m, 1.0)
        out = safe * ((ax / safe[:, None]) ** q).sum(axis=1) ** (1.0 / q)
        return np.where(m > 0.0, out, 0.0)
    return norm_batch(NormSpec(kind="orlicz", dim=ax.shape[1], orlicz=fn), ax)


def d1_d2_norm_batch(fn: OrliczFunction, xs) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Row-wise (d1, d2, ||x||) for an (m, 3) array of points, (x2, x3) != 0."""
    xs = np.asarray(xs, dtype=float)
    if xs.ndim != 2 or xs.shape[1] != 3:
        raise ValueError(f"expected an (m, 3) array, got shape {xs.shape}")
    sign1 = np.sign(xs[:, 0])
    ax = np.abs(xs)
    if np.any((ax[:, 1] == 0.0) & (ax[:, 2] == 0.0)):
        raise ValueError("points with (x2, x3) = (0, 0) are outside the smooth region")
    scale = _pow2_scale(ax)
    ax = ax / scale[:, None]
    nrm = _power_orlicz_norm(fn, ax)
    u = ax / nrm[:, None]
    mp = fn.deriv(u)
    denom_lin = (ax * mp).sum(axis=1)
    if np.any(denom_lin <= 0.0) or np.any(~np.isfinite(denom_lin)):
        raise DerivativeError("denominator sum x_k M'(x_k/||x||) vanished off the x1-axis")
    d1 = nrm * mp[:, 0] / denom_lin
    mpp = fn.deriv2(u)
    num = ((nrm - ax[:, 0] * d1) ** 2 * mpp[:, 0]
           + ax[:, 1] ** 2 * d1 ** 2 * mpp[:, 1]
           + ax[:, 2] ** 2 * d1 ** 2 * mpp[:, 2])
    d2 = num / (nrm ** 2 * denom_lin)
    return sign1 * d1, d2 / scale, nrm * scale


def d1_d2_batch(fn: OrliczFunction, xs) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise (d1, d2) for an (m, 3) array of points with (x2, x3) != 0."""
    d1, d2, _ = d1_d2_norm_batch(fn, xs)
    return d1, d2


def orlicz_d1(fn: OrliczFunction, x) -> float:
    """Analytic d||x||/dx1 at a single point."""
    d1, _ = d1_d2_batch(fn, np.asarray(x, dtype=float)[None, :])
    return float(d1[0])


def orlicz_d2(fn: OrliczFunction, x) -> float:
    """Analytic d^2||x||/dx1^2 at a single point; nonnegative."""
    _, d2 = d1_d2_batch(fn, np.asarray(x, dtype=float)[None, :])
    return float(d2[0])


def section_derivatives(spec: NormSpec, x) -> DerivativePair:
    """(d1, d2) of the x1-section of ``spec`` at ``x`` via the analytic route."""
    fn = spec.as_power_orlicz()
    d1s, d2s = d1_d2_batch(fn, np.asarray(x, dtype=float)[None, :])
    return DerivativePair(d1=float(d1s[0]), d2=float(d2s[0]))


def _default_step(spec: NormSpec, x) -> float:
    from .norms import eval_norm

    return max(FD_STEP_FLOOR, FD_STEP_FLOOR * eval_norm(spec, x))


def fd_d1(spec: NormSpec, x, h: float | None = None) -> float:
    """Central difference (||x + h e1|| - ||x - h e1||) / 2h."""
    x = np.asarray(x, dtype=float)
    if h is None:
        h = _default_step(spec, x)
    shifts = np.array([h] + [0.0] * (spec.dim - 1))
    plus, minus = norm_batch(spec, np.stack([x + shifts, x - shifts]))
    return float((plus - minus) / (2.0 * h))


def fd_d2(spec: NormSpec, x, h: float | None = None) -> float:
    """Central second difference (||x + h e1|| - 2||x|| + ||x - h e1||) / h^2."""
    x = np.asarray(x, dtype=float)
    if h is None:
        h = _default_step(spec, x)
    shifts = np.array([h] + [0.0] * (spec.dim - 1))
    plus, mid, minus = norm_batch(spec, np.stack([x + shifts, x, x - shifts]))
    return float((plus - 2.0 * mid + minus) / (h * h))
