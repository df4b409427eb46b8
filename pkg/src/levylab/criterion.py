"""Quantitative second-derivative embedding test for three-dimensional norms.

A 3D normed space with normalized basis cannot embed isometrically in any
L_p, 0 < p <= 2, when its x1-sections satisfy three conditions:

  I.   d1 and d2 both vanish at x1 = 0 for every (x2, x3) != 0;
  II.  d2 is bounded by a constant K on the tube ||x2 e2 + x3 e3|| = 1;
  III. d2(x1, x2, x3) -> 0 as x1 -> 0, uniformly over that tube.

This module checks the three conditions on grids and produces a
machine-readable verdict. The grid scan is numerical evidence, not proof;
the analytic fast path :func:`check_orlicz_flatness` covers power-family
Orlicz norms exactly (conditions I-III all follow from M'(0) = M''(0) = 0,
i.e. every exponent above 2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .derivatives import d1_d2_batch
from .norms import NormSpec, OrliczFunction, subsphere_batch
from .parallel import parallel_map

APPLIES = "Applies"
FAILS_I = "FailsConditionI"
FAILS_II = "FailsConditionII"
FAILS_III = "FailsConditionIII"
NOT_APPLICABLE = "NotApplicable"

DEFAULT_THETA_COUNT = 720
DEFAULT_X1_MAX = 64.0
DEFAULT_TOL_I = 1e-8
DEFAULT_TOL_III = 1e-3
SCAN_X1_POINTS = 128
DECAY_LADDER = 26         # dyadic ladder x1 = 2^-k, k = 0..25
DECAY_MIN_STEPS = 10      # required monotone steps below the ladder's peak
TAIL_SHRINKS = 24

ASSUMPTIONS = (
    "second-derivative continuity is sampled on finite grids, not certified between nodes",
    "condition III is certified as numerical evidence by a finite dyadic decay profile",
)


@dataclass
class CriterionReport:
    spec_label: str
    verdict: str
    reason: str = ""
    cond_i_max_d1: float | None = None
    cond_i_max_d2: float | None = None
    k_hat: float | None = None
    k_hat_at_x1: float | None = None
    decay_profile: tuple[tuple[float, float], ...] = ()
    theta_count: int = 0
    x1_grid: str = ""
    tol_i: float = DEFAULT_TOL_I
    tol_iii: float = DEFAULT_TOL_III
    assumptions: tuple[str, ...] = ASSUMPTIONS


@dataclass(frozen=True)
class FlatnessResult:
    eligible: bool
    reasons: tuple[str, ...]
    note: str


def check_orlicz_flatness(fn: OrliczFunction) -> FlatnessResult:
    """Analytic shortcut: M'(0) = M''(0) = 0 iff every exponent exceeds 2.

    For power combinations this is exact, so a True result is proved for the
    family rather than sampled.
    """
    reasons = []
    d1z = fn.deriv_at_zero
    if d1z != 0.0:
        reasons.append(f"M'(0) = {d1z:g}")
    d2z = fn.deriv2_at_zero
    if d2z != 0.0:
        if math.isinf(d2z):
            bad = [f"{c:g}*t^{e:g}" for c, e in fn.terms if 1.0 < e < 2.0]
            reasons.append("M''(0) diverges (" + ", ".join(bad) + ")")
        else:
            reasons.append(f"M''(0) = {d2z:g}")
    eligible = not reasons
    note = ("proved for power families" if eligible
            else "first or second derivative of M does not vanish at 0")
    return FlatnessResult(eligible=eligible, reasons=tuple(reasons), note=note)


def _not_applicable(spec: NormSpec, reason: str, theta_count: int,
                    tol_i: float, tol_iii: float) -> CriterionReport:
    return CriterionReport(
        spec_label=spec.label, verdict=NOT_APPLICABLE, reason=reason,
        theta_count=theta_count, tol_i=tol_i, tol_iii=tol_iii,
    )


def second_derivative_test(
    spec: NormSpec,
    theta_count: int = DEFAULT_THETA_COUNT,
    x1_max: float = DEFAULT_X1_MAX,
    tol_i: float = DEFAULT_TOL_I,
    tol_iii: float = DEFAULT_TOL_III,
) -> CriterionReport:
    """Check conditions I-III on grids and return a verdict report.

    The supremum behind condition II is reduced to a compact scan plus a tail
    estimate: d2 is homogeneous of degree -1, so for x1 beyond the scan range
    d2(x1, y) = (1/x1) d2(1, y/x1), which is sampled over shrinking arguments.
    """
    if theta_count < 8:
        raise ValueError(f"theta_count must be at least 8, got {theta_count}")
    if not x1_max > 1e-5:
        raise ValueError(f"x1_max must exceed the scan floor 1e-6, got {x1_max}")
    if not (tol_i > 0.0 and tol_iii > 0.0):
        raise ValueError("tolerances must be positive")
    if spec.dim != 3:
        return _not_applicable(
            spec,
            f"requires dim = 3 (got dim = {spec.dim}); the test is vacuous in dim 2, "
            "where every normed plane embeds isometrically in L_p for p <= 1",
            theta_count, tol_i, tol_iii)
    if spec.kind == "lq" and spec.q == math.inf:
        return _not_applicable(
            spec, "q = inf: max-norm sections are not twice differentiable",
            theta_count, tol_i, tol_iii)
    if not spec.smooth_in_x1:
        detail = (f"q = {spec.q:g} < 2" if spec.kind == "lq"
                  else f"minimum Orlicz exponent {spec.orlicz.min_exponent:g} < 2")
        return _not_applicable(
            spec, f"x1-sections are not C^2 off the plane x1 = 0 ({detail})",
            theta_count, tol_i, tol_iii)

    fn = spec.as_power_orlicz()
    thetas = 2.0 * math.pi * np.arange(theta_count) / theta_count
    tube = subsphere_batch(spec, thetas)            # ||x2 e2 + x3 e3|| = 1

    def d2_at(x1_values: np.ndarray) -> np.ndarray:
        """sup-ready d2 grid: rows = x1 values, columns = tube points."""
        blocks = np.array_split(np.asarray(x1_values, dtype=float),
                                max(1, len(x1_values) // 16))

        def one_block(block):
            pts = np.concatenate([
                np.column_stack([np.full(len(tube), x1), tube]) for x1 in block
            ])
            _, d2 = d1_d2_batch(fn, pts)
            return d2.reshape(len(block), len(tube))

        return np.concatenate(parallel_map(one_block, blocks))

    # condition I: derivatives at x1 = 0 over the theta grid
    zero_pts = np.column_stack([np.zeros(len(tube)), tube])
    d1_zero, d2_zero = d1_d2_batch(fn, zero_pts)
    cond_i_max_d1 = float(np.max(np.abs(d1_zero)))
    cond_i_max_d2 = float(np.max(d2_zero))

    # condition II: scan x1 in logspace plus a homogeneity tail estimate
    x1_scan = np.logspace(-6.0, math.log10(x1_max), SCAN_X1_POINTS)
    scan = d2_at(x1_scan)
    scan_sup = scan.max(axis=1)
    k_scan_idx = int(np.argmax(scan_sup))
    k_scan = float(scan_sup[k_scan_idx])
    # the coarse grid can sit ~1% below the true peak; zoom in on it,
    # alternating x1 and theta refinements
    peak_x1 = float(x1_scan[k_scan_idx])
    peak_theta = float(thetas[int(np.argmax(scan[k_scan_idx]))])
    dx1 = float(x1_scan[min(k_scan_idx + 1, SCAN_X1_POINTS - 1)]
                - x1_scan[max(k_scan_idx - 1, 0)]) / 2.0 or peak_x1
    dtheta = 2.0 * math.pi / theta_count
    for _ in range(4):
        x1_local = np.linspace(max(peak_x1 - dx1, 1e-9), peak_x1 + dx1, 33)
        tube_pt = subsphere_batch(spec, np.array([peak_theta]))[0]
        pts = np.column_stack([x1_local,
                               np.full(len(x1_local), tube_pt[0]),
                               np.full(len(x1_local), tube_pt[1])])
        _, vals = d1_d2_batch(fn, pts)
        peak_x1 = float(x1_local[int(np.argmax(vals))])
        theta_local = np.linspace(peak_theta - dtheta, peak_theta + dtheta, 33)
        tube_local = subsphere_batch(spec, theta_local)
        pts = np.column_stack([np.full(len(theta_local), peak_x1), tube_local])
        _, vals = d1_d2_batch(fn, pts)
        peak_theta = float(theta_local[int(np.argmax(vals))])
        k_scan = max(k_scan, float(vals.max()))
        dx1 /= 8.0
        dtheta /= 8.0
    shrinks = 2.0 ** -np.arange(TAIL_SHRINKS)
    tail_vals = []
    for tau in shrinks:
        sigma = tau / x1_max                       # sigma = 1/x1 < 1/x1_max
        pts = np.column_stack([np.ones(len(tube)), tube * sigma])
        _, d2 = d1_d2_batch(fn, pts)
        tail_vals.append(sigma * float(d2.max()))
    tail_est = max(tail_vals)
    k_hat = max(k_scan, tail_est, cond_i_max_d2)
    cond_ii_ok = (k_scan_idx < SCAN_X1_POINTS - 1) and (tail_est <= k_scan)

    # condition III: dyadic decay profile of sup_theta d2 as x1 -> 0. The
    # ladder may rise toward the d2 peak first (the peak sits below x1 = 1
    # for flatter norms); only the stretch from the peak downward is evidence
    # about the limit, so the profile is reported from its maximum.
    dyadic = 2.0 ** -np.arange(DECAY_LADDER)
    ladder_sup = d2_at(dyadic).max(axis=1)
    peak = int(np.argmax(ladder_sup))
    decay_sup = ladder_sup[peak:]
    profile = tuple((float(x1), float(v)) for x1, v in zip(dyadic[peak:], decay_sup))
    monotone = bool(np.all(decay_sup[1:] <= decay_sup[:-1] * (1.0 + 1e-9)))
    cond_iii_ok = (monotone and len(decay_sup) - 1 >= DECAY_MIN_STEPS
                   and decay_sup[-1] <= tol_iii)

    if cond_i_max_d1 > tol_i or cond_i_max_d2 > tol_i:
        verdict, reason = FAILS_I, (
            f"derivatives at x1 = 0 do not vanish: max |d1| = {cond_i_max_d1:.3e}, "
            f"max d2 = {cond_i_max_d2:.3e} (tol {tol_i:g})")
    elif not cond_ii_ok:
        verdict, reason = FAILS_II, (
            "no finite bound certified: the scan supremum sits at the edge of the "
            f"x1 range (x1 = {x1_scan[k_scan_idx]:.3e}) or the tail estimate exceeds it")
    elif not cond_iii_ok:
        verdict, reason = FAILS_III, (
            f"sup_theta d2 does not decay monotonically below {tol_iii:g} along "
            f"x1 = 2^-k (final value {decay_sup[-1]:.3e})")
    else:
        verdict, reason = APPLIES, (
            "conditions I-III hold on the sampled grids: no isometric embedding "
            "into any L_p, 0 < p <= 2")

    return CriterionReport(
        spec_label=spec.label,
        verdict=verdict,
        reason=reason,
        cond_i_max_d1=cond_i_max_d1,
        cond_i_max_d2=cond_i_max_d2,
        k_hat=k_hat,
        k_hat_at_x1=peak_x1,
        decay_profile=profile,
        theta_count=theta_count,
        x1_grid=(f"logspace(1e-06, {x1_max:g}, {SCAN_X1_POINTS}) for the bound scan; "
                 f"2^-k, k = 0..{DECAY_LADDER - 1} for the decay ladder, "
                 "profile reported from its maximum"),
        tol_i=tol_i,
        tol_iii=tol_iii,
    )


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def report_text(report: CriterionReport) -> str:
    """Structured text serialization, field names matching the report."""
    lines = [
        f"spec: {report.spec_label}",
        f"verdict: {report.verdict}",
        f"reason: {report.reason}",
        f"cond_i_max_d1: {_fmt(report.cond_i_max_d1)}",
        f"cond_i_max_d2: {_fmt(report.cond_i_max_d2)}",
        f"K_hat: {_fmt(report.k_hat)}",
        f"K_hat_at_x1: {_fmt(report.k_hat_at_x1)}",
        f"theta_count: {report.theta_count}",
        f"x1_grid: {report.x1_grid}",
        f"tol_i: {_fmt(report.tol_i)}",
        f"tol_iii: {_fmt(report.tol_iii)}",
        f"decay_steps: {len(report.decay_profile)}",
    ]
    lines += [f"assumption: {a}" for a in report.assumptions]
    return "\n".join(lines) + "\n"


def decay_profile_csv(report: CriterionReport) -> str:
    """CSV rows (x1, sup_theta d2) of the condition-III decay profile."""
    rows = ["x1,sup_d2"]
    rows += [f"{_fmt(x1)},{_fmt(v)}" for x1, v in report.decay_profile]
    return "\n".join(rows) + "\n"
