"""Mollified second-derivative pairings and their Fourier-side counterpart.

For a smooth 3D norm and 0 < p < 1, pair the pointwise second x1-derivative
of ||x||^p,

    G(x) = p(p-1) ||x||^{p-2} d1(x)^2 + p ||x||^{p-1} d2(x),

against the separable bump phi_n(x) = h_n(x1) u(x2, x3), where

    h_n(t) = (n / sqrt(2 pi)) exp(-t^2 n^2 / 2),
    u(x2, x3) = (1 / 2 pi) exp(-(x2^2 + x3^2) / 2).

``lhs_integral`` evaluates <G, phi_n> by direct quadrature: adaptive
Gauss-Kronrod in x1 (truncated at |x1| <= 10/n, where the remaining h_n
mass is below 1e-20) tensored with polar (r, phi) in the (x2, x3)-plane
(r truncated at 12, where the remaining u mass is below 1e-30); the polar
Jacobian absorbs the r^{p-1} integrable singularity at the origin.

``rhs_value`` evaluates the same pairing through the Fourier transform when
the norm has a spherical representation ||x||^p = int |<x, xi>|^p dmu(xi):

    <G, phi_n> = C(p) * sum_j w_j xi_{j,1}^2
                 (xi_{j,1}^2 / n^2 + xi_{j,2}^2 + xi_{j,3}^2)^{(p-2)/2},
    C(p) = -2^{1 - p/2} Gamma(1 - p/2) c_p / (2 pi),

with c_p = 2^{p+1} sqrt(pi) Gamma((p+1)/2) / Gamma(-p/2) the Fourier
constant of |z|^p, negative on (0, 2), so C(p) > 0. Dropping the 1/n^2
term gives the n-independent lower bound C(p) * sum_j w_j xi_{j,1}^2.
``identity_check`` verifies lhs == rhs numerically for the Euclidean norm,
whose representing measure is the calibrated uniform one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .derivatives import d1_d2_norm_batch
from .levy import SphericalMeasure, uniform_calibrated_measure
from .norms import NormSpec
from .parallel import parallel_map
from .quadrature import QuadratureError, integrate

X1_CUT_FACTOR = 10.0     # |x1| <= 10/n keeps the missed h_n mass < 1e-20
R_CUT = 12.0             # r <= 12 keeps the missed u mass < 1e-30
PHI_START = 16
PHI_MAX = 256
DEFAULT_REL_TOL = 1e-4


def fourier_constant(p: float) -> float:
    """c_p = 2^{p+1} sqrt(pi) Gamma((p+1)/2) / Gamma(-p/2), via log-Gamma.

    Gamma(-p/2) is reached through the reflection formula
    Gamma(z) Gamma(1 - z) = pi / sin(pi z), which also supplies its sign.
    Negative for every p in (0, 2). Poles at even integers p >= 0.
    """
    if not p > -1.0:
        raise ValueError(f"p must exceed -1, got {p}")
    if p >= 0.0 and p == 2.0 * round(p / 2.0):
        raise ValueError(f"p = {p} is an even integer (pole of the constant)")
    # log|Gamma(-p/2)| = log pi - log|sin(-pi p/2)| - lgamma(1 + p/2)
    sin_term = math.sin(-math.pi * p / 2.0)
    log_abs_gamma_neg = (math.log(math.pi) - math.log(abs(sin_term))
                         - math.lgamma(1.0 + p / 2.0))
    log_abs = ((p + 1.0) * math.log(2.0) + 0.5 * math.log(math.pi)
               + math.lgamma((p + 1.0) / 2.0) - log_abs_gamma_neg)
    return math.copysign(math.exp(log_abs), sin_term)


@dataclass(frozen=True)
class Mollifier:
    """Gaussian bump h_n concentrating at 0 with unit mass."""

    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n}")

    def h(self, x1):
        x1 = np.asarray(x1, dtype=float)
        out = (self.n / math.sqrt(2.0 * math.pi)) * np.exp(-0.5 * (x1 * self.n) ** 2)
        return float(out) if out.ndim == 0 else out

    @property
    def cut(self) -> float:
        return X1_CUT_FACTOR / self.n

    def mass(self, rel_tol: float = 1e-12) -> float:
        """Quadrature of h_n over |x1| <= 12/n (missed tails < 1e-31)."""
        top = 12.0 / self.n
        res = integrate(self.h, 0.0, top, rel_tol=rel_tol,
                        breakpoints=[top * 2.0 ** -k for k in range(1, 8)])
        return 2.0 * res.scalar

    def tail_mass(self, delta: float) -> float:
        """Quadrature of h_n over |x1| > delta."""
        if delta <= 0.0:
            raise ValueError("delta must be positive")
        top = delta + 12.0 / self.n
        res = integrate(self.h, delta, top, rel_tol=1e-12,
                        breakpoints=[delta + (top - delta) * k / 8 for k in range(1, 8)])
        return 2.0 * res.scalar


def plane_bump(x2, x3):
    """u(x2, x3) = exp(-(x2^2 + x3^2)/2) / (2 pi)."""
    x2 = np.asarray(x2, dtype=float)
    x3 = np.asarray(x3, dtype=float)
    out = np.exp(-0.5 * (x2 * x2 + x3 * x3)) / (2.0 * math.pi)
    return float(out) if out.ndim == 0 else out


@dataclass
class LhsResult:
    value: float
    error: float
    term_first: float         # p(p-1) ||x||^{p-2} d1^2 part, nonpositive for p < 1
    term_second: float        # p ||x||^{p-1} d2 part, nonnegative
    n: int
    p: float
    spec_label: str
    phi_count: int
    x1_cut: float
    r_cut: float = R_CUT


def _x1_breakpoints(r: np.ndarray, cut: float) -> np.ndarray:
    """Per-row sorted breakpoints of the composite x1 rule on [0, cut].

    Geometric points track the feature scale of the degree-(p-2) homogeneous
    integrand (width ~ r); fixed fractions of the cut resolve h_n itself.
    """
    geo = r[:, None] * (4.0 ** np.arange(-1.0, 9.0))[None, :]
    fixed = cut * np.array([0.125, 0.25, 0.5, 0.75])
    bp = np.concatenate([geo, np.broadcast_to(fixed, (len(r), 4))], axis=1)
    bp = np.clip(bp, 0.0, cut)
    bp = np.sort(bp, axis=1)
    return np.concatenate([np.zeros((len(r), 1)), bp, np.full((len(r), 1), cut)], axis=1)


def _make_plane_integrand(spec: NormSpec, p: float, n: int):
    """Returns f(r, cos_phi, sin_phi) -> (len(r), 3) with components
    (first-term, second-term, inner x1 quadrature error), each already
    multiplied by u(x2, x3) * r."""
    fn = spec.as_power_orlicz()
    moll = Mollifier(n)
    cut = moll.cut

    from .quadrature import PANEL_NODES, panel_nodes, panel_sums

    def integrand(r: np.ndarray, cphi: float, sphi: float) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        bp = _x1_breakpoints(r, cut)
        lo = bp[:, :-1].ravel()
        hi = bp[:, 1:].ravel()
        panels_per_row = bp.shape[1] - 1
        xs1 = panel_nodes(lo, hi).ravel()
        reps = panels_per_row * PANEL_NODES
        r_rep = np.repeat(r, reps)
        pts = np.column_stack([xs1, r_rep * cphi, r_rep * sphi])
        d1, d2, nrm = d1_d2_norm_batch(fn, pts)
        hvals = moll.h(xs1)
        first = p * (p - 1.0) * nrm ** (p - 2.0) * d1 * d1 * hvals
        second = p * nrm ** (p - 1.0) * d2 * hvals
        vals = np.stack([first, second], axis=-1).reshape(-1, PANEL_NODES, 2)
        kron, err = panel_sums(vals, lo, hi)
        kron = kron.reshape(len(r), panels_per_row, 2).sum(axis=1)
        err_rows = err.reshape(len(r), panels_per_row).sum(axis=1)
        weight = 2.0 * plane_bump(r * cphi, r * sphi) * r   # 2: evenness in x1
        return np.column_stack([kron * weight[:, None], err_rows * weight])

    return integrand


def lhs_integral(spec: NormSpec, p: float, n: int,
                 rel_tol: float = DEFAULT_REL_TOL) -> LhsResult:
    """<G, phi_n> by tensor quadrature; raises QuadratureError if the
    a-posteriori error estimate cannot be brought below rel_tol."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1) for the mollified pairing, got {p}")
    if spec.dim != 3:
        raise ValueError(f"requires dim = 3, got {spec.dim}")
    if not spec.smooth_in_x1:
        raise ValueError("the x1-sections must be C^2 off the plane x1 = 0")
    moll = Mollifier(n)
    integrand = _make_plane_integrand(spec, p, n)
    r_breaks = [R_CUT * 2.0 ** -k for k in range(1, 49)]

    def r_integral(phi: float) -> np.ndarray:
        res = integrate(lambda r: integrand(r, math.cos(phi), math.sin(phi)),
                        0.0, R_CUT, rel_tol=1e-7, breakpoints=r_breaks,
                        max_panels=512)
        return np.array([res.value[0], res.value[1], res.value[2] + res.error])

    m = PHI_START
    phis = 2.0 * math.pi * np.arange(m) / m
    cache = dict(zip(phis.tolist(), parallel_map(r_integral, phis.tolist())))
    prev = None
    while True:
        vals = np.array([cache[phi] for phi in sorted(cache)])
        total = vals.mean(axis=0) * 2.0 * math.pi
        if prev is not None:
            phi_err = float(np.abs(total[:2] - prev[:2]).sum())
            value = float(total[0] + total[1])
            full_err = phi_err + float(total[2])
            if full_err <= rel_tol * max(abs(value), 1e-300) or m >= PHI_MAX:
                if full_err > rel_tol * abs(value):
                    raise QuadratureError(
                        f"error estimate {full_err:.3e} exceeds {rel_tol:g} * |{value:.6e}| "
                        f"at phi_count = {m}")
                return LhsResult(value=value, error=full_err,
                                 term_first=float(total[0]), term_second=float(total[1]),
                                 n=n, p=p, spec_label=spec.label, phi_count=m,
                                 x1_cut=moll.cut)
        prev = total
        m *= 2
        new_phis = [2.0 * math.pi * k / m for k in range(1, m, 2)]
        cache.update(zip(new_phis, parallel_map(r_integral, new_phis)))


def rhs_value(p: float, n: int, measure: SphericalMeasure) -> tuple[float, float]:
    """Fourier-side pairing value and its n-independent lower bound.

    Both are nonnegative: the prefactor C(p) = -2^{1-p/2} Gamma(1-p/2) c_p
    / (2 pi) is positive because c_p < 0 on (0, 2).
    """
    if not 0.0 < p < 2.0:
        raise ValueError(f"p must lie in (0, 2), got {p}")
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    if measure.size and measure.directions.shape[1] != 3:
        raise ValueError("the Fourier-side pairing is defined for dim 3 measures")
    prefactor = (-(2.0 ** (1.0 - p / 2.0)) * math.gamma(1.0 - p / 2.0)
                 * fourier_constant(p) / (2.0 * math.pi))
    if measure.size == 0:
        return 0.0, 0.0
    xi = measure.directions
    if np.any(~xi.any(axis=1)):
        raise ValueError("a direction with all-zero components is not a direction")
    xi1_sq = xi[:, 0] ** 2
    rest = xi[:, 1] ** 2 + xi[:, 2] ** 2
    value = prefactor * float(np.sum(
        measure.weights * xi1_sq * (xi1_sq / n ** 2 + rest) ** ((p - 2.0) / 2.0)))
    lower = prefactor * float(np.sum(measure.weights * xi1_sq))
    return value, lower


@dataclass
class DemoRow:
    n: int
    lhs: float
    lhs_err: float
    rhs: float | None = None
    lower_bound: float | None = None

    @property
    def rel_gap(self) -> float | None:
        if self.rhs is None or self.rhs == 0.0:
            return None
        return abs(self.lhs - self.rhs) / abs(self.rhs)


@dataclass
class DemoReport:
    spec_label: str
    p: float
    rows: list[DemoRow]
    measure_atoms: int = 0
    x1_cut_factor: float = X1_CUT_FACTOR
    r_cut: float = R_CUT

    @property
    def max_rel_gap(self) -> float | None:
        gaps = [row.rel_gap for row in self.rows if row.rel_gap is not None]
        return max(gaps) if gaps else None


def demo_run(spec: NormSpec, p: float, n_list=(2, 4, 8, 16, 32),
             measure_count: int = 2048, rel_tol: float = DEFAULT_REL_TOL) -> DemoReport:
    """Mollified-pairing sweep over n; for the Euclidean norm the Fourier
    side is evaluated against the calibrated uniform measure as well."""
    measure = uniform_calibrated_measure(p, measure_count) if spec.kind == "euclidean" else None
    rows = []
    for n in n_list:
        lhs = lhs_integral(spec, p, n, rel_tol=rel_tol)
        if measure is not None:
            rhs, lower = rhs_value(p, n, measure)
            rows.append(DemoRow(n=n, lhs=lhs.value, lhs_err=lhs.error,
                                rhs=rhs, lower_bound=lower))
        else:
            rows.append(DemoRow(n=n, lhs=lhs.value, lhs_err=lhs.error))
    return DemoReport(spec_label=spec.label, p=p, rows=rows,
                      measure_atoms=measure.size if measure is not None else 0)


def identity_check(p: float, n_list=(4, 8, 16, 32), measure_count: int = 2048,
                   rel_gap_tol: float = 2e-2) -> DemoReport:
    """Both routes to the pairing for the Euclidean norm must agree within
    rel_gap_tol for every n; raises AssertionError otherwise. This is the
    end-to-end numerical validation of the Fourier-side closed form."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    report = demo_run(NormSpec.euclidean(3), p, n_list=n_list,
                      measure_count=measure_count)
    gap = report.max_rel_gap
    if gap is None or gap > rel_gap_tol:
        raise AssertionError(
            f"identity check failed: max relative gap {gap} exceeds {rel_gap_tol}")
    return report


@dataclass
class ContradictionReport:
    """The incompatibility certificate for a candidate measure.

    If the measure represented the norm, the mollified pairing would be
    bounded below by ``rhs_lower_bound`` for every bump index n; a pairing
    value falling below that floor excludes the candidate. The plane-mass
    fraction records how much of the candidate sits within Euclidean
    distance 0.05 of the plane xi_1 = 0: only measures with essentially all
    mass there escape the floor, and such measures cannot represent a
    three-dimensional norm.
    """

    spec_label: str
    p: float
    n: int
    pairing_value: float
    pairing_error: float
    rhs_lower_bound: float
    plane_mass_fraction: float
    floor_exceeds_pairing: bool


def contradiction_report(spec: NormSpec, p: float, measure: SphericalMeasure,
                         n: int = 128) -> ContradictionReport:
    """Confront a candidate measure with the pairing decay at bump index n."""
    lhs = lhs_integral(spec, p, n)
    _, lower = rhs_value(p, n, measure)
    if measure.size:
        near_plane = np.abs(measure.directions[:, 0]) <= 0.05
        mass = measure.total_mass
        fraction = float(measure.weights[near_plane].sum() / mass) if mass > 0 else 0.0
    else:
        fraction = 0.0
    return ContradictionReport(
        spec_label=spec.label, p=p, n=n,
        pairing_value=lhs.value, pairing_error=lhs.error,
        rhs_lower_bound=lower, plane_mass_fraction=fraction,
        floor_exceeds_pairing=lower > lhs.value + lhs.error,
    )


def _g17(x) -> str:
    return "" if x is None else format(float(x), ".17g")


def demo_csv(report: DemoReport) -> str:
    """CSV rows (n, lhs, lhs_err, rhs, lower_bound); Fourier-side columns are
    empty when no representing measure is in play."""
    rows = ["n,lhs,lhs_err,rhs,lower_bound"]
    for row in report.rows:
        rows.append(f"{row.n},{_g17(row.lhs)},{_g17(row.lhs_err)},"
                    f"{_g17(row.rhs)},{_g17(row.lower_bound)}")
    return "\n".join(rows) + "\n"


def demo_report_text(report: DemoReport) -> str:
    lines = [
        f"spec: {report.spec_label}",
        f"p: {_g17(report.p)}",
        f"x1_cut: {_g17(report.x1_cut_factor)}/n",
        f"r_cut: {_g17(report.r_cut)}",
        f"measure_atoms: {report.measure_atoms}",
    ]
    for row in report.rows:
        extra = ""
        if row.rhs is not None:
            extra = (f" rhs={_g17(row.rhs)} lower_bound={_g17(row.lower_bound)}"
                     f" rel_gap={_g17(row.rel_gap)}")
        lines.append(f"n={row.n}: lhs={_g17(row.lhs)} lhs_err={_g17(row.lhs_err)}{extra}")
    return "\n".join(lines) + "\n"
