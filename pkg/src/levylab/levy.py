"""Discretized moment problem for the spherical representation of a norm.

A norm embeds isometrically in L_p (p > 0) exactly when there is a finite
nonnegative Borel measure mu on the Euclidean unit sphere with

    ||x||^p = integral |<x, xi>|^p dmu(xi)   for every x.

Discretizing mu over a fixed direction grid turns the identity into a
nonnegative least-squares system A w = b with A[i, j] = |<x_i, xi_j>|^p and
b[i] = ||x_i||^p. The relative residual across refinement levels is graded
evidence for or against the existence of mu: it can never prove
non-embeddability (that is the criterion module's job), but a residual that
plateaus under direction refinement is the numerical signature of an
infeasible moment problem.

Directions use a deterministic Fibonacci lattice (dim 3) or uniform
half-circle angles (dim 2), folded into a fixed hemisphere: the integrand
|<x, xi>|^p is even in xi, so antipodal directions are identified.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .norms import NormSpec, norm_batch
from .parallel import parallel_map

FEASIBLE_RESIDUAL = 1e-3       # final residual below this (and decreasing) = feasible evidence
PLATEAU_RESIDUAL = 1e-2        # residual above this at every level is plateau territory
PLATEAU_REL_CHANGE = 0.10      # <10% residual change under 4x directions = plateau
LEVEL_DECREASE_SLACK = 1.05    # per-level residual may wiggle up by at most 5%
NNLS_DUAL_TOL = 1e-10
NNLS_ITER_FACTOR = 10          # iteration cap = 10 * columns

FEASIBLE = "FeasibleEvidence"
INFEASIBLE = "InfeasibleEvidence"
INCONCLUSIVE = "Inconclusive"

DEFAULT_LEVELS = {
    2: ((16, 32), (64, 128), (256, 512)),
    3: ((64, 128), (256, 512), (1024, 2048)),
}


@dataclass
class SphericalMeasure:
    """Discrete nonnegative measure on the Euclidean unit sphere.

    Directions are unit vectors folded into the canonical hemisphere (last
    nonzero component positive); weights are nonnegative.
    """

    directions: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.directions = np.atleast_2d(np.asarray(self.directions, dtype=float))
        self.weights = np.asarray(self.weights, dtype=float).ravel()
        if self.directions.size == 0:
            self.directions = self.directions.reshape(0, max(1, self.directions.shape[-1] or 3))
        if len(self.weights) != len(self.directions):
            raise ValueError("directions and weights must have matching lengths")
        if self.size:
            lengths = np.sqrt((self.directions ** 2).sum(axis=1))
            if np.any(np.abs(lengths - 1.0) > 1e-12):
                raise ValueError("directions must be Euclidean unit vectors (within 1e-12)")
            if np.any(self.weights < 0.0):
                raise ValueError("weights must be nonnegative")
            self.directions = to_hemisphere(self.directions)

    @property
    def size(self) -> int:
        return len(self.weights)

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())

    def moment(self, xs, p: float) -> np.ndarray:
        """sum_j w_j |<x, xi_j>|^p for each row x of ``xs``."""
        xs = np.atleast_2d(np.asarray(xs, dtype=float))
        if self.size == 0:
            return np.zeros(len(xs))
        return (np.abs(xs @ self.directions.T) ** p) @ self.weights


@dataclass(frozen=True)
class FeasibilityLevel:
    direction_count: int
    sample_count: int
    relative_residual: float


@dataclass
class NnlsSolution:
    weights: np.ndarray
    relative_residual: float
    converged: bool
    iterations: int


@dataclass
class FeasibilityResult:
    spec_label: str
    p: float
    seed: int
    levels: list[FeasibilityLevel]
    interpretation: str
    best_measure: SphericalMeasure
    plateau_probe: FeasibilityLevel | None = None
    converged: bool = True
    feasible_threshold: float = FEASIBLE_RESIDUAL
    plateau_threshold: float = PLATEAU_RESIDUAL
    plateau_rel_change: float = PLATEAU_REL_CHANGE


def to_hemisphere(directions: np.ndarray) -> np.ndarray:
    """Flip directions so the last nonzero component is positive."""
    dirs = np.array(directions, dtype=float)
    flip = np.zeros(len(dirs), dtype=bool)
    undecided = np.ones(len(dirs), dtype=bool)
    for axis in range(dirs.shape[1] - 1, -1, -1):
        col = dirs[:, axis]
        flip |= undecided & (col < 0.0)
        undecided &= col == 0.0
    dirs[flip] *= -1.0
    return dirs


def fibonacci_sphere(count: int) -> np.ndarray:
    """Deterministic near-uniform lattice on S^2, golden-angle construction."""
    if count < 1:
        raise ValueError("count must be positive")
    i = np.arange(count) + 0.5
    polar = np.arccos(1.0 - 2.0 * i / count)
    azimuth = 2.0 * math.pi * i / ((1.0 + math.sqrt(5.0)) / 2.0)
    return np.column_stack([
        np.cos(azimuth) * np.sin(polar),
        np.sin(azimuth) * np.sin(polar),
        np.cos(polar),
    ])


def circle_directions(count: int) -> np.ndarray:
    """Uniform angles over the open upper half-circle."""
    if count < 1:
        raise ValueError("count must be positive")
    angles = math.pi * (np.arange(count) + 0.5) / count
    return np.column_stack([np.cos(angles), np.sin(angles)])


def direction_grid(dim: int, count: int) -> np.ndarray:
    """Hemisphere-folded direction set for the given dimension."""
    if dim == 2:
        return to_hemisphere(circle_directions(count))
    if dim == 3:
        return to_hemisphere(fibonacci_sphere(count))
    raise ValueError(f"direction grids are implemented for dim 2 and 3, got {dim}")


def sample_norm_sphere(spec: NormSpec, count: int, rng: np.random.Generator) -> np.ndarray:
    """Seeded points on the unit sphere of ``spec`` (Gaussian directions)."""
    xs = rng.standard_normal((count, spec.dim))
    # a zero row has probability zero; regenerate defensively anyway
    bad = ~np.any(xs, axis=1)
    while np.any(bad):
        xs[bad] = rng.standard_normal((int(bad.sum()), spec.dim))
        bad = ~np.any(xs, axis=1)
    return xs / norm_batch(spec, xs)[:, None]


def _check_p(p: float, upper_inclusive: bool = True) -> None:
    if not (0.0 < p <= 2.0 if upper_inclusive else 0.0 < p < 2.0):
        rng_txt = "(0, 2]" if upper_inclusive else "(0, 2)"
        raise ValueError(f"p must lie in {rng_txt}, got {p}")


def assemble_moment_system(spec: NormSpec, p: float, samples, directions):
    """Matrix A[i, j] = |<x_i, xi_j>|^p and right-hand side b[i] = ||x_i||^p."""
    _check_p(p)
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    directions = np.atleast_2d(np.asarray(directions, dtype=float))
    norms = norm_batch(spec, samples)
    if np.any(norms == 0.0):
        raise ValueError("samples must be nonzero")
    A = np.abs(samples @ directions.T) ** p
    b = norms ** p
    return A, b


def solve_nnls(A, b, dual_tol: float = NNLS_DUAL_TOL,
               max_iter: int | None = None) -> NnlsSolution:
    """Minimize ||A w - b||_2 subject to w >= 0, Lawson-Hanson active set.

    The passive-set subproblems are solved through cached normal-equation
    columns (computed lazily, one matvec per entering column), which keeps
    large feasible instances fast; the reported residual is evaluated
    directly from A x - b so it is not limited by the squared conditioning
    of the normal equations.

    Deterministic for fixed input: the entering column is always the first
    index attaining the largest dual value. Hitting the iteration cap
    (10 * columns by default) returns ``converged = False`` rather than
    raising, so callers can surface an inconclusive verdict.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float).ravel()
    if A.ndim != 2 or A.shape[0] != len(b):
        raise ValueError(f"shape mismatch: A {A.shape}, b {b.shape}")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
        raise ValueError("non-finite entries in the system")
    m, n = A.shape
    if max_iter is None:
        max_iter = NNLS_ITER_FACTOR * n
    b_norm = float(np.linalg.norm(b))

    atb = A.T @ b
    gram = np.zeros((n, n))
    have_col = np.zeros(n, dtype=bool)

    def gram_cols(idx: np.ndarray) -> None:
        missing = idx[~have_col[idx]]
        if len(missing):
            gram[:, missing] = A.T @ A[:, missing]
            have_col[missing] = True

    x = np.zeros(n)
    passive = np.zeros(n, dtype=bool)
    w = atb.copy()
    iterations = 0
    converged = True

    def solve_passive(idx: np.ndarray) -> np.ndarray:
        gpp = gram[np.ix_(idx, idx)]
        try:
            return np.linalg.solve(gpp, atb[idx])
        except np.linalg.LinAlgError:
            sol, *_ = np.linalg.lstsq(gpp, atb[idx], rcond=None)
            return sol

    while True:
        candidates = ~passive & (w > dual_tol)
        if not np.any(candidates):
            break
        masked = np.where(candidates, w, -np.inf)
        passive[int(np.argmax(masked))] = True
        while True:
            iterations += 1
            if iterations > max_iter:
                converged = False
                break
            idx = np.flatnonzero(passive)
            gram_cols(idx)
            z = solve_passive(idx)
            if np.all(z > 0.0):
                x[:] = 0.0
                x[idx] = z
                break
            xp = x[idx]
            neg = z <= 0.0
            with np.errstate(divide="ignore", invalid="ignore"):
                ratios = np.where(neg, xp / (xp - z), np.inf)
            alpha = float(np.min(ratios))
            xp = xp + alpha * (z - xp)
            x[:] = 0.0
            x[idx] = xp
            drop = np.zeros(n, dtype=bool)
            drop[idx] = xp <= 1e-14 * max(1.0, float(np.max(np.abs(xp))))
            passive &= ~drop
            x[~passive] = 0.0
            if not np.any(passive):
                break
        if not converged:
            break
        idx = np.flatnonzero(passive)
        w = atb - gram[:, idx] @ x[idx]
    resid = b - A @ x
    rel = float(np.linalg.norm(resid) / b_norm) if b_norm > 0.0 else 0.0
    return NnlsSolution(weights=x, relative_residual=rel,
                        converged=converged, iterations=iterations)


def verify_measure(spec: NormSpec, p: float, measure: SphericalMeasure, test_points) -> float:
    """Max relative error of the representation over the test points."""
    _check_p(p)
    xs = np.atleast_2d(np.asarray(test_points, dtype=float))
    target = norm_batch(spec, xs) ** p
    if np.any(target == 0.0):
        raise ValueError("test points must be nonzero")
    approx = measure.moment(xs, p)
    return float(np.max(np.abs(approx - target) / target))


def uniform_calibrated_measure(p: float, count: int = 2048) -> SphericalMeasure:
    """Uniform weights on the Fibonacci lattice, calibrated so the Euclidean
    representation is exact at x = e1 (hence, by near-uniformity, accurate
    everywhere). This is the discrete stand-in for the rotation-invariant
    measure representing the Euclidean norm."""
    _check_p(p)
    dirs = direction_grid(3, count)
    mass = float((np.abs(dirs[:, 0]) ** p).sum())
    weights = np.full(count, 1.0 / mass)
    return SphericalMeasure(directions=dirs, weights=weights)


def _measure_from_solution(directions: np.ndarray, weights: np.ndarray) -> SphericalMeasure:
    keep = weights > 0.0
    return SphericalMeasure(directions=directions[keep], weights=weights[keep])


def feasibility_scan(spec: NormSpec, p: float, levels=None, seed: int = 0) -> FeasibilityResult:
    """Solve the moment problem across refinement levels and grade the outcome.

    FeasibleEvidence: final residual < 1e-3 and residuals decrease with
    refinement. InfeasibleEvidence: residual > 1e-2 at every level and the
    final residual moves by < 10% when directions are quadrupled at fixed
    samples. Anything else (including a solver that hit its iteration cap)
    is Inconclusive. Thresholds are calibration constants and are recorded
    in the result.
    """
    _check_p(p)
    if levels is None:
        levels = DEFAULT_LEVELS[spec.dim]
    levels = [(int(d), int(s)) for d, s in levels]
    if not levels or any(d < 1 or s < 1 for d, s in levels):
        raise ValueError("levels must be a nonempty list of positive (directions, samples)")
    rng = np.random.default_rng(seed)
    sample_sets = [sample_norm_sphere(spec, s, rng) for _, s in levels]
    direction_sets = [direction_grid(spec.dim, d) for d, _ in levels]

    def solve_level(args):
        dirs, samples = args
        A, b = assemble_moment_system(spec, p, samples, dirs)
        return solve_nnls(A, b)

    solutions = parallel_map(solve_level, list(zip(direction_sets, sample_sets)))
    level_rows = [FeasibilityLevel(len(d), len(s), sol.relative_residual)
                  for d, s, sol in zip(direction_sets, sample_sets, solutions)]
    residuals = np.array([row.relative_residual for row in level_rows])
    converged = all(sol.converged for sol in solutions)

    best_idx = int(np.argmin(residuals))
    best_measure = _measure_from_solution(direction_sets[best_idx],
                                          solutions[best_idx].weights)

    probe_row = None
    interpretation = INCONCLUSIVE
    if converged:
        decreasing = bool(np.all(residuals[1:] <= residuals[:-1] * LEVEL_DECREASE_SLACK)
                          and residuals[-1] <= residuals[0])
        if residuals[-1] < FEASIBLE_RESIDUAL and decreasing:
            interpretation = FEASIBLE
        elif np.all(residuals > PLATEAU_RESIDUAL):
            probe_dirs = direction_grid(spec.dim, 4 * levels[-1][0])
            probe_sol = solve_level((probe_dirs, sample_sets[-1]))
            probe_row = FeasibilityLevel(len(probe_dirs), levels[-1][1],
                                         probe_sol.relative_residual)
            if probe_sol.converged:
                change = abs(probe_sol.relative_residual - residuals[-1]) / residuals[-1]
                if change < PLATEAU_REL_CHANGE:
                    interpretation = INFEASIBLE
            else:
                converged = False

    return FeasibilityResult(
        spec_label=spec.label, p=p, seed=seed, levels=level_rows,
        interpretation=interpretation, best_measure=best_measure,
        plateau_probe=probe_row, converged=converged,
    )


def _g17(x: float) -> str:
    return format(float(x), ".17g")


def feasibility_csv(result: FeasibilityResult) -> str:
    """CSV of (level, directions, samples, residual); the plateau probe, when
    present, is the last row with level tag 'probe'."""
    rows = ["level,directions,samples,relative_residual"]
    for i, lv in enumerate(result.levels):
        rows.append(f"{i},{lv.direction_count},{lv.sample_count},{_g17(lv.relative_residual)}")
    if result.plateau_probe is not None:
        lv = result.plateau_probe
        rows.append(f"probe,{lv.direction_count},{lv.sample_count},{_g17(lv.relative_residual)}")
    return "\n".join(rows) + "\n"


def measure_csv(measure: SphericalMeasure) -> str:
    """CSV of atom coordinates and weights."""
    dim = measure.directions.shape[1] if measure.size else 3
    header = ",".join(f"xi_{k + 1}" for k in range(dim)) + ",weight"
    rows = [header]
    for d, w in zip(measure.directions, measure.weights):
        rows.append(",".join(_g17(c) for c in d) + f",{_g17(w)}")
    return "\n".join(rows) + "\n"


def feasibility_report_text(result: FeasibilityResult) -> str:
    lines = [
        f"spec: {result.spec_label}",
        f"p: {_g17(result.p)}",
        f"seed: {result.seed}",
        f"interpretation: {result.interpretation}",
        f"converged: {result.converged}",
        f"feasible_threshold: {_g17(result.feasible_threshold)}",
        f"plateau_threshold: {_g17(result.plateau_threshold)}",
        f"plateau_rel_change: {_g17(result.plateau_rel_change)}",
        f"best_measure_atoms: {result.best_measure.size}",
        f"best_measure_mass: {_g17(result.best_measure.total_mass)}",
    ]
    for i, lv in enumerate(result.levels):
        lines.append(f"level {i}: directions={lv.direction_count} samples={lv.sample_count} "
                     f"residual={_g17(lv.relative_residual)}")
    if result.plateau_probe is not None:
        lv = result.plateau_probe
        lines.append(f"probe: directions={lv.direction_count} samples={lv.sample_count} "
                     f"residual={_g17(lv.relative_residual)}")
    return "\n".join(lines) + "\n"
