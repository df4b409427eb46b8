"""Positive-definiteness cross-check for exp(-||x||^p).

For 0 < p <= 2, a norm embeds isometrically in L_p exactly when
exp(-||x||^p) is a positive definite function, i.e. the kernel matrix
G[i, j] = exp(-||x_i - x_j||^p) is positive semidefinite for every finite
point set. A point set whose kernel has a negative eigenvalue is therefore
a certificate of non-embeddability; this module hunts for such witnesses
with a seeded random search plus coordinate-descent refinement.

Positive definiteness can fail only at particular scales relative to the
fixed kernel width, so each random cloud is tested over a sweep of scale
factors (a single pairwise-distance evaluation serves all scales, the norm
being homogeneous).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .norms import NormSpec, norm_batch
from .parallel import parallel_map

SCALE_SWEEP = (0.25, 0.5, 1.0, 2.0, 4.0)
REFINE_STEPS = 200
REFINE_STEP_FRACTION = 0.1
WITNESS_EIG_FACTOR = -1e-8     # threshold: min_eig < factor * trace(G)/size
SEARCH_CHUNKS = 16             # fixed chunk count keeps results worker-independent
SYMMETRY_TOL = 1e-12


@dataclass
class PsdWitness:
    """Best point set found: the kernel min-eigenvalue is re-verifiable by
    rebuilding the kernel matrix from ``points``."""

    points: np.ndarray
    p: float
    min_eigenvalue: float
    seed: int
    spec_label: str = ""
    trials: int = 0

    @property
    def found(self) -> bool:
        """True when the eigenvalue is decisively negative (below the
        roundoff guard -1e-8 * trace(G)/size, which is -1e-8 here since the
        kernel has unit diagonal)."""
        return self.min_eigenvalue < WITNESS_EIG_FACTOR


def _check_p(p: float) -> None:
    if not 0.0 < p <= 2.0:
        raise ValueError(f"p must lie in (0, 2], got {p}")


def pairwise_norms(spec: NormSpec, points: np.ndarray) -> np.ndarray:
    """Symmetric matrix of ||x_i - x_j|| under ``spec``."""
    points = np.asarray(points, dtype=float)
    m = len(points)
    diffs = (points[:, None, :] - points[None, :, :]).reshape(m * m, -1)
    return norm_batch(spec, diffs).reshape(m, m)


def kernel_matrix(spec: NormSpec, p: float, points) -> np.ndarray:
    """G[i, j] = exp(-||x_i - x_j||^p); symmetric with unit diagonal."""
    _check_p(p)
    points = np.atleast_2d(np.asarray(points, dtype=float))
    dist = pairwise_norms(spec, points)
    if np.any(dist[~np.eye(len(points), dtype=bool)] == 0.0):
        warnings.warn("duplicate points: kernel matrix is degenerate", stacklevel=2)
    gram = np.exp(-dist ** p)
    np.fill_diagonal(gram, 1.0)
    return gram


def min_eigenvalue(gram) -> float:
    """Smallest eigenvalue of a symmetric matrix (LAPACK symmetric solver:
    tridiagonal reduction plus implicit QL/QR). Row order does not matter."""
    gram = np.asarray(gram, dtype=float)
    if gram.ndim != 2 or gram.shape[0] != gram.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {gram.shape}")
    scale = max(1.0, float(np.max(np.abs(gram))))
    if float(np.max(np.abs(gram - gram.T))) > SYMMETRY_TOL * scale:
        raise ValueError("matrix is not symmetric within 1e-12")
    return float(np.linalg.eigvalsh(gram)[0])


def _scaled_kernel_eig(dist: np.ndarray, p: float, scale: float) -> float:
    gram = np.exp(-(scale * dist) ** p)
    return float(np.linalg.eigvalsh(gram)[0])


def witness_search(spec: NormSpec, p: float, n_points: int = 20,
                   trials: int = 1000, seed: int = 0) -> PsdWitness:
    """Search seeded Gaussian clouds (over the scale sweep) for the most
    negative kernel eigenvalue, then refine the best candidate by
    coordinate descent: perturb one point at a time, keep improvements.

    A nonnegative best eigenvalue is a valid outcome (no witness found).
    Identical inputs reproduce the identical witness.
    """
    _check_p(p)
    if n_points < 3:
        raise ValueError("n_points must be at least 3")
    if trials < 1:
        raise ValueError("trials must be at least 1")
    chunks = min(SEARCH_CHUNKS, trials)
    sizes = [trials // chunks + (1 if c < trials % chunks else 0) for c in range(chunks)]

    def run_chunk(chunk_idx: int):
        rng = np.random.default_rng([seed, chunk_idx])
        best = (np.inf, None, None)
        for _ in range(sizes[chunk_idx]):
            cloud = rng.standard_normal((n_points, spec.dim))
            dist = pairwise_norms(spec, cloud)
            for scale in SCALE_SWEEP:
                lam = _scaled_kernel_eig(dist, p, scale)
                if lam < best[0]:
                    best = (lam, cloud * scale, scale)
        return best

    results = parallel_map(run_chunk, range(chunks))
    best_lam, best_points, best_scale = min(
        (res for res in results if res[1] is not None),
        key=lambda res: res[0],
    )

    # coordinate-descent refinement on the winning (already scaled) cloud
    rng = np.random.default_rng([seed, 0x5EED])
    points = np.array(best_points)
    lam = best_lam
    step = REFINE_STEP_FRACTION * best_scale
    for it in range(REFINE_STEPS):
        idx = it % n_points
        proposal = points.copy()
        proposal[idx] = proposal[idx] + step * rng.standard_normal(spec.dim)
        dist = pairwise_norms(spec, proposal)
        cand = _scaled_kernel_eig(dist, p, 1.0)
        if cand < lam:
            lam = cand
            points = proposal

    lam = min_eigenvalue(kernel_matrix(spec, p, points))
    return PsdWitness(points=points, p=p, min_eigenvalue=lam, seed=seed,
                      spec_label=spec.label, trials=trials)


def _g17(x: float) -> str:
    return format(float(x), ".17g")


def witness_csv(witness: PsdWitness) -> str:
    """Point coordinates with a header carrying (spec, p, min_eigenvalue, seed)."""
    lines = [
        f"# spec={witness.spec_label} p={_g17(witness.p)} "
        f"min_eigenvalue={_g17(witness.min_eigenvalue)} seed={witness.seed}",
        ",".join(f"x_{k + 1}" for k in range(witness.points.shape[1])),
    ]
    for row in witness.points:
        lines.append(",".join(_g17(c) for c in row))
    return "\n".join(lines) + "\n"


def witness_report_text(witness: PsdWitness) -> str:
    lines = [
        f"spec: {witness.spec_label}",
        f"p: {_g17(witness.p)}",
        f"seed: {witness.seed}",
        f"trials: {witness.trials}",
        f"n_points: {len(witness.points)}",
        f"min_eigenvalue: {_g17(witness.min_eigenvalue)}",
        f"witness_found: {witness.found}",
        f"threshold: {_g17(WITNESS_EIG_FACTOR)} * trace(G)/size",
    ]
    return "\n".join(lines) + "\n"
