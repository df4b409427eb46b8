"""Numerical toolkit for isometric embeddability of finite-dimensional
normed spaces in L_p, 0 < p <= 2.

Four independent routes to the same question:

* :mod:`levylab.criterion` - the second-derivative test on x1-sections
  (the only route that can rule embeddings out with a quantitative verdict);
* :mod:`levylab.levy` - nonnegative least-squares recovery of a spherical
  representing measure (graded feasibility evidence);
* :mod:`levylab.posdef` - positive-definiteness of exp(-||x||^p) via
  kernel-matrix eigenvalues (witness search);
* :mod:`levylab.mollifier` - the mollified second-derivative pairing and
  its Fourier-side closed form (desk-scale validation of the machinery).
"""

from .criterion import (CriterionReport, check_orlicz_flatness,
                        second_derivative_test)
from .derivatives import (DerivativePair, fd_d1, fd_d2, orlicz_d1, orlicz_d2,
                          section_derivatives)
from .levy import (FeasibilityResult, SphericalMeasure, assemble_moment_system,
                   feasibility_scan, solve_nnls, uniform_calibrated_measure,
                   verify_measure)
from .mollifier import (ContradictionReport, DemoReport, Mollifier,
                        contradiction_report, demo_run, fourier_constant,
                        identity_check, lhs_integral, rhs_value)
from .norms import (NormSpec, OrliczFunction, SpecError, SpecParseError,
                    eval_norm, format_spec, norm_batch, parse_spec,
                    subsphere_point, validate_orlicz)
from .posdef import PsdWitness, kernel_matrix, min_eigenvalue, witness_search

__version__ = "0.1.0"

__all__ = [
    "ContradictionReport", "CriterionReport", "DemoReport", "DerivativePair",
    "FeasibilityResult", "Mollifier", "NormSpec", "OrliczFunction",
    "PsdWitness", "SpecError", "SpecParseError", "SphericalMeasure",
    "assemble_moment_system", "check_orlicz_flatness", "contradiction_report",
    "demo_run", "eval_norm", "fd_d1", "fd_d2",
    "feasibility_scan", "format_spec", "fourier_constant", "identity_check",
    "kernel_matrix", "lhs_integral", "min_eigenvalue", "norm_batch",
    "orlicz_d1", "orlicz_d2", "parse_spec", "rhs_value",
    "second_derivative_test", "section_derivatives", "solve_nnls",
    "subsphere_point", "uniform_calibrated_measure", "validate_orlicz",
    "verify_measure", "witness_search",
]
