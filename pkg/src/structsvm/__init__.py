"""Structured variable selection in support vector machines.

Garrote-scaled hinge-loss classifiers with strong/weak heredity constraints,
solved as linear programs, plus the lasso and ridge SVM baselines, a
B-spline nonparametric extension, simulation generators and a Monte-Carlo
benchmark harness.
"""

from ._kernels import KERNEL_BACKEND
from .benchmark import BenchmarkReport, kfold_cv, run_benchmark
from .expand import (
    BasisExpansion,
    EffectDescriptor,
    HeredityGraph,
    expand_polynomial,
    expand_with_dummies,
    validate_heredity_graph,
)
from .l1svm import L1FitResult, fit_l1_svm
from .l2svm import L2FitResult, fit_l2_svm, fit_l2_svm_svd_reduced
from .lp import (
    LinearProgram,
    LpSolution,
    MalformedProgram,
    MaxPivotsExceeded,
    SolverOptions,
    check_feasible,
    solve_lp,
)
from .simulate import (
    bayes_error,
    example_spec,
    generalization_error,
    generate_example,
    heredity_frequency,
)
from .splines import (
    NonparametricInitial,
    SplineBasis,
    build_basis,
    evaluate_tensor,
    fit_initial_nonparametric,
    nonparametric_graph,
)
from .structured import (
    EmptyInitial,
    StructuredFitResult,
    StructuredFitSpec,
    compile_structured_lp,
    decision_values,
    fit_nonparametric_structured,
    fit_structured,
    predict,
)

__version__ = "0.1.0"
