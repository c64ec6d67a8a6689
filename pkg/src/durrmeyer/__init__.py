"""Sampling-series reconstruction operators and their convergence analysis.

The package couples a reconstruction kernel (a partition of unity on the
integer lattice) with a sample functional (point values, windowed means, or
convolution samples), evaluates the resulting series with certified
truncation, and measures convergence in the uniform norm and in modular
functionals generated by convex gauges.
"""

from .analysis import (
    BoundCheck,
    BoundConstant,
    ConvergenceReport,
    ConvergenceRow,
    DegenerateFitError,
    ModularComparison,
    convergence_study,
    empirical_lipschitz_order,
    quantitative_constant,
    verify_modular_inequality,
    verify_quantitative_bound,
)
from .kernels import (
    CompactSupport,
    DecayingSupport,
    Kernel,
    bspline,
    fejer,
    fourier_hat,
    partition_of_unity_residual,
    sinc,
    window,
)
from .moments import (
    DivergentMomentError,
    MomentResult,
    continuous_absolute_moment,
    continuous_algebraic_moment,
    discrete_absolute_moment,
    discrete_algebraic_moment,
)
from .operators import (
    Convolution,
    OperatorSpec,
    PointMass,
    ReductionKind,
    SeriesEvaluator,
    Window,
    evaluate,
    evaluate_grid,
    generalized_sample,
    make_evaluator,
    reduce_special_case,
)
from .orlicz import (
    ExponentialFunction,
    ModularOverflowError,
    NormBracketError,
    PowerFunction,
    ZygmundFunction,
    luxemburg_norm,
    modular,
    modular_distance,
    orlicz_function,
    phi_eval,
)
from .quadrature import QuadratureError, integrate
from .signals import (
    GridFunction,
    ModulusEstimate,
    Signal,
    UniformGrid,
    builtin_signal,
    indicator,
    modulus_of_continuity,
    piecewise_constant,
    sup_error,
)

__version__ = "0.1.0"
