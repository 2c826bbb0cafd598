"""Approximate message passing and replica-symmetric limits for sparse
linear regression with sub-linear sparsity."""

from amp_sublinear.prior import (
    DiscretePrior,
    bernoulli_rademacher,
    make_sparse_prior,
)
from amp_sublinear.linmodel import (
    MatrixNorm,
    ModelParams,
    ProblemInstance,
    derive_dims,
    generate_instance,
    snr_to_noise,
)
from amp_sublinear.se import QuadratureSpec, SeTrace, mmse_scalar, se_fixed_point, se_trace
from amp_sublinear.amp import AmpState, AmpTrace, amp_init, amp_run, amp_step, classical_amp_run
from amp_sublinear.rs import RsCurve, f_rs, i_den, immse_residual, locate_transition, minimize_rs, psi, sigma
from amp_sublinear.oracle import EnumerationBudget, exact_mmse_mc, exact_posterior_mean
from amp_sublinear.errors import (
    AmpSublinearError,
    ConvergenceError,
    NumericalDivergenceError,
    NumericalError,
    ParameterError,
    ResourceError,
    TransitionProximityError,
)

__version__ = "0.1.0"
