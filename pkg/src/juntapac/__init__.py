"""Agnostic learning of k-juntas on the Boolean cube with L2 regression and
Fourier methods, plus exact small-instance oracles."""
from .cube import (CubePoint, Dataset, JointDistribution, RngSeed, SubsetMask,
                   chi_eval, empirical_distribution, enumerate_subsets,
                   planted_junta_distribution, sample)
from .fourier import (Spectrum, concentration_bound, empirical_coeff,
                      hoeffding_bound, inverse_fourier, stochastic_coeff,
                      uniform_fourier)
from .learners import (LearnReport, erm_bruteforce, l2_algorithm, l2_threshold,
                       learn, sign_mmse, stochastic_fourier)
from .oracle import (LossReport, empirical_loss, exact_loss,
                     fourier_framework_bound, loss_from_spectrum,
                     mmse_sign_bound, opt_exact, opt_fourier,
                     threshold_expectation)
from .regression import (Predictor, SparsePolynomial, fourier_projection,
                         least_squares_fit, mmse_projection_exact, u_poly)

__version__ = "0.1.0"
