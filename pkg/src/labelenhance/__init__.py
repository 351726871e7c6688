"""Label-enhancement toolkit: recover real-valued label distributions from
binary logical labels by exploiting global sample correlations."""

from .data import (LdlDataset, ParseError, binarize, check_logical_labels,
                   generate_artificial, load_dataset, load_matrix,
                   save_dataset, save_matrix, standardize_features)
from .enhance import (EnhanceResult, KernelConfig, LbfgsResult, LeConfig,
                      baseline_lp, enhance_glesc, enhance_lesc, gaussian_gram,
                      lbfgs_minimize, le_gradient, le_objective,
                      mean_pairwise_distance, recover_distributions,
                      recover_from_correlations, resolve_sigma)
from .linalg import (NumericalError, fft_mode3, ifft_mode3, l21_shrink, svd,
                     svt, tensor_nuclear_norm, tubal_shrink)
from .lrr import LrrConfig, LrrSolution, SolverTrace, lrr_objective, solve_lrr
from .metrics import (EvaluationReport, METRIC_DIRECTIONS, METRIC_NAMES,
                      MetricVector, average_given_ranks, average_ranks,
                      build_report, evaluate_dataset, evaluate_pair)
from .tensor_lrr import TlrrConfig, TlrrSolution, solve_tensor_lrr

__version__ = "0.1.0"
