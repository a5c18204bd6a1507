"""Numerical laboratory for Besov-space norms, pseudodifferential and Fourier operators."""
from .besov import CoeffSet, SpaceParams, besov_norm, seq_norm, smoothness_thresholds
from .grid import (FREQUENCY, SPACE, Grid, SampledField, lebesgue_norm, lp_block, lp_partition,
                   make_grid, sample, self_dual_grid, transform)
from .operator import (LITERAL, UNITARY, HeatParams, OperatorMatrix, apply_fourier_op,
                       apply_lift, apply_pseudo, assemble_dual_matrix, assemble_fourier_matrix,
                       dual_fourier_apply, heat_semigroup, operator_norm_probe,
                       wavelet_operator_matrix)
from .spectral import (RateBound, SpectrumReport, eigenvalues, fit_decay, predicted_rate,
                       singular_values, weyl_check)
from .symbol import Symbol, builtin_symbol, order_shift, reflect, verify_class
from .wavelet import WaveletSystem, analyze, daubechies_system, synthesize, wavelet_function

__version__ = "0.1.0"
