"""Sandwiched Renyi divergences, Hoeffding anti-divergences and finite-n
strong converse exponents for pairs of finite-dimensional quantum states."""

from strongconverse.binning import BinnedDensity, bin_density, binning_divergence_gap
from strongconverse.divergence import (
    HoeffdingResult,
    cutoff_rate,
    hoeffding_anti_divergence,
    log_q_star,
    max_relative,
    petz_renyi,
    q_star,
    sandwiched_curve,
    sandwiched_renyi,
    umegaki,
)
from strongconverse.errors import NumericalError, StrongConverseError, ValidationError
from strongconverse.exponents import (
    ConvergenceReport,
    ExponentRecord,
    b_r_estimate,
    convergence_sweep,
    finite_n_exponent,
)
from strongconverse.neyman_pearson import (
    BlockTest,
    KrausChannel,
    NPResult,
    block_test,
    np_classical,
    np_dense,
    order_perturb_check,
    reverse_dpi_check,
    scale_test,
)
from strongconverse.operators import (
    DensityOperator,
    HermitianOperator,
    StatePair,
    TestOperator,
    loewner_leq,
    mat_power,
    order_constant,
    tensor_power,
)
from strongconverse.pairfile import PairFile, load_pair, save_pair
from strongconverse.pinching import (
    ClassicalPair,
    PinchingSpec,
    cp_index_check,
    enumerate_types,
    pinch,
    pinched_pair_dense,
)

__version__ = "0.1.0"
