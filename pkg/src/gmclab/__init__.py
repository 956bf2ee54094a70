"""gmclab: Gaussian multiplicative chaos, atomic dual chaos, and KPZ duality."""

from .kernels import KernelSpec, LevelRange, eval_partial_kernel, eval_level_increment, gff_square_level
from .field import Lattice, FieldGrid, RngStream, LayerSampler, sample_layer, accumulate_field
from .chaos import LatticeMeasure, build_chaos, measure_box, xi
from .atomic import (
    AtomicMeasure,
    Region,
    StableAtoms,
    alpha_from_gamma,
    build_atomic_direct,
    build_subordinated,
    fractional_moment_identity_check,
    moment_relation_constant,
    sample_stable_atoms,
    xi_bar,
)
from .analysis import (
    covering_sums,
    dimension_estimate,
    estimate_spectrum,
    hill_tail_index,
    kpz_solve,
    kpz_solve_dual,
    lq_spectrum,
    verify_laplace,
    verify_perfect_scaling,
)
from .config import ExperimentConfig, load_config, parse_config_text, validate_config

__version__ = "0.1.0"
