"""Hybrid precoding and blind combining for mmWave MIMO integrated sensing and communication."""
from .beampattern import (BeampatternSpec, QuadraticForm, build_quadratic_form, desired_pattern, make_spec,
                          optimal_beta, psi_mse, psi_normalized, spec_from_config, tx_gain)
from .channel import ChannelRealization, UlaGeometry, draw_channel, draw_channels, steering_matrix, ula_response
from .combiner import CombinerSet, blind_precoder_surrogate, design_combiners, lmbc_design
from .config import SolverSettings, SystemConfig, config_from_dict, load_config
from .errors import (ConfigError, DegenerateError, DomainError, IsacError, NumericError, RankError, ShapeError,
                     ZeroRateError)
from .gmse import GmState, gm_sequential, gm_weights
from .manifold import CircleManifold, ManifoldPoint, RcgSettings, ScaledUnitaryManifold, rcg_minimize
from .metrics import EvaluationReport, evaluate, sinr, user_rate
from .mm_surrogate import SurrogateState, surrogate_coeffs, surrogate_value, tight_surrogate_value
from .precoder import HybridDesign, RmcgSettings, design_hybrid, rmcg_rf_design
from .runner import SweepResult, emit_csv, run_sweep, run_trial

__version__ = "0.1.0"
