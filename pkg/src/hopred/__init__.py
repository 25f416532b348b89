"""Transport statistics and model reduction for periodic hopping models."""

from .errors import *  # noqa: F401,F403
from .models import (
    ContinuousModel,
    HoppingModel,
    OneStateModel,
    Potential,
    TwoStateModel,
    rotate,
    scale_rates,
    validate,
    validate_continuous,
)
from .io import load_model, model_from_dict, model_to_dict, save_model
from .steady_state import SteadyStateReport, TransportStats, compute_weights, transport_stats
from .first_passage import (
    IntervalProblem,
    MFPTProfile,
    mfpt_closed_form,
    mfpt_linear_solve,
    period_interval_problem,
    period_mfpt,
)
from .reduction import (
    Aggregates,
    ReductionReport,
    factorize_two_state,
    reduce_one_state_vd,
    reduce_one_state_vt,
    reduce_two_state,
    two_state_aggregates,
)
from .continuous import (
    DiscretizationBridge,
    QuadratureConfig,
    continuous_period_mfpt,
    continuous_reduce_one_state,
    continuous_velocity,
    discretize,
    effective_diffusion,
    zero_force_diffusion,
)
from .simulation import SimConfig, SimEstimate, default_horizon, simulate_first_passage, simulate_transport

__version__ = "0.1.0"
