"""Online learning in zero-sum matrix games whose payoff matrices change over time."""

__version__ = "0.1.0"

from .exceptions import (ConfigurationError, DomainError, EmptySetError, MatrixGameError,
                         NonConvergenceError, NumericError)
from .game import (MixedStrategy, PayoffMatrix, RoundRecord, best_response_linear, lipschitz_l1,
                   lipschitz_l2, payoff, project_restricted, uniform_strategy)
from .regularizers import NegEntropy, clipped_softmax, entropy_lipschitz, entropy_value
from .saddle import (RegularizedObjective, SaddleCertificate, comparator_value, duality_gap,
                     solve)
from .learners import (LearnerParams, LearnerState, OnePointEstimate, bandit_initial, bandit_step,
                       hedge_rate, hedge_step, movement_bound, one_point_estimate, sp_rftl_step)
from .adversaries import AdversarySpec, emit
from .metrics import RunLedger, individual_regrets, ne_regret, slope_fit
from .estimators import BanditOMGRFTL, HedgeSelfPlay, OMGRFTL

__all__ = [
    "ConfigurationError", "DomainError", "EmptySetError", "MatrixGameError", "NonConvergenceError",
    "NumericError", "MixedStrategy", "PayoffMatrix", "RoundRecord", "best_response_linear",
    "lipschitz_l1", "lipschitz_l2", "payoff", "project_restricted", "uniform_strategy",
    "NegEntropy", "clipped_softmax", "entropy_lipschitz", "entropy_value",
    "RegularizedObjective", "SaddleCertificate", "comparator_value", "duality_gap", "solve",
    "LearnerParams", "LearnerState", "OnePointEstimate", "bandit_initial", "bandit_step",
    "hedge_rate", "hedge_step", "movement_bound", "one_point_estimate", "sp_rftl_step",
    "AdversarySpec", "emit", "RunLedger", "individual_regrets", "ne_regret", "slope_fit",
    "BanditOMGRFTL", "HedgeSelfPlay", "OMGRFTL",
]
