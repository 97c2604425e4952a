"""Lotteries, expected utility, preference-axiom falsifiers and standard-gamble calibration."""

__version__ = "0.1.0"

from .errors import (BudgetError, CalibrationError, DomainError, InapplicableError,  # noqa: E402
                     NetOverflowError, NoFitError, ScopeError, ValidationError, VNMError)
from .space import (Interval, NONNEGATIVE_HALF_LINE, OutcomeSpace, POSITIVE_HALF_LINE,  # noqa: E402
                    REAL_LINE, Region, parse_space)
from .lottery import (DensityMeasure, SimpleLottery, dirac, discretize, mix,  # noqa: E402
                      random_lottery, support)
from .utility import (UtilityFunction, affine, constant, crra, expect, expectation,  # noqa: E402
                      from_config, linear, log_utility, logistic, quadratic, sqrt_utility, step,
                      table)
from .preference import (PreferenceOracle, Verdict, from_utility, lexicographic,  # noqa: E402
                         oracle_from_config, rank_dependent, restrict)
from .calibration import (CalibrationResult, affine_match, calibrate, calibrate_point,  # noqa: E402
                          pick_anchors)
from .weakstar import (DEFAULT_FAMILY, ConvergenceReport, TestFunctionFamily, converges,  # noqa: E402
                       dudley_distance, lemma5_net, semicontinuity_net)
from .exhaustion import (Exhaustion, cover_index, theorem1_exhaustion,  # noqa: E402
                         trivial_exhaustion, verify_exhaustion)
from .axioms import (AxiomReport, check_independence, check_mixture_laws,  # noqa: E402
                     check_segmental_continuity, check_sequential_continuity, check_weak_order,
                     falsify_weakstar_closedness, replay)

__all__ = [
    "__version__",
    "BudgetError", "CalibrationError", "DomainError", "InapplicableError", "NetOverflowError",
    "NoFitError", "ScopeError", "ValidationError", "VNMError",
    "Interval", "NONNEGATIVE_HALF_LINE", "OutcomeSpace", "POSITIVE_HALF_LINE", "REAL_LINE",
    "Region", "parse_space",
    "DensityMeasure", "SimpleLottery", "dirac", "discretize", "mix", "random_lottery", "support",
    "UtilityFunction", "affine", "constant", "crra", "expect", "expectation", "from_config",
    "linear", "log_utility", "logistic", "quadratic", "sqrt_utility", "step", "table",
    "PreferenceOracle", "Verdict", "from_utility", "lexicographic", "oracle_from_config",
    "rank_dependent", "restrict",
    "CalibrationResult", "affine_match", "calibrate", "calibrate_point", "pick_anchors",
    "DEFAULT_FAMILY", "ConvergenceReport", "TestFunctionFamily", "converges", "dudley_distance",
    "lemma5_net", "semicontinuity_net",
    "Exhaustion", "cover_index", "theorem1_exhaustion", "trivial_exhaustion", "verify_exhaustion",
    "AxiomReport", "check_independence", "check_mixture_laws", "check_segmental_continuity",
    "check_sequential_continuity", "check_weak_order", "falsify_weakstar_closedness", "replay",
]
