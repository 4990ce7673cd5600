"""Monte Carlo simulator for downlink NOMA from a UAV base station.

Users are dropped by a homogeneous PPP in an annular sector under one mmWave
beam, ordered from limited feedback (distance, Fejer kernel or absolute
angle), and served by NOMA with SIC or by equal-share OMA.
"""

from .config import (KPolicy, NomaPlan, OmaShare, Ordering, RadioParams, ScenarioConfig,
                     Scheme, SteeringNorm, UserRegion, snr_budget, validate)
from .engine import (EmpiricalPdf, Statistic, SumRateEstimate, TrialOutcome, collect_pdf,
                     estimate_sum_rate, run_trial, sweep)

__all__ = [
    "KPolicy", "NomaPlan", "OmaShare", "Ordering", "RadioParams", "ScenarioConfig", "Scheme",
    "SteeringNorm", "UserRegion", "snr_budget", "validate",
    "EmpiricalPdf", "Statistic", "SumRateEstimate", "TrialOutcome", "collect_pdf",
    "estimate_sum_rate", "run_trial", "sweep",
]
