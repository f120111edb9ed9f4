from ..strategy import Admissibility, GeneralizedStrategy, WealthProcess, check_admissible, wealth
from .brute import brute_force_american
from .pricing import HedgeQuery, PriceReport, price_american, price_european, recheck
from .sweep import (
    SweepReport,
    credit_sensitivity,
    elmd_dual_value,
    localize_sweep,
    truncation_diagnostic,
)
from .search import SearchReport, search_local_viability_gap

__all__ = [
    "Admissibility",
    "GeneralizedStrategy",
    "HedgeQuery",
    "PriceReport",
    "SearchReport",
    "SweepReport",
    "WealthProcess",
    "brute_force_american",
    "check_admissible",
    "credit_sensitivity",
    "elmd_dual_value",
    "localize_sweep",
    "price_american",
    "price_european",
    "recheck",
    "search_local_viability_gap",
    "truncation_diagnostic",
    "wealth",
]
