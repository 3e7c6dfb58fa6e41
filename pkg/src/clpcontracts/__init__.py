"""CLP-aware contract design, auditing, and settlement simulation for
federated-learning incentive markets."""

from .market import (
    ConfigError,
    ContractItem,
    ContractMenu,
    InfeasibleError,
    InfoCase,
    MarketConfig,
    Mechanism,
    MonotonicityError,
    Regime,
    TimeFrame,
    load_config,
    load_menu,
    sample_type_vector,
    save_menu,
    validate_config,
)
from .alphabet import TimeAlphabet, build_time_alphabet
from .benchmarks import linear_pricing, solve_ctwt
from .cic import cic_salary, solve_cic
from .feasibility import FeasibilityReport, audit
from .iic import check_constraint_reduction, iic_salaries, solve_iic
from .ledger import Ledger, replay_balances, to_micro_tokens
from .simulation import run_simulation, update_cohort_size

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "ContractItem",
    "ContractMenu",
    "FeasibilityReport",
    "InfeasibleError",
    "InfoCase",
    "Ledger",
    "MarketConfig",
    "Mechanism",
    "MonotonicityError",
    "Regime",
    "TimeAlphabet",
    "TimeFrame",
    "audit",
    "build_time_alphabet",
    "check_constraint_reduction",
    "cic_salary",
    "iic_salaries",
    "linear_pricing",
    "load_config",
    "load_menu",
    "replay_balances",
    "run_simulation",
    "sample_type_vector",
    "save_menu",
    "solve_cic",
    "solve_ctwt",
    "solve_iic",
    "to_micro_tokens",
    "update_cohort_size",
    "validate_config",
    "__version__",
]
