"""Reference mechanisms: time-unaware contract menus and linear pricing.

The time-unaware variants reuse the contract solvers verbatim with the bonus
factor frozen at 1, so any difference in outcomes is attributable solely to
time-awareness.
"""

from __future__ import annotations

from dataclasses import dataclass

from .cic import solve_cic
from .economics import gain
from .iic import solve_iic
from .market import ContractMenu, InfoCase, MarketConfig


def solve_ctwt(cfg: MarketConfig, info_case: InfoCase, first_round: int = 1) -> ContractMenu:
    """Contract menu with every round weighted equally (factor 1).  The stored
    joining round is a scheduling placeholder carrying no utility weight."""
    if info_case is InfoCase.CIC:
        return solve_cic(cfg, first_round=first_round, unit_factor=True)
    return solve_iic(cfg, first_round=first_round, unit_factor=True)


@dataclass(frozen=True)
class LinearOutcome:
    """Per-type outcome under a posted unit price: every type responds with
    the same effort, so one record covers all of them."""

    effort: float
    payment: float
    client_utility: float
    cloud_utility: float


def linear_pricing(cfg: MarketConfig, lam: float | None = None) -> LinearOutcome:
    """Posted price C per unit of effort: the client maximizes C*e - d*e^2/2,
    giving effort C/d, payment C^2/d, and client surplus C^2/(2d).

    No salary, no bonus, no time weighting; capability never enters."""
    if lam is None:
        lam = cfg.lambda_nonclp
    c, d = cfg.unit_price, cfg.delta
    effort = c / d
    payment = c * effort
    client = payment - 0.5 * d * effort * effort
    cloud = lam * gain(effort) - payment
    return LinearOutcome(effort, payment, client, cloud)
