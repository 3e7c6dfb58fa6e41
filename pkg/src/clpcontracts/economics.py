"""Closed-form economic kernel: bonus-time factor, optimal effort, rewards,
client utility, and the cloud's per-item utility.

All functions are pure and operate on plain floats so solvers and auditors can
evaluate candidate menus without building intermediate objects.
"""

from __future__ import annotations

import math

from .market import MarketConfig, Mechanism, Regime, TimeFrame


def bonus_factor(t: int, timeframe: TimeFrame, vartheta: float) -> float:
    """Time-aware bonus unit: 1 + vartheta/ln(2t) inside the critical window,
    exactly 1 outside.  Strictly decreasing in t within the window."""
    if timeframe.regime_of(t) is Regime.CLP:
        return 1.0 + vartheta / math.log(2 * t)
    return 1.0


def effective_factor(mechanism: Mechanism, t: int, timeframe: TimeFrame, vartheta: float) -> float:
    """Bonus factor as the given mechanism weights it: time-unaware mechanisms
    treat every round equally (factor 1)."""
    if mechanism is Mechanism.R3T:
        return bonus_factor(t, timeframe, vartheta)
    return 1.0


def optimal_effort(theta: float, h: float, delta: float) -> float:
    """Effort maximizing the client's quadratic-cost payoff: theta*h/delta."""
    return theta * h / delta


def reward(salary: float, theta: float, h: float, delta: float) -> tuple[float, float]:
    """(bonus, total reward) at the optimal effort: bonus = theta^2 h^2 / delta."""
    bonus = theta * theta * h * h / delta
    return bonus, salary + bonus


def client_utility(theta: float, h: float, salary: float, delta: float, beta: float) -> float:
    """theta^2 h^2 / (2 delta) - (beta - 1) * salary, at the optimal effort.

    Evaluating a type against another type's item means passing that item's
    (h, salary) with this type's theta.
    """
    return theta * theta * h * h / (2.0 * delta) - (beta - 1.0) * salary


def gain(x: float) -> float:
    """Performance gain from a weighted contribution.  Identity by default;
    kept as a named hook so a concave alternative can be swapped in."""
    return x


def cloud_item_utility(theta: float, h: float, salary: float, delta: float, lam: float) -> float:
    """lam * gain(theta h^2 / delta) - (salary + theta^2 h^2 / delta)."""
    return lam * gain(theta * h * h / delta) - salary - theta * theta * h * h / delta


def item_spend(salary: float, theta: float, h: float, delta: float) -> float:
    """Cloud outlay for one item: salary plus the full bonus."""
    return salary + theta * theta * h * h / delta


def menu_lambda(cfg: MarketConfig, join_round: int) -> float:
    """Performance-weight parameter selected by the joining round's regime."""
    return cfg.lambda_for(join_round)
