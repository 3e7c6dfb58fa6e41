"""Optimal contract menu under complete information.

Every type's participation constraint binds (zero client surplus), so the only
decision left is each type's joining round.  That is a multiple-choice budget
problem: each type picks one alphabet entry; value and spend depend only on
its own pick.  Solved exactly by depth-first branch and bound with a
fractional relaxation bound plus remaining-budget pruning.
"""

from __future__ import annotations

from dataclasses import dataclass

from .alphabet import TimeAlphabet, build_time_alphabet
from .economics import cloud_item_utility, gain, item_spend, optimal_effort
from .market import (
    TOLERANCE,
    ContractItem,
    ContractMenu,
    InfeasibleError,
    InfoCase,
    MarketConfig,
    Mechanism,
)


def cic_salary(theta: float, h: float, delta: float, beta: float) -> float:
    """The unique salary making the client's utility exactly zero:
    theta^2 h^2 / (2 delta (beta - 1))."""
    return theta * theta * h * h / (2.0 * delta * (beta - 1.0))


@dataclass(frozen=True)
class _Choice:
    entry_index: int
    join_round: int
    factor: float
    salary: float
    bonus: float
    value: float
    weight: float  # multiplicity-weighted spend against the budget


def _choices_for_type(cfg: MarketConfig, k: int, alphabet: TimeAlphabet) -> list[_Choice]:
    theta = cfg.theta(k)
    m = cfg.multiplicity_of(k)
    out = []
    for idx, entry in enumerate(alphabet.entries):
        salary = cic_salary(theta, entry.factor, cfg.delta, cfg.beta)
        bonus = theta * theta * entry.factor * entry.factor / cfg.delta
        value = cloud_item_utility(
            theta, entry.factor, salary, cfg.delta, cfg.lambda_for(entry.join_round)
        )
        weight = m * (salary + bonus)
        out.append(_Choice(idx, entry.join_round, entry.factor, salary, bonus, value, weight))
    return out


def _is_better(
    value: float,
    joins: tuple[int, ...],
    spend: float,
    best: tuple[float, tuple[int, ...], float] | None,
) -> bool:
    """Maximize value; tie-break toward earlier join rounds, then lower spend."""
    if best is None:
        return True
    bv, bj, bs = best
    if value != bv:
        return value > bv
    if joins != bj:
        return joins < bj
    return spend < bs


def _suffix_bounds(per_type: list[list[_Choice]]):
    """For each suffix of types: sum of minimum weights, value at those minima,
    and the convex improvement steps for a fractional relaxation bound."""
    K = len(per_type)
    min_w = [0.0] * (K + 1)
    base_v = [0.0] * (K + 1)
    steps: list[list[tuple[float, float]]] = [[] for _ in range(K + 1)]
    for k in range(K - 1, -1, -1):
        choices = sorted(per_type[k], key=lambda c: (c.weight, -c.value))
        frontier = [choices[0]]
        for c in choices[1:]:
            if c.value > frontier[-1].value + 1e-15:
                frontier.append(c)
        # convexify: keep steps with decreasing value-per-weight ratio
        incs: list[tuple[float, float]] = []
        for prev, cur in zip(frontier, frontier[1:]):
            dw, dv = cur.weight - prev.weight, cur.value - prev.value
            while incs and dw > 0 and incs[-1][1] / incs[-1][0] <= dv / dw:
                dw += incs[-1][0]
                dv += incs[-1][1]
                incs.pop()
            incs.append((dw, dv))
        min_w[k] = min_w[k + 1] + frontier[0].weight
        base_v[k] = base_v[k + 1] + frontier[0].value
        merged = incs + steps[k + 1]
        merged.sort(key=lambda s: -(s[1] / s[0]) if s[0] > 0 else float("-inf"))
        steps[k] = merged
    return min_w, base_v, steps


def _relaxation_bound(min_w, base_v, steps, k: int, budget_left: float) -> float:
    slack = budget_left - min_w[k]
    if slack < -TOLERANCE:
        return float("-inf")
    bound = base_v[k]
    for dw, dv in steps[k]:
        if dv <= 0:
            break
        if dw <= slack:
            bound += dv
            slack -= dw
        else:
            if dw > 0:
                bound += dv * (slack / dw)
            break
    return bound


def optimize_choices(cfg: MarketConfig, alphabet: TimeAlphabet) -> list[_Choice]:
    """Exact maximizer of the summed per-item cloud utility subject to the
    per-round budget.  Deterministic under the stated tie-break."""
    K = cfg.K
    per_type = [_choices_for_type(cfg, k, alphabet) for k in range(1, K + 1)]
    min_w, base_v, steps = _suffix_bounds(per_type)
    if min_w[0] > cfg.budget + TOLERANCE:
        raise InfeasibleError(
            f"cheapest menu spends {min_w[0]:.6f} > budget {cfg.budget:.6f}"
        )

    best: tuple[float, tuple[int, ...], float] | None = None
    best_picks: list[_Choice] | None = None
    picks: list[_Choice] = []

    def descend(k: int, value: float, weight: float) -> None:
        nonlocal best, best_picks
        if k == K:
            joins = tuple(c.join_round for c in picks)
            if _is_better(value, joins, weight, best):
                best = (value, joins, weight)
                best_picks = picks.copy()
            return
        if best is not None:
            bound = value + _relaxation_bound(min_w, base_v, steps, k, cfg.budget - weight)
            if bound < best[0] - TOLERANCE:
                return
        for choice in per_type[k]:
            w = weight + choice.weight
            if w + min_w[k + 1] > cfg.budget + TOLERANCE:
                continue
            picks.append(choice)
            descend(k + 1, value + choice.value, w)
            picks.pop()

    descend(0, 0.0, 0.0)
    assert best_picks is not None
    return best_picks


def _menu_from_choices(cfg: MarketConfig, picks: list[_Choice], mechanism: Mechanism, info_case: InfoCase) -> ContractMenu:
    items = []
    for k, choice in enumerate(picks, start=1):
        theta = cfg.theta(k)
        effort = optimal_effort(theta, choice.factor, cfg.delta)
        items.append(
            ContractItem(
                type_index=k,
                effort=effort,
                join_round=choice.join_round,
                salary=choice.salary,
                bonus=choice.bonus,
                reward=choice.salary + choice.bonus,
            )
        )
    return ContractMenu(tuple(items), info_case, mechanism)


def solve_cic(
    cfg: MarketConfig,
    first_round: int = 1,
    unit_factor: bool = False,
) -> ContractMenu:
    """Optimal complete-information menu over rounds [first_round, T].

    ``unit_factor`` freezes the bonus factor at 1 (time-unaware variant).
    Raises InfeasibleError when even the all-factor-1 menu exceeds the budget.
    """
    alphabet = build_time_alphabet(cfg.timeframe, cfg.vartheta, first_round, unit_only=unit_factor)
    picks = optimize_choices(cfg, alphabet)
    mechanism = Mechanism.CTWT if unit_factor else Mechanism.R3T
    return _menu_from_choices(cfg, picks, mechanism, InfoCase.CIC)


def cic_objective(cfg: MarketConfig, menu: ContractMenu) -> float:
    """Summed per-item cloud utility of a complete-information menu."""
    total = 0.0
    for it in menu.items:
        theta = cfg.theta(it.type_index)
        h = it.effort * cfg.delta / theta
        total += cloud_item_utility(theta, h, it.salary, cfg.delta, cfg.lambda_for(it.join_round))
    return total
