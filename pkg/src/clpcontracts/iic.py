"""Optimal contract menu under incomplete information.

Hidden types force the salary schedule into a telescoping recursion: each
type's salary adds the adjacent self-selection increment on top of the type
below, with the bottom type's participation constraint binding.  Any menu that
is self-selection feasible must assign weakly earlier rounds (weakly larger
bonus factors) to higher types, so the search runs over non-decreasing factor
sequences only; the full ordering conditions are re-verified on the winner.
"""

from __future__ import annotations

from dataclasses import dataclass

from .alphabet import TimeAlphabet, build_time_alphabet
from .economics import cloud_item_utility, optimal_effort
from .feasibility import check_ic, check_monotonicity, menu_regime
from .market import (
    TOLERANCE,
    ContractItem,
    ContractMenu,
    InfeasibleError,
    InfoCase,
    MarketConfig,
    Mechanism,
    MonotonicityError,
)


def iic_salaries(
    thetas: tuple[float, ...] | list[float],
    hs: list[float],
    delta: float,
    beta: float,
) -> list[float]:
    """Salary schedule r_k = sum_{i<=k} theta_i^2 (h_i^2 - h_{i-1}^2) / (2 delta (beta-1)),
    with h_0 = 0 so the bottom type's salary binds its participation constraint.

    Requires a non-decreasing factor sequence.
    """
    if len(thetas) != len(hs):
        raise ValueError("thetas and hs must have equal length")
    for i in range(1, len(hs)):
        if hs[i] < hs[i - 1] - TOLERANCE:
            raise MonotonicityError(f"factor sequence decreases at position {i + 1}")
    out = []
    r = 0.0
    prev_h2 = 0.0
    denom = 2.0 * delta * (beta - 1.0)
    for theta, h in zip(thetas, hs):
        h2 = h * h
        r += theta * theta * (h2 - prev_h2) / denom
        prev_h2 = h2
        out.append(r)
    return out


@dataclass(frozen=True)
class ConstraintReductionReport:
    """Outcome of brute-forcing every ordered-pair self-selection check on a
    menu built from adjacent-constraint equalities alone."""

    max_violation: float
    violations: tuple[tuple[int, int, float], ...]

    @property
    def passed(self) -> bool:
        return self.max_violation <= TOLERANCE


def check_constraint_reduction(cfg: MarketConfig, menu: ContractMenu) -> ConstraintReductionReport:
    """Verify that satisfying adjacent constraints implies all K(K-1) pairwise
    ones.  Delegates to the pairwise auditor and reports the worst gap."""
    violations = tuple(check_ic(menu, cfg))
    max_violation = max((v[2] for v in violations), default=0.0)
    return ConstraintReductionReport(max_violation, violations)


def _ascending_entries(alphabet: TimeAlphabet):
    """Entries by factor ascending (sentinel first, earliest critical round last)."""
    return tuple(reversed(alphabet.entries))


def solve_iic(
    cfg: MarketConfig,
    first_round: int = 1,
    unit_factor: bool = False,
) -> ContractMenu:
    """Optimal hidden-type menu over rounds [first_round, T].

    Exact search over non-decreasing factor assignments with remaining-budget
    and value-bound pruning; ties break toward earlier join rounds, then lower
    total spend.  Raises InfeasibleError when the cheapest menu exceeds the
    budget and MonotonicityError if the winner fails the full ordering check.
    """
    alphabet = build_time_alphabet(cfg.timeframe, cfg.vartheta, first_round, unit_only=unit_factor)
    entries = _ascending_entries(alphabet)
    K = cfg.K
    thetas = cfg.thetas
    delta = cfg.delta
    denom = 2.0 * delta * (cfg.beta - 1.0)
    n_entries = len(entries)
    lam = [cfg.lambda_for(e.join_round) for e in entries]
    h2 = [e.factor * e.factor for e in entries]

    # Suffix sums for the remaining-budget prune: keeping the current factor is
    # the cheapest continuation (no further salary increments).
    mults = [cfg.multiplicity_of(k) for k in range(1, K + 1)]
    suf_m = [0.0] * (K + 2)
    suf_mth2 = [0.0] * (K + 2)
    for k in range(K, 0, -1):
        suf_m[k] = suf_m[k + 1] + mults[k - 1]
        suf_mth2[k] = suf_mth2[k + 1] + mults[k - 1] * thetas[k - 1] ** 2

    # Value bound: per type, the best achievable gain-minus-bonus over entries
    # at or above a given factor index; salaries only ever add cost, so
    # best_rest[k][i] = sum over types > k of that per-type maximum.
    per_type_max = [[0.0] * n_entries for _ in range(K + 1)]
    for k in range(1, K + 1):
        th = thetas[k - 1]
        running = float("-inf")
        for i in range(n_entries - 1, -1, -1):
            cand = lam[i] * th * h2[i] / delta - th * th * h2[i] / delta
            running = max(running, cand)
            per_type_max[k][i] = running
    best_rest = [[0.0] * n_entries for _ in range(K + 1)]
    for i in range(n_entries):
        acc = 0.0
        for k in range(K, 0, -1):
            best_rest[k - 1][i] = acc + per_type_max[k][i]
            acc += per_type_max[k][i]

    budget = cfg.budget
    best: tuple[float, tuple[int, ...], float] | None = None
    best_state: list[tuple[int, float, float]] | None = None  # (entry idx, salary, bonus)
    stack: list[tuple[int, float, float]] = []
    joins_stack: list[int] = []

    def descend(k: int, min_idx: int, prev_h2: float, prev_join: int, r_prev: float,
                value: float, weight: float) -> None:
        nonlocal best, best_state
        if k > K:
            joins = tuple(joins_stack)
            cand = (value, joins, weight)
            if best is None or _better(cand, best):
                best = cand
                best_state = stack.copy()
            return
        if best is not None:
            bound = value + best_rest[k - 1][min_idx] - (K - k + 1) * r_prev
            if bound < best[0] - TOLERANCE:
                return
        th = thetas[k - 1]
        for i in range(min_idx, n_entries):
            entry = entries[i]
            if entry.join_round > prev_join:
                continue  # factor order must also be joining-round order
            r_k = r_prev + th * th * (h2[i] - prev_h2) / denom
            bonus = th * th * h2[i] / delta
            w = weight + mults[k - 1] * (r_k + bonus)
            min_future = suf_m[k + 1] * r_k + suf_mth2[k + 1] * h2[i] / delta
            if w + min_future > budget + TOLERANCE:
                continue
            v = lam[i] * th * h2[i] / delta - r_k - bonus
            stack.append((i, r_k, bonus))
            joins_stack.append(entry.join_round)
            descend(k + 1, i, h2[i], entry.join_round, r_k, value + v, w)
            stack.pop()
            joins_stack.pop()

    descend(1, 0, 0.0, cfg.T + 1, 0.0, 0.0, 0.0)

    if best is None:
        raise InfeasibleError(
            f"cheapest menu exceeds budget {cfg.budget:.6f} for every factor assignment"
        )

    assert best_state is not None
    items = []
    for k, (i, salary, bonus) in enumerate(best_state, start=1):
        entry = entries[i]
        items.append(
            ContractItem(
                type_index=k,
                effort=optimal_effort(thetas[k - 1], entry.factor, delta),
                join_round=entry.join_round,
                salary=salary,
                bonus=bonus,
                reward=salary + bonus,
            )
        )
    mechanism = Mechanism.CTWT if unit_factor else Mechanism.R3T
    menu = ContractMenu(tuple(items), InfoCase.IIC, mechanism)

    failures = check_monotonicity(menu, cfg, menu_regime(menu, cfg))
    if failures:
        raise MonotonicityError(f"solution failed ordering post-check: {failures}")
    return menu


def _better(cand, best) -> bool:
    if cand[0] != best[0]:
        return cand[0] > best[0]
    if cand[1] != best[1]:
        return cand[1] < best[1]
    return cand[2] < best[2]


def iic_objective(cfg: MarketConfig, menu: ContractMenu) -> float:
    """Summed per-item cloud utility of a hidden-type menu."""
    total = 0.0
    for it in menu.items:
        theta = cfg.theta(it.type_index)
        h = it.effort * cfg.delta / theta
        total += cloud_item_utility(theta, h, it.salary, cfg.delta, cfg.lambda_for(it.join_round))
    return total
