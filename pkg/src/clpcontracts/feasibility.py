"""Standalone auditor certifying any contract menu against the participation,
self-selection, budget, and ordering constraints.

Pure functions of (menu, config): auditing a solver's own output must always
pass; that is the module's core regression gate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .economics import client_utility, effective_factor
from .market import TOLERANCE, ContractMenu, InfoCase, MarketConfig, Mechanism, Regime


@dataclass(frozen=True)
class FeasibilityReport:
    ir_violations: tuple[tuple[int, float], ...]
    ic_violations: tuple[tuple[int, int, float], ...]
    bf_excess: float
    monotonicity_failures: tuple[tuple[str, int], ...]
    passed: bool

    def to_dict(self) -> dict:
        return {
            "ir_violations": [list(v) for v in self.ir_violations],
            "ic_violations": [list(v) for v in self.ic_violations],
            "bf_excess": self.bf_excess,
            "monotonicity_failures": [list(v) for v in self.monotonicity_failures],
            "pass": self.passed,
        }


def item_factor(menu: ContractMenu, k: int, cfg: MarketConfig) -> float:
    """Bonus factor the menu's mechanism applies to item k's joining round."""
    return effective_factor(menu.mechanism, menu.item(k).join_round, cfg.timeframe, cfg.vartheta)


def utility_matrix(cfg: MarketConfig, menu: ContractMenu) -> list[list[float]]:
    """U[k-1][j-1]: utility of a type-k client signing item j (re-optimizing
    its effort against item j's joining round and salary)."""
    K = len(menu.items)
    factors = [item_factor(menu, j, cfg) for j in range(1, K + 1)]
    matrix = []
    for k in range(1, K + 1):
        theta = cfg.theta(k)
        matrix.append(
            [
                client_utility(theta, factors[j], menu.item(j + 1).salary, cfg.delta, cfg.beta)
                for j in range(K)
            ]
        )
    return matrix


def check_ir(menu: ContractMenu, cfg: MarketConfig) -> list[tuple[int, float]]:
    """Types whose own-item utility is negative beyond tolerance, with deficit."""
    out = []
    for k in range(1, len(menu.items) + 1):
        u = client_utility(
            cfg.theta(k), item_factor(menu, k, cfg), menu.item(k).salary, cfg.delta, cfg.beta
        )
        if u < -TOLERANCE:
            out.append((k, -u))
    return out


def check_ic(menu: ContractMenu, cfg: MarketConfig) -> list[tuple[int, int, float]]:
    """Ordered pairs (k, k') where type k strictly prefers item k', with gap."""
    matrix = utility_matrix(cfg, menu)
    out = []
    K = len(menu.items)
    for k in range(K):
        for j in range(K):
            if j == k:
                continue
            gap = matrix[k][j] - matrix[k][k]
            if gap > TOLERANCE:
                out.append((k + 1, j + 1, gap))
    return out


def check_bf(menu: ContractMenu, cfg: MarketConfig) -> float:
    """Total (multiplicity-weighted) menu reward minus the per-round budget."""
    total = sum(cfg.multiplicity_of(it.type_index) * it.reward for it in menu.items)
    return total - cfg.budget


def _chain_failures(values, name, strict, out):
    for k, (lo, hi) in enumerate(zip(values, values[1:]), start=2):
        if strict:
            if hi <= lo - TOLERANCE:
                out.append((name, k))
        else:
            if hi < lo - TOLERANCE:
                out.append((name, k))


def check_monotonicity(menu: ContractMenu, cfg: MarketConfig, regime: Regime) -> list[tuple[str, int]]:
    """Ordering chain across adjacent types for the given menu regime.

    Critical-window menus: reward and bonus and effort strictly increase,
    salary never decreases, joining round never increases.  Menus with no
    critical rounds: all salaries equal, factor 1 everywhere, reward and
    effort still strictly increase.
    """
    out: list[tuple[str, int]] = []
    items = menu.items
    if len(items) < 2 and regime is Regime.CLP:
        return out
    rewards = [it.reward for it in items]
    bonuses = [it.bonus for it in items]
    efforts = [it.effort for it in items]
    salaries = [it.salary for it in items]
    joins = [it.join_round for it in items]

    if regime is Regime.CLP:
        _chain_failures(rewards, "R", True, out)
        _chain_failures(salaries, "r", False, out)
        _chain_failures(bonuses, "B", True, out)
        _chain_failures(efforts, "e", True, out)
        for k, (lo, hi) in enumerate(zip(joins, joins[1:]), start=2):
            if hi > lo:
                out.append(("t", k))
    else:
        _chain_failures(rewards, "R", True, out)
        _chain_failures(efforts, "e", True, out)
        for k, it in enumerate(items, start=1):
            if abs(it.salary - items[0].salary) > TOLERANCE:
                out.append(("r", k))
            if abs(item_factor(menu, k, cfg) - 1.0) > TOLERANCE:
                out.append(("h", k))
    return out


def menu_regime(menu: ContractMenu, cfg: MarketConfig) -> Regime:
    """Which ordering chain applies: time-unaware menus and empty critical
    windows follow the flat-salary chain."""
    if menu.mechanism is not Mechanism.R3T or not cfg.timeframe.has_clp():
        return Regime.NON_CLP
    return Regime.CLP


def audit(menu: ContractMenu, cfg: MarketConfig) -> FeasibilityReport:
    """Full audit.  Self-selection and ordering constraints only bind when
    types are hidden, so they are skipped for complete-information menus
    (the cloud observes types and assigns items directly)."""
    ir = tuple(check_ir(menu, cfg))
    if menu.info_case is InfoCase.IIC:
        ic = tuple(check_ic(menu, cfg))
        mono = tuple(check_monotonicity(menu, cfg, menu_regime(menu, cfg)))
    else:
        ic = ()
        mono = ()
    bf = check_bf(menu, cfg)
    passed = not ir and not ic and not mono and bf <= TOLERANCE
    return FeasibilityReport(ir, ic, bf, mono, passed)
