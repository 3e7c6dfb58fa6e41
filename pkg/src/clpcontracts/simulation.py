"""Multi-round game loop: per-round menu publication, cohort scheduling that
doubles inside the critical window and halves outside, an abstract training
performance proxy, and per-round accounting emitted into the settlement ledger.

One client per menu item trains per round: the lowest-id cohort member of each
type signs its type's item, and a type trains only in the round its item names
as the joining round.  Time-unaware mechanisms train every type present every
round.  Deterministic for a fixed config and seed.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field

from .benchmarks import linear_pricing, solve_ctwt
from .cic import solve_cic
from .economics import client_utility, effective_factor, gain
from .iic import solve_iic
from .ledger import Ledger, to_micro_tokens
from .market import (
    ContractMenu,
    InfeasibleError,
    InfoCase,
    MarketConfig,
    Mechanism,
    Regime,
    make_client_profiles,
    menu_to_dict,
)


def update_cohort_size(size: int, regime: Regime, n_clients: int) -> int:
    """Double inside the critical window (capped at N); halve outside with a
    ceil(N/2) floor.  Ceiling division keeps cohorts nonempty for odd sizes."""
    if not 1 <= size <= n_clients:
        raise ValueError(f"cohort size {size} outside [1, {n_clients}]")
    if regime is Regime.CLP:
        return min(2 * size, n_clients)
    return max(math.ceil(size / 2), math.ceil(n_clients / 2))


def detect_clp(losses: list[float], threshold: float) -> bool:
    """True while the relative drop between the last two recorded losses
    exceeds the threshold; with fewer than two entries the critical phase is
    assumed still running (seeds the start of training)."""
    if len(losses) < 2:
        return True
    prev, cur = losses[-2], losses[-1]
    if prev <= 0:
        return False
    return (prev - cur) / prev > threshold


@dataclass(frozen=True)
class PerformanceModel:
    """Saturating proxy for global model quality in [0, 1]."""

    p: float = 0.0
    kappa: float = 0.01

    @property
    def loss(self) -> float:
        return 1.0 - self.p


def advance_performance(
    model: PerformanceModel, contributions: list[tuple[float, float]]
) -> PerformanceModel:
    """p <- 1 - (1 - p) * exp(-kappa * sum of factor-weighted efforts).

    Additive in the exponent, so only the weighted total matters; p never
    decreases and never exceeds 1.
    """
    total = sum(h * e for e, h in contributions)
    if total <= 0:
        return model
    return PerformanceModel(1.0 - (1.0 - model.p) * math.exp(-model.kappa * total), model.kappa)


@dataclass(frozen=True)
class SignedItem:
    client_id: str
    type_index: int
    join_round: int
    effort: float
    factor: float
    salary: float
    reward: float
    reward_micro: int
    client_utility: float


@dataclass(frozen=True)
class RoundState:
    round: int
    regime: Regime
    cohort: tuple[str, ...]
    menu: ContractMenu | None
    signed: tuple[SignedItem, ...]
    spend: float
    cloud_utility: float
    client_utility: float
    performance: float

    @property
    def cohort_size(self) -> int:
        return len(self.cohort)


@dataclass(frozen=True)
class Totals:
    spend: float
    spend_micro: int
    cloud_utility: float
    client_utility_by_type: dict[int, float]


@dataclass
class SimTrace:
    mechanism: Mechanism
    info_case: InfoCase
    rounds: list[RoundState] = field(default_factory=list)
    complete: bool = True
    failure: str | None = None
    ledger: Ledger | None = None

    @property
    def totals(self) -> Totals:
        by_type: dict[int, float] = {}
        for state in self.rounds:
            for s in state.signed:
                by_type[s.type_index] = by_type.get(s.type_index, 0.0) + s.client_utility
        return Totals(
            spend=sum(r.spend for r in self.rounds),
            spend_micro=sum(s.reward_micro for r in self.rounds for s in r.signed),
            cloud_utility=sum(r.cloud_utility for r in self.rounds),
            client_utility_by_type=by_type,
        )

    @property
    def final_performance(self) -> float:
        return self.rounds[-1].performance if self.rounds else 0.0


def run_simulation(
    cfg: MarketConfig,
    mechanism: Mechanism,
    info_case: InfoCase = InfoCase.IIC,
    rounds: int | None = None,
    with_ledger: bool = True,
) -> SimTrace:
    """Execute the per-round game for ``rounds`` rounds (default the full
    horizon).  Solver infeasibility halts with a partial trace flagged
    incomplete.  Bit-identical traces for identical (config, seed)."""
    total_rounds = cfg.T if rounds is None else rounds
    if not 0 <= total_rounds <= cfg.T:
        raise ValueError(f"rounds {total_rounds} outside [0, {cfg.T}]")

    trace = SimTrace(mechanism, info_case)
    rng = random.Random(cfg.rng_seed)
    profiles = make_client_profiles(cfg)
    by_id = {p.client_id: p for p in profiles}
    all_ids = sorted(by_id)

    ledger: Ledger | None = Ledger() if with_ledger else None
    if ledger is not None:
        for p in profiles:
            ledger.register(p.client_id, p.type_index, p.wallet)

    ctwt_menu: ContractMenu | None = None
    if mechanism is Mechanism.CTWT and total_rounds > 0:
        try:
            ctwt_menu = solve_ctwt(cfg, info_case)
        except InfeasibleError as exc:
            trace.complete = False
            trace.failure = str(exc)
            trace.ledger = ledger
            return trace

    model = PerformanceModel()
    losses: list[float] = []
    size = cfg.initial_cohort_size()
    linear_terms = linear_pricing(cfg)

    for t in range(1, total_rounds + 1):
        if cfg.clp_detect_threshold is not None:
            regime = Regime.CLP if detect_clp(losses, cfg.clp_detect_threshold) else Regime.NON_CLP
        else:
            regime = cfg.timeframe.regime_of(t)
        lam = cfg.lambda_clp if regime is Regime.CLP else cfg.lambda_nonclp

        if t > 1:
            size = update_cohort_size(size, regime, cfg.N)
        cohort = tuple(sorted(rng.sample(all_ids, size)))

        menu: ContractMenu | None = None
        try:
            if mechanism is Mechanism.R3T:
                if info_case is InfoCase.CIC:
                    menu = solve_cic(cfg, first_round=t)
                else:
                    menu = solve_iic(cfg, first_round=t)
            elif mechanism is Mechanism.CTWT:
                menu = ctwt_menu
        except InfeasibleError as exc:
            trace.complete = False
            trace.failure = str(exc)
            break

        if ledger is not None and menu is not None:
            ledger.publish_menu(t, menu_to_dict(menu))

        # lowest-id cohort member of each type represents its item this round
        representative: dict[int, str] = {}
        for cid in cohort:
            k = by_id[cid].type_index
            representative.setdefault(k, cid)

        signed: list[SignedItem] = []
        spend = 0.0
        cloud = 0.0
        client_total = 0.0
        contributions: list[tuple[float, float]] = []

        if mechanism is Mechanism.LINEAR:
            types_present = sorted(representative)
            if cfg.linear_budget_cap:
                affordable = int(cfg.budget // linear_terms.payment) if linear_terms.payment > 0 else len(types_present)
                types_present = types_present[max(0, len(types_present) - affordable):]
            for k in types_present:
                cid = representative[k]
                payment = linear_terms.payment
                micro = to_micro_tokens(payment)
                signed.append(
                    SignedItem(
                        cid, k, t, linear_terms.effort, 1.0, 0.0, payment, micro,
                        linear_terms.client_utility,
                    )
                )
                spend += payment
                cloud += lam * gain(linear_terms.effort) - payment
                client_total += linear_terms.client_utility
                contributions.append((linear_terms.effort, 1.0))
                if ledger is not None:
                    blob = ledger.store_blob(f"update r{t} {cid}".encode("utf-8"))
                    ledger.submit_contribution(cid, t, k, blob, amount_micro=micro)
        elif menu is not None:
            for k in sorted(representative):
                item = menu.item(k)
                trains_now = mechanism is Mechanism.CTWT or item.join_round == t
                if not trains_now:
                    continue
                cid = representative[k]
                h = effective_factor(mechanism, item.join_round, cfg.timeframe, cfg.vartheta)
                theta = cfg.theta(k)
                micro = to_micro_tokens(item.reward)
                rent = client_utility(theta, h, item.salary, cfg.delta, cfg.beta)
                signed.append(
                    SignedItem(
                        cid, k, item.join_round, item.effort, h, item.salary,
                        item.reward, micro, rent,
                    )
                )
                spend += item.reward
                cloud += lam * gain(theta * h * h / cfg.delta) - item.reward
                client_total += rent
                contributions.append((item.effort, h))
                if ledger is not None:
                    blob = ledger.store_blob(f"update r{t} {cid}".encode("utf-8"))
                    ledger.submit_contribution(cid, t, k, blob)

        model = advance_performance(model, contributions)
        losses.append(model.loss)

        if ledger is not None:
            total_effort = sum(e for e, _ in contributions)
            weights = ",".join(
                f"{s.type_index}:{(s.effort / total_effort):.12f}" for s in signed
            ) if total_effort > 0 else ""
            ledger.store_blob(f"global r{t} p{model.p:.12f} w[{weights}]".encode("utf-8"))
            if cfg.settle_per_round:
                ledger.settle(through_round=t)

        trace.rounds.append(
            RoundState(
                round=t,
                regime=regime,
                cohort=cohort,
                menu=menu,
                signed=tuple(signed),
                spend=spend,
                cloud_utility=cloud,
                client_utility=client_total,
                performance=model.p,
            )
        )

    if ledger is not None and not cfg.settle_per_round:
        ledger.settle()
    trace.ledger = ledger
    return trace


def trace_to_jsonl(trace: SimTrace) -> str:
    """Line-delimited round records plus a totals footer."""
    lines = []
    for state in trace.rounds:
        lines.append(
            json.dumps(
                {
                    "record": "round",
                    "round": state.round,
                    "regime": state.regime.value,
                    "cohort_size": state.cohort_size,
                    "cohort": list(state.cohort),
                    "signed": [
                        {
                            "client_id": s.client_id,
                            "type_index": s.type_index,
                            "join_round": s.join_round,
                            "effort": s.effort,
                            "reward": s.reward,
                            "reward_micro": s.reward_micro,
                        }
                        for s in state.signed
                    ],
                    "spend": state.spend,
                    "cloud_utility": state.cloud_utility,
                    "client_utility": state.client_utility,
                    "performance": state.performance,
                },
                sort_keys=True,
                separators=(",", ":"),
            )
        )
    totals = trace.totals
    lines.append(
        json.dumps(
            {
                "record": "totals",
                "mechanism": trace.mechanism.value,
                "info_case": trace.info_case.value,
                "complete": trace.complete,
                "failure": trace.failure,
                "spend": totals.spend,
                "spend_micro": totals.spend_micro,
                "cloud_utility": totals.cloud_utility,
                "client_utility_by_type": {
                    str(k): v for k, v in sorted(totals.client_utility_by_type.items())
                },
                "final_performance": trace.final_performance,
            },
            sort_keys=True,
            separators=(",", ":"),
        )
    )
    return "\n".join(lines) + "\n"
