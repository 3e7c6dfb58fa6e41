"""Hash-chained event log: chain integrity, replay, settlement, golden digest."""

import hashlib

import pytest

from clpcontracts.ledger import (
    MICRO,
    AlreadySettledError,
    DuplicateIdError,
    EventKind,
    Ledger,
    LedgerError,
    LedgerEvent,
    NoActiveMenuError,
    UnregisteredError,
    events_from_jsonl,
    replay_balances,
    to_micro_tokens,
    total_settled,
    verify_chain,
)
from clpcontracts.market import Mechanism, menu_to_dict
from clpcontracts.simulation import run_simulation

from conftest import table2_config


MENU_DOC = {
    "schema": "contract-menu/v1",
    "mechanism": "r3t",
    "info_case": "iic",
    "items": [
        {"type_index": 1, "effort": 1.0, "join_round": 1, "salary": 0.25, "bonus": 1.0, "reward": 1.25},
        {"type_index": 2, "effort": 2.0, "join_round": 1, "salary": 0.25, "bonus": 4.0, "reward": 4.25},
    ],
}


def _seeded_ledger() -> Ledger:
    ledger = Ledger()
    ledger.register("c001", 1, "0xaa")
    ledger.register("c002", 2, "0xbb")
    ledger.publish_menu(1, MENU_DOC)
    blob = ledger.store_blob(b"model update bytes")
    ledger.submit_contribution("c001", 1, 1, blob)
    ledger.submit_contribution("c002", 1, 2, blob)
    return ledger


def test_register_sequences():
    ledger = _seeded_ledger()
    assert [e.sequence for e in ledger.events] == list(range(len(ledger.events)))
    assert ledger.events[0].kind is EventKind.REGISTER


def test_duplicate_registration_rejected():
    ledger = _seeded_ledger()
    with pytest.raises(DuplicateIdError):
        ledger.register("c001", 1, "0xcc")


def test_unregistered_submission_rejected():
    ledger = _seeded_ledger()
    with pytest.raises(UnregisteredError):
        ledger.submit_contribution("ghost", 1, 1, "00")


def test_submission_requires_menu():
    ledger = Ledger()
    ledger.register("c001", 1, "0xaa")
    with pytest.raises(NoActiveMenuError):
        ledger.submit_contribution("c001", 3, 1, "00")


def test_submission_item_bounds():
    ledger = _seeded_ledger()
    with pytest.raises(LedgerError):
        ledger.submit_contribution("c001", 1, 3, "00")


def test_store_blob_content_addressed():
    ledger = Ledger()
    h1 = ledger.store_blob(b"same bytes")
    h2 = ledger.store_blob(b"same bytes")
    assert h1 == h2 == hashlib.sha256(b"same bytes").hexdigest()
    assert len(ledger.events) == 2  # two events, one hash


def test_store_blob_empty_and_distinct():
    ledger = Ledger()
    empty = ledger.store_blob(b"")
    assert empty == hashlib.sha256(b"").hexdigest()
    assert ledger.store_blob(b"a") != ledger.store_blob(b"b")


def test_settle_pays_menu_rewards():
    ledger = _seeded_ledger()
    payouts = ledger.settle()
    amounts = {p.payload["client_id"]: p.payload["amount_micro"] for p in payouts}
    assert amounts == {"c001": int(1.25 * MICRO), "c002": int(4.25 * MICRO)}


def test_settle_twice_rejected():
    ledger = _seeded_ledger()
    ledger.settle()
    with pytest.raises(AlreadySettledError):
        ledger.settle()


def test_balances_replay_from_log_only():
    ledger = _seeded_ledger()
    ledger.settle()
    direct = replay_balances(ledger.events)
    reloaded = replay_balances(events_from_jsonl(ledger.to_jsonl()))
    assert direct == reloaded
    assert direct == {"c001": 1250000, "c002": 4250000}


def test_verify_chain_on_untampered_log():
    ledger = _seeded_ledger()
    ledger.settle()
    assert ledger.verify_chain()
    assert verify_chain([]) is True


def test_verify_chain_detects_payload_tamper():
    ledger = _seeded_ledger()
    ledger.settle()
    events = list(ledger.events)
    victim = events[3]
    tampered_payload = dict(victim.payload)
    key = sorted(tampered_payload)[0]
    tampered_payload[key] = "tampered"
    events[3] = LedgerEvent(victim.sequence, victim.kind, tampered_payload, victim.prev_hash, victim.hash)
    assert verify_chain(events) is False


def test_verify_chain_detects_reordering():
    ledger = _seeded_ledger()
    events = list(ledger.events)
    events[1], events[2] = events[2], events[1]
    assert verify_chain(events) is False


def test_micro_token_rounding_half_even():
    # (2k+1)/(2*MICRO) scales back to an exact k + 0.5 tie in binary
    assert to_micro_tokens(2.5 / MICRO) == 2  # ties go to the even side
    assert to_micro_tokens(3.5 / MICRO) == 4
    assert to_micro_tokens(4.5 / MICRO) == 4
    assert to_micro_tokens(5.5 / MICRO) == 6
    assert to_micro_tokens(2.5) == 2500000
    assert to_micro_tokens(1.25) == 1250000


def test_simulation_ledger_reconciles(table2):
    trace = run_simulation(table2, Mechanism.R3T)
    ledger = trace.ledger
    assert ledger.verify_chain()
    assert total_settled(ledger.events) == trace.totals.spend_micro
    balances = replay_balances(ledger.events)
    assert sum(balances.values()) == trace.totals.spend_micro


def test_per_round_settlement_option():
    cfg = table2_config(settle_per_round=True)
    trace = run_simulation(cfg, Mechanism.R3T)
    ledger = trace.ledger
    assert total_settled(ledger.events) == trace.totals.spend_micro
    # settle events interleave with rounds rather than trailing the log
    kinds = [e.kind for e in ledger.events]
    first_settle = kinds.index(EventKind.SETTLE)
    assert any(k is EventKind.PUBLISH_MENU for k in kinds[first_settle:])


def test_golden_chain_digest():
    # pins the canonical encoding + digest algorithm; any change breaks replay
    ledger = Ledger()
    ledger.register("c001", 1, "0xaa")
    ledger.publish_menu(1, MENU_DOC)
    blob = ledger.store_blob(b"fixed bytes")
    ledger.submit_contribution("c001", 1, 1, blob)
    ledger.settle()
    assert ledger.events[-1].hash == (
        "db68e9f0ba01e90fc4dfc42587b1593f07a33a1335387f5a96cfa2f2800faeda"
    )


def test_trace_and_ledger_match_menu_documents(table2):
    trace = run_simulation(table2, Mechanism.R3T)
    menus = {
        e.payload["round"]: e.payload["menu"]
        for e in trace.ledger.events
        if e.kind is EventKind.PUBLISH_MENU
    }
    for state in trace.rounds:
        assert menus[state.round] == menu_to_dict(state.menu)
