"""Deterministic in-process settlement ledger.

An append-only, hash-chained event log standing in for the settlement
workflow: registration, menu publication, contribution submission,
content-addressed blob storage, and reward payout.  No consensus, gas, or
networking; the log models the audit semantics (non-repudiation,
replayability) and is the sole source of truth for balances.

Digest algorithm: SHA-256 over the canonical JSON encoding of
(sequence, kind, payload, prev_hash).  Token amounts are integer micro-tokens
(reward x 10^6, rounded half-even) so replay is bit-stable.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

GENESIS_HASH = "0" * 64

MICRO = 1_000_000


class EventKind(Enum):
    REGISTER = "register"
    PUBLISH_MENU = "publish_menu"
    SUBMIT_CONTRIBUTION = "submit_contribution"
    STORE_BLOB = "store_blob"
    SETTLE = "settle"


class LedgerError(RuntimeError):
    pass


class DuplicateIdError(LedgerError):
    pass


class UnregisteredError(LedgerError):
    pass


class NoActiveMenuError(LedgerError):
    pass


class AlreadySettledError(LedgerError):
    pass


def to_micro_tokens(amount: float) -> int:
    """Half-even integer micro-tokens."""
    return round(amount * MICRO)


def event_hash(sequence: int, kind: str, payload: dict, prev_hash: str) -> str:
    canonical = json.dumps(
        {"sequence": sequence, "kind": kind, "payload": payload, "prev_hash": prev_hash},
        sort_keys=True,
        separators=(",", ":"),
    )
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class LedgerEvent:
    sequence: int
    kind: EventKind
    payload: dict
    prev_hash: str
    hash: str

    def to_dict(self) -> dict:
        return {
            "sequence": self.sequence,
            "kind": self.kind.value,
            "payload": self.payload,
            "prev_hash": self.prev_hash,
            "hash": self.hash,
        }


class Ledger:
    """Single-writer append-only event log with an internal index for the
    checks each operation needs.  Balances are always replay-derived."""

    def __init__(self) -> None:
        self.events: list[LedgerEvent] = []
        self._registered: set[str] = set()
        self._menus_by_round: dict[int, dict] = {}
        self._settled_submissions: set[int] = set()
        self._fully_settled = False

    # -- primitives --------------------------------------------------------

    def _append(self, kind: EventKind, payload: dict) -> LedgerEvent:
        sequence = len(self.events)
        prev = self.events[-1].hash if self.events else GENESIS_HASH
        digest = event_hash(sequence, kind.value, payload, prev)
        event = LedgerEvent(sequence, kind, payload, prev, digest)
        self.events.append(event)
        return event

    # -- operations --------------------------------------------------------

    def register(self, client_id: str, type_index: int, wallet: str) -> LedgerEvent:
        if client_id in self._registered:
            raise DuplicateIdError(f"id already registered: {client_id}")
        self._registered.add(client_id)
        return self._append(
            EventKind.REGISTER,
            {"client_id": client_id, "type_index": type_index, "wallet": wallet},
        )

    def publish_menu(self, round_index: int, menu_doc: dict) -> LedgerEvent:
        payload = {"round": round_index, "menu": menu_doc}
        self._menus_by_round[round_index] = menu_doc
        return self._append(EventKind.PUBLISH_MENU, payload)

    def submit_contribution(
        self,
        client_id: str,
        round_index: int,
        item_choice: int,
        blob_hash: str,
        amount_micro: int | None = None,
    ) -> LedgerEvent:
        """On-chain record of a signed item and the stored update it points at.

        ``amount_micro`` is only carried for menu-less (posted-price) payouts;
        menu payouts are recomputed from the round's published menu at
        settlement time.
        """
        if client_id not in self._registered:
            raise UnregisteredError(f"id not registered: {client_id}")
        menu = self._menus_by_round.get(round_index)
        if menu is None:
            if amount_micro is None:
                raise NoActiveMenuError(f"no menu published for round {round_index}")
        else:
            n_items = len(menu["items"])
            if not 1 <= item_choice <= n_items:
                raise LedgerError(f"item {item_choice} outside menu of {n_items} items")
        payload = {
            "client_id": client_id,
            "round": round_index,
            "item_choice": item_choice,
            "blob_hash": blob_hash,
        }
        if amount_micro is not None:
            payload["amount_micro"] = amount_micro
        return self._append(EventKind.SUBMIT_CONTRIBUTION, payload)

    def store_blob(self, blob: bytes) -> str:
        """Content-addressed storage: the event carries only hash and length."""
        digest = hashlib.sha256(blob).hexdigest()
        self._append(EventKind.STORE_BLOB, {"blob_hash": digest, "length": len(blob)})
        return digest

    def settle(self, through_round: int | None = None) -> list[LedgerEvent]:
        """Pay every unsettled contribution (optionally only up to a round).

        Menu contributions pay the recorded item's reward from that round's
        published menu; posted-price contributions pay their carried amount.
        """
        if self._fully_settled and through_round is None:
            raise AlreadySettledError("ledger already settled")
        payouts = []
        for event in list(self.events):
            if event.kind is not EventKind.SUBMIT_CONTRIBUTION:
                continue
            if event.sequence in self._settled_submissions:
                continue
            round_index = event.payload["round"]
            if through_round is not None and round_index > through_round:
                continue
            if "amount_micro" in event.payload:
                amount = event.payload["amount_micro"]
            else:
                menu = self._menus_by_round[round_index]
                item = menu["items"][event.payload["item_choice"] - 1]
                amount = to_micro_tokens(item["reward"])
            self._settled_submissions.add(event.sequence)
            payouts.append(
                self._append(
                    EventKind.SETTLE,
                    {
                        "client_id": event.payload["client_id"],
                        "round": round_index,
                        "submission": event.sequence,
                        "amount_micro": amount,
                    },
                )
            )
        if through_round is None:
            self._fully_settled = True
        return payouts

    # -- verification and persistence ---------------------------------------

    def verify_chain(self) -> bool:
        return verify_chain(self.events)

    def to_jsonl(self) -> str:
        return "".join(
            json.dumps(e.to_dict(), sort_keys=True, separators=(",", ":")) + "\n"
            for e in self.events
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_jsonl(), encoding="utf-8")


def events_from_jsonl(text: str) -> list[LedgerEvent]:
    events = []
    for line in text.splitlines():
        if not line.strip():
            continue
        doc = json.loads(line)
        events.append(
            LedgerEvent(
                sequence=doc["sequence"],
                kind=EventKind(doc["kind"]),
                payload=doc["payload"],
                prev_hash=doc["prev_hash"],
                hash=doc["hash"],
            )
        )
    return events


def load_events(path: str | Path) -> list[LedgerEvent]:
    return events_from_jsonl(Path(path).read_text(encoding="utf-8"))


def verify_chain(events: list[LedgerEvent]) -> bool:
    """Recompute every hash link; True iff the whole chain is intact."""
    prev = GENESIS_HASH
    for i, event in enumerate(events):
        if event.sequence != i or event.prev_hash != prev:
            return False
        if event_hash(event.sequence, event.kind.value, event.payload, event.prev_hash) != event.hash:
            return False
        prev = event.hash
    return True


def replay_balances(events: list[LedgerEvent]) -> dict[str, int]:
    """Account balances in micro-tokens, derived purely from settle events."""
    balances: dict[str, int] = {}
    for event in events:
        if event.kind is EventKind.SETTLE:
            cid = event.payload["client_id"]
            balances[cid] = balances.get(cid, 0) + event.payload["amount_micro"]
    return balances


def total_settled(events: list[LedgerEvent]) -> int:
    return sum(e.payload["amount_micro"] for e in events if e.kind is EventKind.SETTLE)
