"""Search alphabet of joining-round choices.

All non-critical rounds share bonus factor 1, so they collapse into a single
sentinel entry; the search space per type shrinks from T rounds to
|critical window| + 1 entries with no loss of optimality.
"""

from __future__ import annotations

from dataclasses import dataclass

from .economics import bonus_factor
from .market import TimeFrame


@dataclass(frozen=True)
class AlphabetEntry:
    join_round: int
    factor: float


@dataclass(frozen=True)
class TimeAlphabet:
    """Candidate joining rounds sorted by factor descending (earliest critical
    round first, non-critical sentinel last)."""

    entries: tuple[AlphabetEntry, ...]

    def __len__(self) -> int:
        return len(self.entries)

    def min_factor_entry(self) -> AlphabetEntry:
        return self.entries[-1]


def build_time_alphabet(
    timeframe: TimeFrame,
    vartheta: float,
    first_round: int = 1,
    unit_only: bool = False,
) -> TimeAlphabet:
    """Alphabet over rounds [first_round, T].

    ``unit_only`` forces the single factor-1 sentinel (time-unaware mechanisms).
    """
    if not 1 <= first_round <= timeframe.total_rounds:
        raise ValueError(f"first_round {first_round} outside [1, {timeframe.total_rounds}]")

    if unit_only:
        # placeholder round only; independent of first_round so time-unaware
        # menus come out identical no matter when they are solved
        t = timeframe.first_nonclp_round(1)
        return TimeAlphabet((AlphabetEntry(t if t is not None else 1, 1.0),))

    sentinel_round = timeframe.first_nonclp_round(first_round)

    entries = []
    if timeframe.has_clp():
        start = max(timeframe.clp_start, first_round)
        for t in range(start, timeframe.clp_end + 1):
            entries.append(AlphabetEntry(t, bonus_factor(t, timeframe, vartheta)))
    if sentinel_round is not None:
        entries.append(AlphabetEntry(sentinel_round, 1.0))
    if not entries:
        raise ValueError("empty alphabet: no candidate rounds at or after first_round")
    entries.sort(key=lambda e: -e.factor)
    return TimeAlphabet(tuple(entries))
