"""Domain types, validation, and configuration parsing for the contract market.

Every scalar and vector the solvers, benchmarks, simulator, and ledger consume
lives here as an immutable, validated value object.  ``validate_config`` is the
single constructor gate: downstream modules assume a config that passed it.
"""

from __future__ import annotations

import hashlib
import json
import random
import re
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path

TOLERANCE = 1e-9

MENU_SCHEMA = "contract-menu/v1"


class InfoCase(Enum):
    CIC = "cic"
    IIC = "iic"


class Mechanism(Enum):
    R3T = "r3t"
    CTWT = "ctwt"
    LINEAR = "linear"


class Regime(Enum):
    CLP = "clp"
    NON_CLP = "non_clp"


class ConfigError(ValueError):
    """One or more configuration invariants failed; carries all violations."""

    def __init__(self, violations: list[tuple[str, str]]):
        self.violations = list(violations)
        detail = "; ".join(f"{name}: {reason}" for name, reason in self.violations)
        super().__init__(f"invalid configuration: {detail}")


class InfeasibleError(RuntimeError):
    """Even the cheapest admissible menu exceeds the per-round budget."""


class MonotonicityError(RuntimeError):
    """A time assignment breaks the ordering required across client types."""


@dataclass(frozen=True)
class TimeFrame:
    """Training horizon of ``total_rounds`` rounds with an optional contiguous
    window of critical rounds ``[clp_start, clp_end]`` (inclusive, 1-based).

    ``clp_start is None`` means no round is critical.
    """

    total_rounds: int
    clp_start: int | None = None
    clp_end: int | None = None

    def has_clp(self) -> bool:
        return self.clp_start is not None

    def in_clp(self, t: int) -> bool:
        return self.clp_start is not None and self.clp_start <= t <= self.clp_end

    def regime_of(self, t: int) -> Regime:
        if not 1 <= t <= self.total_rounds:
            raise ValueError(f"round {t} outside [1, {self.total_rounds}]")
        return Regime.CLP if self.in_clp(t) else Regime.NON_CLP

    def clp_rounds(self) -> range:
        if self.clp_start is None:
            return range(0)
        return range(self.clp_start, self.clp_end + 1)

    def first_nonclp_round(self, start: int = 1) -> int | None:
        """Earliest non-critical round >= ``start``, preferring rounds after
        the critical window so that a larger bonus factor always means an
        earlier (or equal) joining round."""
        if not self.has_clp():
            return start if start <= self.total_rounds else None
        after = max(start, self.clp_end + 1)
        if after <= self.total_rounds:
            return after
        if start < self.clp_start:
            return start
        return None


@dataclass(frozen=True)
class MarketConfig:
    """All scalar market parameters plus the sorted capability vector."""

    K: int
    N: int
    T: int
    delta: float
    beta: float
    lambda_clp: float
    lambda_nonclp: float
    budget: float
    unit_price: float
    timeframe: TimeFrame
    thetas: tuple[float, ...]
    rng_seed: int
    vartheta: float = 1.0
    initial_cohort: int | None = None
    multiplicity: tuple[int, ...] | None = None
    clp_detect_threshold: float | None = None
    linear_budget_cap: bool = False
    settle_per_round: bool = False

    def lambda_for(self, t: int) -> float:
        return self.lambda_clp if self.timeframe.regime_of(t) is Regime.CLP else self.lambda_nonclp

    def multiplicity_of(self, k: int) -> int:
        if self.multiplicity is None:
            return 1
        return self.multiplicity[k - 1]

    def theta(self, k: int) -> float:
        return self.thetas[k - 1]

    def initial_cohort_size(self) -> int:
        return self.initial_cohort if self.initial_cohort is not None else min(5, self.N)


@dataclass(frozen=True)
class ContractItem:
    """One (effort, joining round, salary, bonus, total reward) bundle."""

    type_index: int
    effort: float
    join_round: int
    salary: float
    bonus: float
    reward: float


@dataclass(frozen=True)
class ContractMenu:
    """The cloud's published offer: exactly one item per type, in type order."""

    items: tuple[ContractItem, ...]
    info_case: InfoCase
    mechanism: Mechanism

    def item(self, k: int) -> ContractItem:
        return self.items[k - 1]

    def total_reward(self) -> float:
        return sum(it.reward for it in self.items)


@dataclass(frozen=True)
class ClientProfile:
    client_id: str
    type_index: int
    wallet: str


def make_client_profiles(cfg: MarketConfig) -> tuple[ClientProfile, ...]:
    """N clients assigned to the K types round-robin in capability order."""
    profiles = []
    for i in range(1, cfg.N + 1):
        cid = f"c{i:03d}"
        wallet = "0x" + hashlib.sha256(cid.encode("utf-8")).hexdigest()[:40]
        profiles.append(ClientProfile(cid, ((i - 1) % cfg.K) + 1, wallet))
    return tuple(profiles)


def sample_type_vector(seed: int, k: int, low: float, high: float) -> tuple[float, ...]:
    """K uniform draws on [low, high], sorted ascending, strictly increasing.

    Duplicates are re-drawn; deterministic for a fixed seed.
    """
    if low <= 0:
        raise ValueError("low must be positive")
    if high <= low:
        raise ValueError("high must exceed low")
    rng = random.Random(seed)
    values = sorted(rng.uniform(low, high) for _ in range(k))
    for _ in range(1000):
        dup = [i for i in range(1, k) if values[i] <= values[i - 1]]
        if not dup:
            return tuple(values)
        for i in dup:
            values[i] = rng.uniform(low, high)
        values.sort()
    raise RuntimeError("could not draw a strictly increasing type vector in 1000 attempts")


def validate_config(cfg: MarketConfig) -> MarketConfig:
    """Check every config invariant; collect all failures before raising."""
    bad: list[tuple[str, str]] = []
    if cfg.K < 1:
        bad.append(("K", "must be at least 1"))
    if cfg.N < 1:
        bad.append(("N", "must be at least 1"))
    if cfg.K > cfg.N:
        bad.append(("K", "must not exceed N (each type needs a client)"))
    if cfg.T < 1:
        bad.append(("T", "must be at least 1"))
    if cfg.delta <= 0:
        bad.append(("delta", "must be positive"))
    if cfg.beta <= 1:
        bad.append(("beta", "must exceed 1"))
    if cfg.vartheta <= 0:
        bad.append(("vartheta", "must be positive"))
    if cfg.lambda_clp <= 0:
        bad.append(("lambda_clp", "must be positive"))
    if cfg.lambda_nonclp <= 0:
        bad.append(("lambda_nonclp", "must be positive"))
    if cfg.budget <= 0:
        bad.append(("budget", "must be positive"))
    if cfg.unit_price <= 0:
        bad.append(("unit_price", "must be positive"))

    tf = cfg.timeframe
    if tf.total_rounds != cfg.T:
        bad.append(("timeframe", f"total_rounds {tf.total_rounds} != T {cfg.T}"))
    if (tf.clp_start is None) != (tf.clp_end is None):
        bad.append(("timeframe", "clp_start and clp_end must be set together"))
    elif tf.clp_start is not None and not (1 <= tf.clp_start <= tf.clp_end <= tf.total_rounds):
        bad.append(("timeframe", f"window [{tf.clp_start}, {tf.clp_end}] outside [1, {tf.total_rounds}]"))

    if len(cfg.thetas) != cfg.K:
        bad.append(("thetas", f"length {len(cfg.thetas)} != K {cfg.K}"))
    if any(th <= 0 for th in cfg.thetas):
        bad.append(("thetas", "all capabilities must be positive"))
    if any(b <= a for a, b in zip(cfg.thetas, cfg.thetas[1:])):
        bad.append(("thetas", "not strictly increasing"))

    if cfg.initial_cohort is not None and not 1 <= cfg.initial_cohort <= cfg.N:
        bad.append(("initial_cohort", f"must lie in [1, {cfg.N}]"))
    if cfg.multiplicity is not None:
        if len(cfg.multiplicity) != cfg.K:
            bad.append(("multiplicity", f"length {len(cfg.multiplicity)} != K {cfg.K}"))
        elif any(m < 1 for m in cfg.multiplicity):
            bad.append(("multiplicity", "per-type counts must be at least 1"))
    if cfg.clp_detect_threshold is not None and cfg.clp_detect_threshold <= 0:
        bad.append(("clp_detect_threshold", "must be positive when set"))

    if bad:
        raise ConfigError(bad)
    return cfg


# --------------------------------------------------------------------------
# Config file format: "key = value" lines, '#' comment lines, keys exactly
# matching MarketConfig field names.  Unknown keys are an error.
# --------------------------------------------------------------------------

_INT_KEYS = {"K", "N", "T", "rng_seed", "initial_cohort"}
_FLOAT_KEYS = {
    "delta",
    "beta",
    "vartheta",
    "lambda_clp",
    "lambda_nonclp",
    "budget",
    "unit_price",
    "clp_detect_threshold",
}
_BOOL_KEYS = {"linear_budget_cap", "settle_per_round"}
_REQUIRED_KEYS = {
    "K",
    "N",
    "T",
    "delta",
    "beta",
    "lambda_clp",
    "lambda_nonclp",
    "budget",
    "unit_price",
    "timeframe",
    "thetas",
    "rng_seed",
}
_ALL_KEYS = (
    _INT_KEYS
    | _FLOAT_KEYS
    | _BOOL_KEYS
    | {"timeframe", "thetas", "multiplicity"}
)

_UNIFORM_RE = re.compile(r"^uniform\(\s*([^,\s]+)\s*,\s*([^)\s]+)\s*\)$")


def parse_config_text(text: str) -> MarketConfig:
    raw: dict[str, str] = {}
    bad: list[tuple[str, str]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            bad.append((f"line {lineno}", f"expected 'key = value', got {stripped!r}"))
            continue
        key, _, value = stripped.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _ALL_KEYS:
            bad.append((key, "unknown key"))
            continue
        if key in raw:
            bad.append((key, "duplicate key"))
            continue
        raw[key] = value

    for key in sorted(_REQUIRED_KEYS - raw.keys()):
        bad.append((key, "missing required key"))
    if bad:
        raise ConfigError(bad)

    values: dict[str, object] = {}
    for key, text_value in raw.items():
        try:
            if key in _INT_KEYS:
                values[key] = int(text_value)
            elif key in _FLOAT_KEYS:
                values[key] = None if text_value.lower() == "none" else float(text_value)
            elif key in _BOOL_KEYS:
                lowered = text_value.lower()
                if lowered not in ("true", "false"):
                    raise ValueError("expected true or false")
                values[key] = lowered == "true"
            elif key == "timeframe":
                values[key] = text_value  # resolved below, needs T
            elif key == "thetas":
                values[key] = text_value  # resolved below, needs K and rng_seed
            elif key == "multiplicity":
                if text_value.lower() == "none":
                    values[key] = None
                else:
                    values[key] = tuple(int(part) for part in text_value.split(","))
        except ValueError as exc:
            bad.append((key, f"bad value {text_value!r}: {exc}"))
    if bad:
        raise ConfigError(bad)

    total_rounds = values["T"]
    tf_text = str(values["timeframe"])
    if tf_text.lower() == "none":
        timeframe = TimeFrame(total_rounds)
    else:
        match = re.match(r"^(\d+)\s*:\s*(\d+)$", tf_text)
        if not match:
            raise ConfigError([("timeframe", f"expected 'start:end' or 'none', got {tf_text!r}")])
        timeframe = TimeFrame(total_rounds, int(match.group(1)), int(match.group(2)))
    values["timeframe"] = timeframe

    theta_text = str(values["thetas"])
    uniform = _UNIFORM_RE.match(theta_text)
    try:
        if uniform:
            low, high = float(uniform.group(1)), float(uniform.group(2))
            values["thetas"] = sample_type_vector(values["rng_seed"], values["K"], low, high)
        else:
            values["thetas"] = tuple(float(part) for part in theta_text.split(","))
    except ValueError as exc:
        raise ConfigError([("thetas", f"bad value {theta_text!r}: {exc}")]) from exc

    return validate_config(MarketConfig(**values))


def load_config(path: str | Path) -> MarketConfig:
    return parse_config_text(Path(path).read_text(encoding="utf-8"))


def config_digest(path_or_text: str | Path) -> str:
    """SHA-256 of the raw config text, for run manifests."""
    if isinstance(path_or_text, Path):
        text = path_or_text.read_text(encoding="utf-8")
    else:
        text = path_or_text
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


# --------------------------------------------------------------------------
# Menu serialization (the same document the auditor accepts).
# --------------------------------------------------------------------------


def menu_to_dict(menu: ContractMenu) -> dict:
    return {
        "schema": MENU_SCHEMA,
        "mechanism": menu.mechanism.value,
        "info_case": menu.info_case.value,
        "items": [
            {
                "type_index": it.type_index,
                "effort": it.effort,
                "join_round": it.join_round,
                "salary": it.salary,
                "bonus": it.bonus,
                "reward": it.reward,
            }
            for it in menu.items
        ],
    }


def menu_from_dict(doc: dict) -> ContractMenu:
    if doc.get("schema") != MENU_SCHEMA:
        raise ValueError(f"unsupported menu schema: {doc.get('schema')!r}")
    items = []
    for entry in doc["items"]:
        items.append(
            ContractItem(
                type_index=int(entry["type_index"]),
                effort=float(entry["effort"]),
                join_round=int(entry["join_round"]),
                salary=float(entry["salary"]),
                bonus=float(entry["bonus"]),
                reward=float(entry["reward"]),
            )
        )
    items.sort(key=lambda it: it.type_index)
    expected = list(range(1, len(items) + 1))
    if [it.type_index for it in items] != expected:
        raise ValueError("menu must contain exactly one item per type index 1..K")
    return ContractMenu(tuple(items), InfoCase(doc["info_case"]), Mechanism(doc["mechanism"]))


def save_menu(menu: ContractMenu, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(menu_to_dict(menu), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def load_menu(path: str | Path) -> ContractMenu:
    return menu_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def with_overrides(cfg: MarketConfig, **changes) -> MarketConfig:
    """Replace fields and re-validate (sweeps use this per parameter value)."""
    return validate_config(replace(cfg, **changes))
