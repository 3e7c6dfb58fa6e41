"""Shared fixtures and config builders for the test suite."""

from __future__ import annotations

import random

import pytest

from clpcontracts.market import MarketConfig, TimeFrame, sample_type_vector, validate_config

DEFAULT_SEED = 7


def table2_config(
    seed: int = DEFAULT_SEED,
    budget: float = 60.0,
    delta: float = 1.0,
    vartheta: float = 1.0,
    **overrides,
) -> MarketConfig:
    """The default experimental setting: 10 types on U(1,2), 15 clients,
    25 rounds, critical window 1-10, lambda 21/20, beta 3, price 2.4."""
    base = dict(
        K=10,
        N=15,
        T=25,
        delta=delta,
        beta=3.0,
        lambda_clp=21.0,
        lambda_nonclp=20.0,
        budget=budget,
        unit_price=2.4,
        timeframe=TimeFrame(25, 1, 10),
        thetas=sample_type_vector(seed, 10, 1.0, 2.0),
        rng_seed=seed,
        vartheta=vartheta,
        initial_cohort=5,
    )
    base.update(overrides)
    return validate_config(MarketConfig(**base))


def small_config(
    thetas,
    timeframe: TimeFrame,
    budget: float,
    delta: float = 1.0,
    beta: float = 3.0,
    lambda_clp: float = 21.0,
    lambda_nonclp: float = 20.0,
    vartheta: float = 1.0,
    **overrides,
) -> MarketConfig:
    thetas = tuple(thetas)
    base = dict(
        K=len(thetas),
        N=len(thetas),
        T=timeframe.total_rounds,
        delta=delta,
        beta=beta,
        lambda_clp=lambda_clp,
        lambda_nonclp=lambda_nonclp,
        budget=budget,
        unit_price=2.4,
        timeframe=timeframe,
        thetas=thetas,
        rng_seed=1,
        vartheta=vartheta,
        initial_cohort=1,
    )
    base.update(overrides)
    return validate_config(MarketConfig(**base))


def spend_floor(cfg: MarketConfig) -> float:
    """Cheapest possible menu spend (every type at factor 1, binding salary)."""
    per_type = 1.0 / (2.0 * cfg.delta * (cfg.beta - 1.0)) + 1.0 / cfg.delta
    return sum(
        cfg.multiplicity_of(k) * cfg.thetas[k - 1] ** 2 * per_type for k in range(1, cfg.K + 1)
    )


def random_config(
    rng: random.Random,
    max_types: int = 4,
    max_alphabet: int = 5,
    allow_empty_window: bool = True,
) -> MarketConfig:
    """Random valid config with both solvers feasible; the alphabet size is
    capped so brute-force oracles stay cheap."""
    k = rng.randint(1, max_types)
    t_total = rng.randint(2, 8)
    roll = rng.random()
    if allow_empty_window and roll < 0.15:
        tf = TimeFrame(t_total)
    else:
        start = 1 if roll < 0.85 else rng.randint(1, t_total)
        width = rng.randint(0, max_alphabet - 2) if max_alphabet > 1 else 0
        end = min(start + width, t_total)
        # keep one non-critical round when the window would cover everything
        if start == 1 and end == t_total and t_total > 1:
            end -= 1
        tf = TimeFrame(t_total, start, end)
    thetas = sorted(rng.uniform(0.4, 3.0) for _ in range(k))
    while any(b <= a for a, b in zip(thetas, thetas[1:])):
        thetas = sorted(rng.uniform(0.4, 3.0) for _ in range(k))
    delta = rng.uniform(0.2, 2.0)
    beta = rng.uniform(1.5, 4.0)
    floor = sum(th * th * (1.0 / (2 * delta * (beta - 1)) + 1.0 / delta) for th in thetas)
    budget = floor * rng.uniform(1.001, 4.0)
    return small_config(
        thetas,
        tf,
        budget,
        delta=delta,
        beta=beta,
        lambda_clp=rng.uniform(2.0, 25.0),
        lambda_nonclp=rng.uniform(2.0, 25.0),
        vartheta=rng.uniform(0.3, 2.0),
        rng_seed=rng.randint(0, 10**6),
    )


@pytest.fixture(scope="session")
def table2():
    return table2_config()
