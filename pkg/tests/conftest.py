from __future__ import annotations

import functools
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from wmorita.suites import RunConfig, Session  # noqa: E402


@functools.lru_cache(maxsize=None)
def session(family: str = "gl", rank: int = 2, prime: int = 3, partition: tuple = (), seed: int = 42,
            eta_samples: int = 5) -> Session:
    """Shared lazily built objects for one configuration."""
    return Session(RunConfig(family=family, rank=rank, prime=prime, partition=partition, seed=seed,
                             eta_samples=eta_samples))


@pytest.fixture
def gl2():
    return session("gl", 2, 3)


@pytest.fixture
def sl2p5():
    return session("sl", 2, 5)


@pytest.fixture
def gl2_zero():
    return session("gl", 2, 3, (1, 1))


@pytest.fixture
def rng():
    return np.random.default_rng(2024)
