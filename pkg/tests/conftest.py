import numpy as np
import pytest

from hivabm.domain import SimConfig

DESK = dict(
    max_fsw=100, max_infected_fsw=5, max_primary=500, max_secondary=500,
    max_exsecondary=100, tobecoupled=400, couplings_per_month=2,
    avg_client_month=10, fsw_preference=0.5, transmission_probability=1.0,
    ticks=120,
)


def make_config(**overrides) -> SimConfig:
    base = dict(
        max_primary=6, max_secondary=6, max_fsw=4, max_infected_fsw=1,
        max_exsecondary=3, tobecoupled=4, commitment=50, condom_usage=30,
        couplings_per_month=2, avg_client_month=2, ticks=6, seed=7,
        fsw_preference=0.5, transmission_probability=1.0,
    )
    base.update(overrides)
    return SimConfig(**base)


def desk_config(**overrides) -> SimConfig:
    base = dict(DESK, commitment=50, condom_usage=50, seed=0)
    base.update(overrides)
    return SimConfig(**base)


def random_small_config(gen: np.random.Generator, seed: int) -> SimConfig:
    """A valid config with at most 30 persons and 12 ticks."""
    n_fsw = int(gen.integers(1, 8))
    n_pri = int(gen.integers(1, 9))
    n_sec = int(gen.integers(1, 9))
    n_ex = int(gen.integers(0, 30 - n_fsw - n_pri - n_sec + 1))
    n_ex = min(n_ex, 8)
    return SimConfig(
        max_primary=n_pri, max_secondary=n_sec, max_fsw=n_fsw,
        max_infected_fsw=int(gen.integers(0, n_fsw + 1)),
        max_exsecondary=n_ex,
        tobecoupled=int(gen.integers(0, min(n_pri, n_sec) + 1)),
        commitment=int(gen.choice([0, 100, int(gen.integers(0, 101))])),
        condom_usage=int(gen.choice([0, 100, int(gen.integers(0, 101))])),
        couplings_per_month=int(gen.integers(1, 4)),
        avg_client_month=int(gen.integers(1, 4)),
        ticks=int(gen.integers(0, 13)),
        seed=seed,
        fsw_preference=float(gen.choice([0.0, 1.0, gen.random()])),
        transmission_probability=float(gen.choice([0.0, 1.0, gen.random()])),
    )


@pytest.fixture
def small_cfg():
    return make_config()


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
