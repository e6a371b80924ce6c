"""Per-tick output counters computed from world state and infection provenance."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import TYPE_CHECKING

from .domain import PersonType, Source

if TYPE_CHECKING:
    from .domain import SimConfig
    from .engine import WorldState


@dataclass(frozen=True)
class CounterSnapshot:
    tick: int
    infected_fsws: int
    infected_primaries: int
    infected_secondaries: int
    noncommitted_secondaries: int
    noncommitted_infected_secondaries: int
    total_infected: int
    fsw_back_infected: int
    primaries_back_infected: int
    primaries_back_infected_from_secondary: int
    primaries_back_infected_from_exsecondary: int

    def as_row(self) -> tuple[int, ...]:
        return dataclasses.astuple(self)


SNAPSHOT_COLUMNS = tuple(f.name for f in dataclasses.fields(CounterSnapshot))
# every column except tick is a measured quantity
COUNTER_FIELDS = SNAPSHOT_COLUMNS[1:]


def compute_counters(world: "WorldState", cfg: "SimConfig | None" = None) -> CounterSnapshot:
    """Count infections by sub-population and by provenance.

    ``cfg`` is accepted for symmetry with the other world-level checks; the
    counters depend on the world alone.
    """
    infected = {t: 0 for t in PersonType}
    n_exsec = 0
    fsw_back = from_sec = from_exsec = 0
    for p in world.persons:
        if p.ptype == PersonType.EXSECONDARY:
            n_exsec += 1
        if not p.infected:
            continue
        infected[p.ptype] += 1
        src = p.provenance.source
        if p.ptype == PersonType.FSW and src == Source.FROM_PRIMARY:
            fsw_back += 1
        elif p.ptype == PersonType.PRIMARY:
            if src == Source.FROM_SECONDARY:
                from_sec += 1
            elif src == Source.FROM_EXSECONDARY:
                from_exsec += 1
    return CounterSnapshot(
        tick=world.tick,
        infected_fsws=infected[PersonType.FSW],
        infected_primaries=infected[PersonType.PRIMARY],
        infected_secondaries=infected[PersonType.SECONDARY],
        noncommitted_secondaries=n_exsec,
        noncommitted_infected_secondaries=infected[PersonType.EXSECONDARY],
        total_infected=sum(infected.values()),
        fsw_back_infected=fsw_back,
        primaries_back_infected=from_sec + from_exsec,
        primaries_back_infected_from_secondary=from_sec,
        primaries_back_infected_from_exsecondary=from_exsec,
    )


def new_infections(snapshots: list[CounterSnapshot], initial_total: int) -> list[int]:
    """Per-tick increments of total_infected."""
    out = []
    prev = initial_total
    for s in snapshots:
        out.append(s.total_infected - prev)
        prev = s.total_infected
    return out
