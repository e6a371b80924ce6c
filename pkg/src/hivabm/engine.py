"""Population setup, partnership formation and the monthly coupling loop.

A tick is one month. Within a tick every Primary, in ascending id order, makes
``couplings_per_month`` coupling attempts. Each attempt first draws against the
commitment level: a committed draw means the partner (or no contact at all for
a Primary without one); otherwise the Primary defects to an FSW with spare
capacity or an ExSecondary. The condom rule is then applied and may transmit
infection between a discordant pair. Transmissions take effect immediately.

The hot loop is compiled with numba. The single-step Python operations
(:func:`select_coupling_target`, :func:`apply_condom_usage`) call the same
compiled primitives, so both paths consume the random stream identically.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np
from numba import njit

from . import rng as _rng
from .domain import (
    GENDER_OF,
    SEEDED,
    ConfigError,
    InfectionProvenance,
    Person,
    PersonId,
    PersonState,
    PersonType,
    SimConfig,
    Source,
    validate_config,
)
from .metrics import CounterSnapshot, compute_counters

_FSW = 0
_PRIMARY = 1
_SECONDARY = 2
_EXSECONDARY = 3
_N_COUNTERS = 10


@dataclass(frozen=True)
class WorldState:
    persons: tuple[Person, ...]  # persons[i].id == i
    partnerships: frozenset[tuple[int, int]]  # (primary_id, secondary_id)
    tick: int = 0

    def ids_of(self, ptype: PersonType) -> list[int]:
        return [p.id for p in self.persons if p.ptype == ptype]

    def count(self, ptype: PersonType) -> int:
        return sum(1 for p in self.persons if p.ptype == ptype)

    def infected_ids(self) -> set[int]:
        return {p.id for p in self.persons if p.infected}


@dataclass(frozen=True, slots=True)
class CouplingEvent:
    tick: int
    male: int
    female: int
    protected_act: bool
    transmission: Optional[tuple[int, int]] = None  # (infected_id, source_id)


@dataclass
class Trace:
    config: SimConfig
    seed: int
    events: list[CouplingEvent]
    snapshots: list[CounterSnapshot]
    final_state: Optional[WorldState]
    final_counters: Optional[CounterSnapshot] = None

    def __post_init__(self):
        if self.final_counters is None:
            if self.snapshots:
                self.final_counters = self.snapshots[-1]
            elif self.final_state is not None:
                self.final_counters = compute_counters(self.final_state)


class PreconditionError(RuntimeError):
    pass


# --- population set-up --------------------------------------------------------


def setup_initial_population(cfg: SimConfig, stream: _rng.Stream) -> WorldState:
    """Create every agent uninfected and unpartnered, then seed infected FSWs.

    Ids are assigned in blocks: FSWs, Primaries, Secondaries, ExSecondaries.
    The seeded FSWs are a uniform random subset.
    """
    problems = validate_config(cfg)
    if problems:
        raise ConfigError(problems)
    blocks = [
        (PersonType.FSW, cfg.max_fsw),
        (PersonType.PRIMARY, cfg.max_primary),
        (PersonType.SECONDARY, cfg.max_secondary),
        (PersonType.EXSECONDARY, cfg.max_exsecondary),
    ]
    seeded = set(stream.sample(range(cfg.max_fsw), cfg.max_infected_fsw))
    persons = []
    for ptype, n in blocks:
        for _ in range(n):
            pid = len(persons)
            if pid in seeded and ptype == PersonType.FSW:
                persons.append(Person(pid, ptype, GENDER_OF[ptype],
                                      PersonState.INFECTED, None, SEEDED))
            else:
                persons.append(Person(pid, ptype, GENDER_OF[ptype]))
    return WorldState(tuple(persons), frozenset(), 0)


def make_partners(world: WorldState, cfg: SimConfig, stream: _rng.Stream) -> WorldState:
    if world.tick != 0 or world.partnerships:
        raise PreconditionError("make_partners runs once, on a fresh tick-0 world")
    k = min(cfg.tobecoupled, cfg.max_primary, cfg.max_secondary)
    primaries = stream.sample(world.ids_of(PersonType.PRIMARY), k)
    secondaries = stream.sample(world.ids_of(PersonType.SECONDARY), k)
    persons = list(world.persons)
    pairs = set()
    for p, s in zip(primaries, secondaries):
        persons[p] = Person(p, PersonType.PRIMARY, persons[p].gender,
                            persons[p].state, PersonId(s), persons[p].provenance)
        persons[s] = Person(s, PersonType.SECONDARY, persons[s].gender,
                            persons[s].state, PersonId(p), persons[s].provenance)
        pairs.add((p, s))
    return WorldState(tuple(persons), frozenset(pairs), world.tick)


# --- array form ---------------------------------------------------------------


@dataclass
class _Arrays:
    ptype: np.ndarray
    infected: np.ndarray
    partner: np.ndarray
    source: np.ndarray
    inf_tick: np.ndarray
    primaries: np.ndarray
    fsws: np.ndarray
    exsecs: np.ndarray
    load: np.ndarray = field(default=None)


def _to_arrays(world: WorldState) -> _Arrays:
    n = len(world.persons)
    ptype = np.empty(n, np.int64)
    infected = np.zeros(n, np.bool_)
    partner = np.full(n, -1, np.int64)
    source = np.full(n, -1, np.int64)
    inf_tick = np.full(n, -1, np.int64)
    for p in world.persons:
        ptype[p.id] = p.ptype
        if p.partner is not None:
            partner[p.id] = p.partner
        if p.infected:
            infected[p.id] = True
            source[p.id] = p.provenance.source
            inf_tick[p.id] = p.provenance.tick
    return _Arrays(
        ptype, infected, partner, source, inf_tick,
        np.flatnonzero(ptype == _PRIMARY),
        np.flatnonzero(ptype == _FSW),
        np.flatnonzero(ptype == _EXSECONDARY),
        np.zeros(n, np.int64),
    )


def _from_arrays(a: _Arrays, world: WorldState, tick: int) -> WorldState:
    persons = list(world.persons)
    for pid in np.flatnonzero(a.infected):
        pid = int(pid)
        old = persons[pid]
        if not old.infected:
            prov = InfectionProvenance(Source(int(a.source[pid])), int(a.inf_tick[pid]))
            persons[pid] = Person(pid, old.ptype, old.gender, PersonState.INFECTED,
                                  old.partner, prov)
    return WorldState(tuple(persons), world.partnerships, tick)


# --- compiled primitives ------------------------------------------------------


@njit(cache=True, nogil=True)
def _select(pid, partner, avail, n_avail, exsecs, commitment, fsw_pref, s):
    # a committed draw keeps the Primary out of casual contact: he couples with
    # his partner, or with nobody if he has none
    t = _rng.threshold_draw(s)
    if commitment >= t:
        return partner[pid]
    want_fsw = _rng.uniform(s) < fsw_pref
    n_ex = exsecs.shape[0]
    if want_fsw:
        if n_avail > 0:
            return avail[_rng.below(s, n_avail)]
        if n_ex > 0:
            return exsecs[_rng.below(s, n_ex)]
    else:
        if n_ex > 0:
            return exsecs[_rng.below(s, n_ex)]
        if n_avail > 0:
            return avail[_rng.below(s, n_avail)]
    return -1


@njit(cache=True, nogil=True)
def _couple(m, f, ptype, infected, source, inf_tick, condom, p_transmit, tick, s):
    """Returns (protected, infected_id, source_id); ids are -1 without transmission."""
    u = _rng.threshold_draw(s)
    if condom >= u:
        return True, -1, -1
    if infected[m] == infected[f]:
        return False, -1, -1
    if infected[m]:
        src, dst = m, f
    else:
        src, dst = f, m
    if _rng.uniform(s) < p_transmit:
        infected[dst] = True
        source[dst] = ptype[src] + 1
        inf_tick[dst] = tick
        return False, dst, src
    return False, -1, -1


@njit(cache=True, nogil=True)
def _count(ptype, infected, source, out):
    for i in range(out.shape[0]):
        out[i] = 0
    for i in range(ptype.shape[0]):
        t = ptype[i]
        if t == _EXSECONDARY:
            out[3] += 1
        if not infected[i]:
            continue
        out[5] += 1
        if t == _FSW:
            out[0] += 1
            if source[i] == _PRIMARY + 1:
                out[6] += 1
        elif t == _PRIMARY:
            out[1] += 1
            if source[i] == _SECONDARY + 1:
                out[7] += 1
                out[8] += 1
            elif source[i] == _EXSECONDARY + 1:
                out[7] += 1
                out[9] += 1
        elif t == _SECONDARY:
            out[2] += 1
        else:
            out[4] += 1


@njit(cache=True, nogil=True)
def _advance(ptype, infected, partner, source, inf_tick, primaries, fsws, exsecs,
             load, commitment, condom, fsw_pref, p_transmit, cpm, cap,
             start_tick, n_ticks, s, record, events, counters):
    n_fsw = fsws.shape[0]
    avail = np.empty(n_fsw, np.int64)
    n_ev = 0
    for k in range(n_ticks):
        tick = start_tick + k + 1
        for i in range(n_fsw):
            avail[i] = fsws[i]
            load[fsws[i]] = 0
        n_avail = n_fsw
        for pid in primaries:
            for _ in range(cpm):
                f = _select(pid, partner, avail, n_avail, exsecs, commitment, fsw_pref, s)
                if f < 0:
                    continue
                prot, dst, src = _couple(pid, f, ptype, infected, source, inf_tick,
                                         condom, p_transmit, tick, s)
                if record:
                    events[n_ev, 0] = tick
                    events[n_ev, 1] = pid
                    events[n_ev, 2] = f
                    events[n_ev, 3] = 1 if prot else 0
                    events[n_ev, 4] = dst
                    events[n_ev, 5] = src
                n_ev += 1
                if ptype[f] == _FSW:
                    load[f] += 1
                    if load[f] >= cap:
                        j = np.searchsorted(avail[:n_avail], f)
                        for q in range(j, n_avail - 1):
                            avail[q] = avail[q + 1]
                        n_avail -= 1
        _count(ptype, infected, source, counters[k])
    return n_ev


def _run_arrays(a: _Arrays, cfg: SimConfig, stream: _rng.Stream, start_tick: int,
                n_ticks: int, record: bool):
    cap_events = len(a.primaries) * cfg.couplings_per_month * n_ticks if record else 0
    events = np.empty((cap_events, 6), np.int64)
    counters = np.empty((n_ticks, _N_COUNTERS), np.int64)
    n_ev = _advance(
        a.ptype, a.infected, a.partner, a.source, a.inf_tick,
        a.primaries, a.fsws, a.exsecs, a.load,
        cfg.commitment, cfg.condom_usage, float(cfg.fsw_preference),
        float(cfg.transmission_probability), cfg.couplings_per_month,
        cfg.avg_client_month, start_tick, n_ticks, stream.state, record,
        events, counters,
    )
    return events[:n_ev], counters


def _events_from_array(rows: np.ndarray) -> list[CouplingEvent]:
    out = []
    for tick, m, f, prot, dst, src in rows.tolist():
        out.append(CouplingEvent(tick, m, f, bool(prot), (dst, src) if dst >= 0 else None))
    return out


def _snapshots_from_array(counters: np.ndarray, start_tick: int) -> list[CounterSnapshot]:
    return [CounterSnapshot(start_tick + k + 1, *row)
            for k, row in enumerate(counters.tolist())]


# --- single-step operations ---------------------------------------------------


def select_coupling_target(
    primary: Person,
    world: WorldState,
    cfg: SimConfig,
    stream: _rng.Stream,
    fsw_load: Optional[Mapping[int, int]] = None,
) -> Optional[PersonId]:
    """Pick the female a Primary couples with this attempt, or None.

    None means either a committed draw by a Primary without a partner or that
    both defection pools are empty.

    ``fsw_load`` maps FSW id to couplings already accepted this tick.
    """
    if primary.ptype != PersonType.PRIMARY:
        raise PreconditionError(f"person {primary.id} is {primary.ptype.name}, not PRIMARY")
    a = _to_arrays(world)
    fsw_load = fsw_load or {}
    avail = np.array([f for f in a.fsws if fsw_load.get(int(f), 0) < cfg.avg_client_month],
                     dtype=np.int64)
    target = _select(primary.id, a.partner, avail, len(avail), a.exsecs,
                     cfg.commitment, float(cfg.fsw_preference), stream.state)
    return None if target < 0 else PersonId(int(target))


def apply_condom_usage(
    male: Person,
    female: Person,
    world: WorldState,
    cfg: SimConfig,
    stream: _rng.Stream,
    tick: int,
) -> tuple[CouplingEvent, WorldState]:
    """Run one coupling act; returns the event and the world after it."""
    if male.ptype != PersonType.PRIMARY:
        raise PreconditionError(f"male participant {male.id} is not a PRIMARY")
    if female.gender != GENDER_OF[PersonType.FSW]:
        raise PreconditionError(f"female participant {female.id} is not female")
    a = _to_arrays(world)
    prot, dst, src = _couple(male.id, female.id, a.ptype, a.infected, a.source,
                             a.inf_tick, cfg.condom_usage,
                             float(cfg.transmission_probability), tick, stream.state)
    event = CouplingEvent(tick, male.id, female.id, bool(prot),
                          (int(dst), int(src)) if dst >= 0 else None)
    return event, _from_arrays(a, world, world.tick)


def step(world: WorldState, cfg: SimConfig, stream: _rng.Stream
         ) -> tuple[WorldState, list[CouplingEvent]]:
    """Advance one month. Events carry the month number they happen in (tick + 1)."""
    if world.tick >= cfg.ticks:
        raise PreconditionError(f"world is at tick {world.tick}; run length is {cfg.ticks}")
    a = _to_arrays(world)
    rows, _ = _run_arrays(a, cfg, stream, world.tick, 1, record=True)
    return _from_arrays(a, world, world.tick + 1), _events_from_array(rows)


# --- whole runs ---------------------------------------------------------------


def initial_world(cfg: SimConfig) -> tuple[WorldState, _rng.Stream]:
    """Setup plus partnering, from a stream seeded by ``cfg.seed`` alone."""
    problems = validate_config(cfg)
    if problems:
        raise ConfigError(problems)
    stream = _rng.Stream(cfg.seed)
    world = setup_initial_population(cfg, stream)
    return make_partners(world, cfg, stream), stream


def run(cfg: SimConfig) -> Trace:
    world, stream = initial_world(cfg)
    a = _to_arrays(world)
    rows, counters = _run_arrays(a, cfg, stream, 0, cfg.ticks, record=True)
    return Trace(
        config=cfg,
        seed=cfg.seed,
        events=_events_from_array(rows),
        snapshots=_snapshots_from_array(counters, 0),
        final_state=_from_arrays(a, world, cfg.ticks),
    )


def final_snapshot(cfg: SimConfig) -> CounterSnapshot:
    """Final-tick counters of ``run(cfg)`` without materialising the event list."""
    world, stream = initial_world(cfg)
    if cfg.ticks == 0:
        return compute_counters(world)
    a = _to_arrays(world)
    _, counters = _run_arrays(a, cfg, stream, 0, cfg.ticks, record=False)
    return CounterSnapshot(cfg.ticks, *counters[-1].tolist())


def counter_history(cfg: SimConfig) -> list[CounterSnapshot]:
    """Per-tick counters of ``run(cfg)`` without materialising the event list."""
    world, stream = initial_world(cfg)
    a = _to_arrays(world)
    _, counters = _run_arrays(a, cfg, stream, 0, cfg.ticks, record=False)
    return _snapshots_from_array(counters, 0)
