"""Executable state and transition predicates, plus a replaying trace validator.

Every predicate is tagged with the schema it belongs to:

  Fsw, Primary, Secondary, ExSecondary   per-person type/gender/partner rules
  Partners                               pairing typing, disjointness, reciprocity, bounds
  Link                                   who a Primary may couple with; FSW capacity
  SetupInitialPopulation                 population counts and seeding
  MakePartners                           exact number of pairs formed
  Coupling                               commitment rule at its forced settings
  ApplyCondomUsage                       protection and transmission rule, frame condition

The checker is independent of the engine's internals: it only reads worlds and
events, so it can validate traces produced elsewhere.
"""

from __future__ import annotations

import json
from collections import Counter, defaultdict
from dataclasses import asdict, dataclass, field
from typing import Optional, Union

from . import rng as _rng
from .domain import (
    GENDER_OF,
    ConfigError,
    InfectionProvenance,
    Person,
    PersonState,
    PersonType,
    SimConfig,
    Source,
    person_problems,
    validate_config,
)
from .engine import CouplingEvent, Trace, WorldState, make_partners, setup_initial_population
from .metrics import compute_counters

SCHEMAS = frozenset({
    "Fsw", "Primary", "Secondary", "ExSecondary", "Partners", "Link",
    "SetupInitialPopulation", "MakePartners", "Coupling", "ApplyCondomUsage",
})

_TYPE_SCHEMA = {
    PersonType.FSW: "Fsw",
    PersonType.PRIMARY: "Primary",
    PersonType.SECONDARY: "Secondary",
    PersonType.EXSECONDARY: "ExSecondary",
}

Subject = Union[int, tuple, str]


@dataclass(frozen=True)
class Violation:
    schema_name: str
    subject: Subject
    description: str
    tick: int

    def __post_init__(self):
        if self.schema_name not in SCHEMAS:
            raise ValueError(f"unknown schema {self.schema_name!r}")


# --- state predicates ---------------------------------------------------------


def check_state(world: WorldState, cfg: SimConfig, stage: str = "partnered") -> list[Violation]:
    """All schema breaches in ``world``.

    ``stage`` is "setup" for the world between population setup and partnering
    (no pairs yet); anything else expects the partnering to have happened.
    """
    out = []
    tick = world.tick
    persons = world.persons
    n = len(persons)

    def v(schema, subject, text):
        out.append(Violation(schema, subject, text, tick))

    for i, p in enumerate(persons):
        if p.id != i:
            v("SetupInitialPopulation", i, f"slot {i} holds person id {p.id}")
            continue
        schema = _TYPE_SCHEMA[p.ptype]
        partner_type = None
        if p.partner is not None:
            if 0 <= p.partner < n:
                partner_type = persons[p.partner].ptype
            else:
                v(schema, p.id, f"partner {p.partner} does not exist")
        for problem in person_problems(p.ptype, p.gender, p.state, p.partner,
                                       p.provenance, partner_type):
            v(schema, p.id, problem)
        if p.provenance is not None and p.provenance.tick > tick:
            v(schema, p.id, f"infected at tick {p.provenance.tick}, after current tick {tick}")

    # Partners: typing, disjointness, reciprocity, bounds
    used = Counter()
    for pair in sorted(world.partnerships):
        x, y = pair
        if not (0 <= x < n and 0 <= y < n):
            v("Partners", pair, "pair references a missing person")
            continue
        if persons[x].ptype != PersonType.PRIMARY or persons[y].ptype != PersonType.SECONDARY:
            v("Partners", pair, "pair must join a PRIMARY to a SECONDARY")
        used[x] += 1
        used[y] += 1
        if persons[x].partner != y or persons[y].partner != x:
            v("Partners", pair, "partner fields are not reciprocal with the pair")
    for pid, k in sorted(used.items()):
        if k > 1:
            v("Partners", pid, f"person appears in {k} partnerships")
    paired = {pid for pair in world.partnerships for pid in pair}
    for p in persons:
        if p.partner is not None and p.id not in paired:
            v("Partners", p.id, "partner field set without a recorded partnership")
    bound = min(cfg.tobecoupled, cfg.max_primary, cfg.max_secondary)
    if len(world.partnerships) > bound:
        v("Partners", "world", f"{len(world.partnerships)} partnerships exceed bound {bound}")

    if stage == "setup":
        if world.partnerships:
            v("MakePartners", "world", "partnerships exist before partnering")
    elif len(world.partnerships) != bound:
        v("MakePartners", "world",
          f"expected exactly {bound} partnerships, found {len(world.partnerships)}")

    counts = Counter(p.ptype for p in persons)
    expected = {
        PersonType.FSW: cfg.max_fsw,
        PersonType.PRIMARY: cfg.max_primary,
        PersonType.SECONDARY: cfg.max_secondary,
        PersonType.EXSECONDARY: cfg.max_exsecondary,
    }
    for ptype, want in expected.items():
        if counts[ptype] != want:
            v("SetupInitialPopulation", "world",
              f"{counts[ptype]} {ptype.name} agents, configured {want}")
    seeded = sum(1 for p in persons
                 if p.provenance is not None and p.provenance.source == Source.SEEDED)
    if seeded != cfg.max_infected_fsw:
        v("SetupInitialPopulation", "world",
          f"{seeded} seeded infections, configured {cfg.max_infected_fsw}")
    if tick == 0:
        for p in persons:
            if p.infected and p.provenance is not None and p.provenance.source != Source.SEEDED:
                v("SetupInitialPopulation", p.id, "acquired infection at tick 0")
    return out


# --- transition predicates ----------------------------------------------------


def _couple_checks(pre_m: Person, pre_f: Person, post_m: Person, post_f: Person,
                   event: CouplingEvent, cfg: SimConfig) -> list[Violation]:
    out = []
    tick = event.tick
    pair = (event.male, event.female)

    def v(schema, text, subject=pair):
        out.append(Violation(schema, subject, text, tick))

    if pre_m.ptype != PersonType.PRIMARY:
        v("Coupling", f"male participant is {pre_m.ptype.name}, not PRIMARY")
        return out
    if pre_f.gender != GENDER_OF[PersonType.FSW]:
        v("Link", "female participant is not female")
    is_partner = pre_m.partner is not None and pre_m.partner == pre_f.id
    if pre_f.ptype == PersonType.PRIMARY or (
        pre_f.ptype == PersonType.SECONDARY and not is_partner
    ):
        v("Link", f"PRIMARY may not couple with a non-partner {pre_f.ptype.name}")
    if is_partner and cfg.commitment == 0:
        v("Coupling", "coupled with the committed partner at 0% commitment")
    if not is_partner and cfg.commitment == 100:
        v("Coupling", "casual coupling at 100% commitment")

    if event.protected_act and cfg.condom_usage == 0:
        v("ApplyCondomUsage", "protected act at 0% condom usage")
    if not event.protected_act and cfg.condom_usage == 100:
        v("ApplyCondomUsage", "unprotected act at 100% condom usage")

    discordant = pre_m.infected != pre_f.infected
    if event.transmission is not None:
        dst, src = event.transmission
        if event.protected_act:
            v("ApplyCondomUsage", "transmission during a protected act")
        if {dst, src} != {event.male, event.female}:
            v("ApplyCondomUsage", f"transmission {dst}<-{src} is not between the couple")
        else:
            pre_dst, pre_src = (pre_m, pre_f) if dst == event.male else (pre_f, pre_m)
            post_dst = post_m if dst == event.male else post_f
            if not pre_src.infected:
                v("ApplyCondomUsage", f"source {src} was not infected", src)
            if pre_dst.infected:
                v("ApplyCondomUsage", f"target {dst} was already infected", dst)
            want = InfectionProvenance(Source.from_type(pre_src.ptype), tick)
            if not post_dst.infected or post_dst.provenance != want:
                v("ApplyCondomUsage", f"target {dst} lacks provenance {want}", dst)
        if cfg.transmission_probability == 0.0:
            v("ApplyCondomUsage", "transmission at zero transmission probability")
    elif not event.protected_act and discordant and cfg.transmission_probability == 1.0:
        v("ApplyCondomUsage", "unprotected discordant act did not transmit")

    touched = {event.transmission[0]} if event.transmission is not None else set()
    for pre, post in ((pre_m, post_m), (pre_f, post_f)):
        if pre.id in touched:
            continue
        if post != pre:
            v("ApplyCondomUsage", f"participant {pre.id} changed without a transmission", pre.id)
    return out


def check_event(pre_world: WorldState, event: CouplingEvent, post_world: WorldState,
                cfg: SimConfig) -> list[Violation]:
    """Breaches of the coupling and condom rules by one event, including the
    frame condition that nobody outside the couple changes."""
    out = []
    n = len(pre_world.persons)
    if not (0 <= event.male < n and 0 <= event.female < n):
        return [Violation("Coupling", (event.male, event.female),
                          "event references a missing person", event.tick)]
    if event.tick != pre_world.tick + 1:
        out.append(Violation("Coupling", (event.male, event.female),
                             f"event tick {event.tick} is not month {pre_world.tick + 1}",
                             event.tick))
    out += _couple_checks(pre_world.persons[event.male], pre_world.persons[event.female],
                          post_world.persons[event.male], post_world.persons[event.female],
                          event, cfg)
    if len(post_world.persons) != n or post_world.partnerships != pre_world.partnerships:
        out.append(Violation("ApplyCondomUsage", "world",
                             "population or partnerships changed", event.tick))
        return out
    for pre, post in zip(pre_world.persons, post_world.persons):
        if pre.id in (event.male, event.female):
            continue
        if pre != post:
            out.append(Violation("ApplyCondomUsage", pre.id,
                                 "non-participant changed state", event.tick))
    return out


# --- trace validation ---------------------------------------------------------


@dataclass
class ValidationReport:
    structural: list[str] = field(default_factory=list)
    violations: list[Violation] = field(default_factory=list)
    mismatches: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not (self.structural or self.violations or self.mismatches)

    def by_tick(self) -> dict[int, list[Violation]]:
        grouped = defaultdict(list)
        for v in self.violations:
            grouped[v.tick].append(v)
        return dict(sorted(grouped.items()))

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "structural": list(self.structural),
            "violations": {
                str(t): [
                    {"schema": v.schema_name,
                     "subject": list(v.subject) if isinstance(v.subject, tuple) else v.subject,
                     "description": v.description}
                    for v in vs
                ]
                for t, vs in self.by_tick().items()
            },
            "mismatches": list(self.mismatches),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_text(self) -> str:
        lines = [f"trace {'PASS' if self.passed else 'FAIL'}"]
        for s in self.structural:
            lines.append(f"  structural: {s}")
        for t, vs in self.by_tick().items():
            for v in vs:
                lines.append(f"  tick {t}: [{v.schema_name}] {v.subject}: {v.description}")
        for m in self.mismatches:
            lines.append(f"  mismatch: {m}")
        return "\n".join(lines)


def _structure(trace: Trace) -> list[str]:
    cfg = trace.config
    problems = [f"config: {p}" for p in validate_config(cfg)]
    if problems:
        return problems
    if trace.seed != cfg.seed:
        problems.append(f"trace seed {trace.seed} differs from config seed {cfg.seed}")
    n = cfg.max_fsw + cfg.max_primary + cfg.max_secondary + cfg.max_exsecondary
    last = 0
    for i, e in enumerate(trace.events):
        if e.tick < last:
            problems.append(f"event {i}: tick {e.tick} after tick {last}")
        if not 1 <= e.tick <= cfg.ticks:
            problems.append(f"event {i}: tick {e.tick} outside 1..{cfg.ticks}")
        if not (0 <= e.male < n and 0 <= e.female < n):
            problems.append(f"event {i}: unknown participant")
        last = max(last, e.tick)
    if trace.snapshots and len(trace.snapshots) != cfg.ticks:
        problems.append(f"{len(trace.snapshots)} snapshots for {cfg.ticks} ticks")
    return problems


def _apply(persons: list[Person], event: CouplingEvent) -> None:
    if event.transmission is None:
        return
    dst, src = event.transmission
    if {dst, src} != {event.male, event.female}:
        return
    old = persons[dst]
    if old.infected:
        return
    prov = InfectionProvenance(Source.from_type(persons[src].ptype), event.tick)
    persons[dst] = Person.unchecked(id=old.id, ptype=old.ptype, gender=old.gender,
                                    state=PersonState.INFECTED, partner=old.partner,
                                    provenance=prov)


def validate_trace(trace: Trace) -> ValidationReport:
    """Replay ``trace`` from its config and check every state and event.

    Passes when nothing is violated and the replayed end state agrees with the
    recorded one (full world when present, otherwise the final counters).
    """
    report = ValidationReport(structural=_structure(trace))
    if report.structural:
        return report
    cfg = trace.config
    try:
        stream = _rng.Stream(cfg.seed)
        world = setup_initial_population(cfg, stream)
    except ConfigError as exc:
        report.structural.append(str(exc))
        return report
    report.violations += check_state(world, cfg, stage="setup")
    world = make_partners(world, cfg, stream)
    report.violations += check_state(world, cfg)

    by_tick = defaultdict(list)
    for e in trace.events:
        by_tick[e.tick].append(e)
    persons = list(world.persons)
    for tick in range(1, cfg.ticks + 1):
        load = Counter()
        for e in by_tick.get(tick, ()):
            pre_m, pre_f = persons[e.male], persons[e.female]
            _apply(persons, e)
            report.violations += _couple_checks(pre_m, pre_f, persons[e.male],
                                                persons[e.female], e, cfg)
            if pre_f.ptype == PersonType.FSW:
                load[e.female] += 1
                if load[e.female] == cfg.avg_client_month + 1:
                    report.violations.append(Violation(
                        "Link", e.female,
                        f"FSW exceeded {cfg.avg_client_month} clients this month", tick))
        world = WorldState(tuple(persons), world.partnerships, tick)
        report.violations += check_state(world, cfg)

    if trace.final_state is not None:
        if trace.final_state != world:
            diff = sorted(p.id for p, q in zip(world.persons, trace.final_state.persons)
                          if p != q)
            report.mismatches.append(f"final state differs from replay at persons {diff}")
    if trace.final_counters is not None:
        replayed = compute_counters(world)
        if replayed != trace.final_counters:
            fields = [k for k, val in asdict(replayed).items()
                      if getattr(trace.final_counters, k) != val]
            report.mismatches.append(
                "final counters differ from replay in "
                + ", ".join(f"{k} (recorded {getattr(trace.final_counters, k)}, "
                            f"replayed {getattr(replayed, k)})" for k in fields))
    if report.mismatches:
        # one accounting mismatch per trace, however many views disagree
        report.mismatches = ["; ".join(report.mismatches)]
    return report
