"""Agent and configuration types for the four-population HIV model.

Population sub-groups:
  FSW          high-risk female sex workers; the only agents seeded infected
  PRIMARY      male clients of FSWs; the only male type and the bridge population
  SECONDARY    females socially committed to exactly one Primary
  EXSECONDARY  females with no committed partner, reachable by defecting Primaries

Types are fixed at setup. Infection is absorbing.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from enum import IntEnum
from typing import NewType, Optional

PersonId = NewType("PersonId", int)

UINT64_MAX = 2**64 - 1


class PersonType(IntEnum):
    FSW = 0
    PRIMARY = 1
    SECONDARY = 2
    EXSECONDARY = 3


class PersonState(IntEnum):
    UNINFECTED = 0
    INFECTED = 1


class Gender(IntEnum):
    MALE = 0
    FEMALE = 1


class Source(IntEnum):
    """Where an infection came from. SEEDED marks the initial FSW infections."""

    SEEDED = 0
    FROM_FSW = 1
    FROM_PRIMARY = 2
    FROM_SECONDARY = 3
    FROM_EXSECONDARY = 4

    @classmethod
    def from_type(cls, ptype: PersonType) -> "Source":
        return cls(int(ptype) + 1)


# the gender each sub-population is pinned to
GENDER_OF = {
    PersonType.FSW: Gender.FEMALE,
    PersonType.PRIMARY: Gender.MALE,
    PersonType.SECONDARY: Gender.FEMALE,
    PersonType.EXSECONDARY: Gender.FEMALE,
}


class Percent(int):
    """Integer percentage on the closed scale [0, 100].

    Zero is admitted: the 0% settings are used by both experiments.
    """

    def __new__(cls, value):
        if isinstance(value, bool) or int(value) != value:
            raise ValueError(f"percent must be an integer, got {value!r}")
        value = int(value)
        if not 0 <= value <= 100:
            raise ValueError(f"percent must lie in [0, 100], got {value}")
        return super().__new__(cls, value)


@dataclass(frozen=True)
class InfectionProvenance:
    source: Source
    tick: int

    def __post_init__(self):
        if self.source == Source.SEEDED and self.tick != 0:
            raise ValueError("seeded infections carry tick 0")
        if self.source != Source.SEEDED and self.tick < 1:
            raise ValueError("acquired infections carry tick >= 1")


SEEDED = InfectionProvenance(Source.SEEDED, 0)


def person_problems(
    ptype, gender, state, partner, provenance, partner_type=None
) -> list[str]:
    """List every way the field combination breaks a sub-population rule.

    ``partner_type`` is only checked when the caller can resolve it.
    """
    problems = []
    if gender != GENDER_OF[ptype]:
        problems.append(f"{ptype.name} must be {GENDER_OF[ptype].name}")
    if ptype in (PersonType.FSW, PersonType.EXSECONDARY) and partner is not None:
        problems.append(f"{ptype.name} must have no committed partner")
    if partner_type is not None:
        expected = {PersonType.PRIMARY: PersonType.SECONDARY,
                    PersonType.SECONDARY: PersonType.PRIMARY}.get(ptype)
        if expected is not None and partner_type != expected:
            problems.append(f"{ptype.name} partner must be {expected.name}")
    if (state == PersonState.INFECTED) != (provenance is not None):
        problems.append("infected state and provenance must agree")
    if (
        provenance is not None
        and provenance.source == Source.SEEDED
        and ptype != PersonType.FSW
    ):
        problems.append("only FSWs may be seeded infected")
    return problems


@dataclass(frozen=True)
class Person:
    id: PersonId
    ptype: PersonType
    gender: Gender
    state: PersonState = PersonState.UNINFECTED
    partner: Optional[PersonId] = None
    provenance: Optional[InfectionProvenance] = None

    def __post_init__(self):
        if self.id < 0:
            raise ValueError(f"person id must be non-negative, got {self.id}")
        problems = person_problems(
            self.ptype, self.gender, self.state, self.partner, self.provenance
        )
        if problems:
            raise ValueError(f"person {self.id}: " + "; ".join(problems))

    @property
    def infected(self) -> bool:
        return self.state == PersonState.INFECTED

    @classmethod
    def unchecked(cls, **fields) -> "Person":
        """Build a Person without validation. Used to fabricate broken states."""
        obj = object.__new__(cls)
        defaults = {"state": PersonState.UNINFECTED, "partner": None, "provenance": None}
        for f in dataclasses.fields(cls):
            object.__setattr__(obj, f.name, fields.get(f.name, defaults.get(f.name)))
        return obj


@dataclass(frozen=True)
class SimConfig:
    max_primary: int
    max_secondary: int
    max_fsw: int
    max_infected_fsw: int
    max_exsecondary: int
    tobecoupled: int
    commitment: int
    condom_usage: int
    couplings_per_month: int
    avg_client_month: int
    ticks: int
    seed: int
    fsw_preference: float = 0.5
    transmission_probability: float = 1.0

    def replace(self, **changes) -> "SimConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


CONFIG_FIELDS = tuple(f.name for f in dataclasses.fields(SimConfig))
OPTIONAL_CONFIG_DEFAULTS = {"fsw_preference": 0.5, "transmission_probability": 1.0}


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _is_real(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def validate_config(cfg: SimConfig) -> list[str]:
    """Return one message per broken configuration constraint.

    Every message starts with the offending field name.
    """
    out = []
    positive = ("max_primary", "max_secondary", "max_fsw",
                "couplings_per_month", "avg_client_month")
    non_negative = ("max_infected_fsw", "max_exsecondary", "tobecoupled", "ticks")
    for name in positive + non_negative:
        v = getattr(cfg, name)
        if not _is_int(v):
            out.append(f"{name}: must be an integer, got {v!r}")
        elif name in positive and v <= 0:
            out.append(f"{name}: must be positive, got {v}")
        elif v < 0:
            out.append(f"{name}: must be non-negative, got {v}")
    for name in ("commitment", "condom_usage"):
        v = getattr(cfg, name)
        if not _is_int(v) or not 0 <= v <= 100:
            out.append(f"{name}: must be an integer percent in [0, 100], got {v!r}")
    for name in ("fsw_preference", "transmission_probability"):
        v = getattr(cfg, name)
        if not _is_real(v) or not 0.0 <= v <= 1.0:
            out.append(f"{name}: must be a fraction in [0, 1], got {v!r}")
    if not _is_int(cfg.seed) or not 0 <= cfg.seed <= UINT64_MAX:
        out.append(f"seed: must be an unsigned 64-bit integer, got {cfg.seed!r}")
    if out:
        # cross-field checks assume well-typed fields
        return out
    if cfg.max_infected_fsw > cfg.max_fsw:
        out.append(
            f"max_infected_fsw: {cfg.max_infected_fsw} exceeds max_fsw {cfg.max_fsw}"
        )
    bound = min(cfg.max_primary, cfg.max_secondary)
    if cfg.tobecoupled > bound:
        out.append(
            f"tobecoupled: {cfg.tobecoupled} exceeds min(max_primary, max_secondary) = {bound}"
        )
    return out


class ConfigError(ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("invalid configuration: " + "; ".join(self.violations))
