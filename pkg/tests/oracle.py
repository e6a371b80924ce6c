"""Brute-force re-enumeration of runs whose every branch is forced.

Forced means commitment and condom usage at 0 or 100, FSW preference and
transmission probability at 0 or 1, and every defection pool offering at most
one candidate when it is drawn from. The only inputs taken from the engine are
the two choices that never affect the forced event sequence's shape: which
Primary is paired with which Secondary and which FSWs are seeded.
"""


class NotForced(Exception):
    pass


FSW, PRIMARY, SECONDARY, EXSECONDARY = "fsw", "primary", "secondary", "exsecondary"
SOURCE = {FSW: 1, PRIMARY: 2, SECONDARY: 3, EXSECONDARY: 4}


def layout(cfg):
    kinds = ([FSW] * cfg.max_fsw + [PRIMARY] * cfg.max_primary
             + [SECONDARY] * cfg.max_secondary + [EXSECONDARY] * cfg.max_exsecondary)
    return dict(enumerate(kinds))


def enumerate_forced(cfg, partner_of, seeded):
    """Return (events, infections) for a forced instance.

    events: list of (tick, male, female, protected, (infected, source) | None)
    infections: {person: (source_code, tick)}; seeded FSWs get (0, 0)
    """
    if cfg.commitment not in (0, 100) or cfg.condom_usage not in (0, 100):
        raise NotForced("commitment/condom not at 0 or 100")
    if cfg.fsw_preference not in (0.0, 1.0) or cfg.transmission_probability not in (0.0, 1.0):
        raise NotForced("fractions not at 0 or 1")
    kind = layout(cfg)
    fsws = [i for i, k in kind.items() if k == FSW]
    prims = [i for i, k in kind.items() if k == PRIMARY]
    exsecs = [i for i, k in kind.items() if k == EXSECONDARY]
    infections = {f: (0, 0) for f in seeded}
    events = []
    for tick in range(1, cfg.ticks + 1):
        load = {f: 0 for f in fsws}
        for m in prims:
            for _ in range(cfg.couplings_per_month):
                mate = partner_of.get(m)
                if cfg.commitment == 100:
                    if mate is None:
                        continue
                    f = mate
                else:
                    open_fsws = [x for x in fsws if load[x] < cfg.avg_client_month]
                    pools = [open_fsws, exsecs] if cfg.fsw_preference == 1.0 else [exsecs, open_fsws]
                    pool = next((p for p in pools if p), None)
                    if pool is None:
                        continue
                    if len(pool) != 1:
                        raise NotForced(f"tick {tick}: {len(pool)} candidates for {m}")
                    f = pool[0]
                protected = cfg.condom_usage == 100
                tx = None
                if not protected and (m in infections) != (f in infections) \
                        and cfg.transmission_probability == 1.0:
                    src, dst = (m, f) if m in infections else (f, m)
                    infections[dst] = (SOURCE[kind[src]], tick)
                    tx = (dst, src)
                events.append((tick, m, f, protected, tx))
                if kind[f] == FSW:
                    load[f] += 1
    return events, infections


def engine_view(trace):
    events = [(e.tick, e.male, e.female, e.protected_act, e.transmission) for e in trace.events]
    infections = {p.id: (int(p.provenance.source), p.provenance.tick)
                  for p in trace.final_state.persons if p.infected}
    return events, infections


def engine_choices(cfg):
    """Pairing and seeding as drawn by the engine for this config."""
    from hivabm.engine import initial_world

    world, _ = initial_world(cfg)
    partner_of = {}
    for p, s in world.partnerships:
        partner_of[p] = s
        partner_of[s] = p
    seeded = [p.id for p in world.persons if p.infected]
    return partner_of, seeded


def _cfg(**kw):
    from hivabm.domain import SimConfig

    base = dict(max_fsw=1, max_infected_fsw=1, max_primary=2, max_secondary=2,
                max_exsecondary=0, tobecoupled=2, commitment=0, condom_usage=0,
                couplings_per_month=1, avg_client_month=2, ticks=1, seed=11,
                fsw_preference=1.0, transmission_probability=1.0)
    base.update(kw)
    return SimConfig(**base)


# at most 6 persons and 2 ticks each
FORCED_INSTANCES = {
    "both_clients_infected_by_one_fsw": _cfg(),
    "full_commitment_keeps_to_partner": _cfg(commitment=100, ticks=2),
    "capacity_fallback_back_infects": _cfg(max_secondary=1, max_exsecondary=1, tobecoupled=0,
                                           avg_client_month=1, couplings_per_month=2, ticks=2),
    "full_condom_use_protects": _cfg(condom_usage=100, ticks=2),
    "exsecondary_preference_avoids_fsw": _cfg(max_primary=1, max_secondary=1, max_exsecondary=1,
                                              tobecoupled=0, avg_client_month=1,
                                              couplings_per_month=2, ticks=2,
                                              fsw_preference=0.0),
    "exhausted_pools_give_no_target": _cfg(max_secondary=1, tobecoupled=0, avg_client_month=1,
                                           ticks=2),
    "zero_transmission_probability": _cfg(transmission_probability=0.0, ticks=2),
    "no_commitment_skips_partner": _cfg(max_primary=1, max_secondary=1, tobecoupled=1, ticks=2),
    "full_commitment_unpartnered_abstains": _cfg(commitment=100, max_primary=2, max_secondary=1,
                                                 tobecoupled=1, ticks=2),
}
