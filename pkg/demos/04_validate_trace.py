"""Replaying a trace through the model's rule checks, and catching a forgery."""

# %%
import dataclasses

from hivabm import validate_trace
from hivabm.domain import SimConfig
from hivabm.engine import run

cfg = SimConfig(
    max_primary=12, max_secondary=10, max_fsw=4, max_infected_fsw=1,
    max_exsecondary=3, tobecoupled=8, commitment=40, condom_usage=20,
    couplings_per_month=2, avg_client_month=5, ticks=12, seed=3,
)
trace = run(cfg)
print(validate_trace(trace).to_text())

# %%
# Erase one recorded transmission. The person stays uninfected in the replay,
# so later infections attributed to them and the final counters stop adding up.
idx = next(i for i, e in enumerate(trace.events) if e.transmission is not None)
events = list(trace.events)
events[idx] = dataclasses.replace(events[idx], transmission=None)
forged = dataclasses.replace(trace, events=events)
print(validate_trace(forged).to_text())
