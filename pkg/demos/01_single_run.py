"""A single simulated decade in a desk-sized population.

Run with ``python3 demos/01_single_run.py``.
"""

# %%
# Five of the hundred FSWs start infected. Half of all coupling decisions are
# committed and half of all acts are protected.
from hivabm import SimConfig, run

cfg = SimConfig(
    max_primary=500, max_secondary=500, max_fsw=100, max_infected_fsw=5,
    max_exsecondary=100, tobecoupled=400, commitment=50, condom_usage=50,
    couplings_per_month=2, avg_client_month=10, ticks=120, seed=0,
)
trace = run(cfg)

# %%
# Every coupling is recorded, so the trace says who infected whom and when.
infections = [e for e in trace.events if e.transmission is not None]
print(f"{len(trace.events)} couplings, {len(infections)} transmissions")
for e in infections[:5]:
    print(f"  month {e.tick}: Primary {e.male} and female {e.female}, "
          f"person {e.transmission[0]} infected")

# %%
# Counters over time. Back-infected FSWs caught the virus from a client and
# were not among the seeded five.
for snap in trace.snapshots[::24] + [trace.snapshots[-1]]:
    print(f"month {snap.tick:3d}: total {snap.total_infected:4d}  "
          f"FSWs {snap.infected_fsws:3d}  Primaries {snap.infected_primaries:3d}  "
          f"Secondaries {snap.infected_secondaries:3d}  "
          f"back-infected FSWs {snap.fsw_back_infected:3d}")
