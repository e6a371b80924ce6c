"""Condom usage against FSW infections, commitment held at 50%."""

# %%
from hivabm import SimConfig
from hivabm.experiments import sweep

base = SimConfig(
    max_primary=500, max_secondary=500, max_fsw=100, max_infected_fsw=5,
    max_exsecondary=100, tobecoupled=400, commitment=50, condom_usage=50,
    couplings_per_month=2, avg_client_month=10, ticks=120, seed=0,
)

# %%
# Transmission is certain for an unprotected discordant act by default, so
# anything short of full protection saturates the population over ten years.
# A per-act probability shows the gradient more clearly.
for prob in (1.0, 0.01):
    result = sweep(base.replace(transmission_probability=prob), "condom_usage",
                   [0, 20, 40, 60, 80, 100], n=10, base_seed=0)
    means = ", ".join(f"{m:.1f}" for m in result.means("infected_fsws"))
    print(f"p={prob}: mean infected FSWs by condom usage 0..100: {means}")
