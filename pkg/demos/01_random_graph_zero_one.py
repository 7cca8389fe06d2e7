# %% [markdown]
# The random graph as a one-class system
#
# One class, two diagrams inside it (edge, non-edge).  Sampling gives the
# uniform random graph, and the extension property "every pair has a common
# neighbour, a common non-neighbour, ..." becomes almost sure as n grows.

# %%
from asym.extension import check_all_tau, check_sigma_xi, estimate_almost_sure, profiles
from asym.fixtures import rg_system
from asym.generators import sample_kn
from asym.logic import parse

rg = rg_system()
print("2-profiles:", [p.key for p in profiles(rg, 2)])
print("3-profiles:", len(profiles(rg, 3)))

# %%
# one sample, checked directly
S, ca = sample_kn(rg, 48, seed=1)
sigma, xi = check_sigma_xi(S, ca, rg, 2)
taus = check_all_tau(S, ca, rg, 2)
print(sigma.verdict, xi.verdict, sum(1 for r in taus if r.verdict == "holds"), "of", len(taus), "tau hold")

# %%
# frequencies per n; the edge sentence has the closed form 1 - 2^-C(n,2)
edge = parse("exists x. exists y. (~x=y & E(x,y))", rg.vocab)
print(estimate_almost_sure(rg, edge, [2, 3, 4], trials=200, seed=7).to_csv())
print(estimate_almost_sure(rg, "ext:2", [16, 32, 64], trials=50, seed=7).to_csv())
