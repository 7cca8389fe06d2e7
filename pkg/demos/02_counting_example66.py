# %% [markdown]
# Exact counts for a two-class system
#
# Class 1 carries two independent symmetric relations (4 diagrams per pair),
# class 2 is marked by P and carries one (2 diagrams), nothing crosses.  The
# age is counted exactly and the share of members lying in class 1 alone
# tends to 1.

# %%
from fractions import Fraction

from asym.fixtures import example66_system
from asym.generators import count_age, ratio_table, sample_age_uniform

ds = example66_system()
for n in (2, 3, 4):
    c = count_age(ds, n)
    print(n, c.total, {k: v for k, v in c.by_class_sizes.items()})

# %%
for n, r in ratio_table(ds, 0, [2, 4, 6, 8, 10, 20]):
    bound = 1 - Fraction(1, n) * ((1 + Fraction(1, n)) ** n - 1)
    print(f"n={n:2d}  share={float(r):.6f}  lower bound={float(bound):.6f}")

# %%
# big integers are exact
print(len(str(count_age(ds, 40).total)), "digits at n=40")

# %%
S = sample_age_uniform(ds, 6, seed=3)
print(S.dumps())
