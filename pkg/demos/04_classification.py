# %% [markdown]
# Classifying limit theories and looking at samples
#
# The classifier only reads the system.  The sample-level tests are separate:
# a singleton-cell system gives indiscernible classes in every sample, while
# the random graph does not.

# %%
from asym.classify import check_class_indiscernibility, classify_theory, find_indiscernible_complement
from asym.extension import back_and_forth
from asym.fixtures import example66_system, rg_system, strongly_minimal_system, uniform_system
from asym.generators import sample_kn

for name, ds in [("random graph", rg_system()), ("three singleton classes", uniform_system(3, 1, 1)),
                 ("one infinite class", strongly_minimal_system(1)), ("with base, two diagrams", uniform_system(2, 1, 2))]:
    print(f"{name:26s}", classify_theory(ds).to_json())

# %%
ds = strongly_minimal_system(2)
S, ca = sample_kn(ds, 10, seed=5)
print(check_class_indiscernibility(S, ca), find_indiscernible_complement(S, 3))
S, ca = sample_kn(rg_system(), 10, seed=5)
print(check_class_indiscernibility(S, ca), find_indiscernible_complement(S, 2))

# %%
# two independent samples look alike on small sets
ds = example66_system()
A, ca = sample_kn(ds, 128, seed=1)
B, cb = sample_kn(ds, 128, seed=2)
print(back_and_forth(A, ca, B, cb, ds, 6, seed=0).to_json())
