# %% [markdown]
# Imaginaries and divisibility
#
# A definable equivalence relation can be given its own sort of class
# representatives; sentences about the original structure transfer once every
# quantifier is restricted to the home sort.  Class sizes of such a relation
# also constrain the size of the structure.

# %%
import random

from asym.arithmetic import VectorGeometry, check_divisibility, closure_audit, exchange_check
from asym.fixtures import uniform_system
from asym.generators import sample_kn
from asym.logic import evaluate, parse, random_formula, to_text
from asym.meq import expand, relativize
from asym.structures import FiniteStructure, Vocabulary

V = Vocabulary.of(("E", 2), ("P", 1))
S = FiniteStructure.from_interp(V, 5, {"E": [(0, 1), (1, 2), (3, 3)], "P": [0, 2, 4]})
X = expand(S, [("A", parse("P(x) <-> P(y)", V))])
print(X.dumps())

# %%
rng = random.Random(0)
for _ in range(5):
    f = random_formula(V, 2, rng)
    print(evaluate(S, f), evaluate(X.expansion, relativize(f)), to_text(relativize(f)))

# %%
# blocks of size 3 force the universe size to be a multiple of 3
ds = uniform_system(2, 0, 2)
S, _ = sample_kn(ds, 3, seed=4)
print(check_divisibility(S, parse("x=x", ds.vocab), parse("Q(x,y)", ds.vocab)).to_json())

# %%
g = VectorGeometry(3, 3)
for row in closure_audit(g, samples=1, seed=1):
    print(row.to_json())
print("pregeometry axioms:", bool(exchange_check(g, trials=100, seed=1)))
