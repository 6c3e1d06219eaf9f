"""
Build the two mixed-state families, check their negativity against the
partial-transpose definition, and invert negativity back to the
population parameter q.
"""
import numpy as np

from optent import core, models
from optent.models import ModelPoint

for kind in ("decoherence", "werner"):
    print(f"-- {kind} --")
    for p, q in [(1.0, 0.5), (0.8, 0.5), (0.8, 0.2), (0.3, 0.5)]:
        pt = ModelPoint(p, q)
        rho = models.model_state(kind, pt)
        closed = models.model_negativity(kind, pt)
        direct = core.negativity(rho)
        print(f"p={p:.2f} q={q:.2f}  closed form {closed:.6f}  trace norm {direct:.6f}")

# eigen-structure of the decoherence state
spec = models.decoherence_eigensystem(ModelPoint(0.7, 0.3))
print("decoherence eigenvalues:", np.round(spec.eigenvalues, 6))

# negativity -> q on the q <= 1/2 branch
p, eps = 0.9, 0.5
q = models.epsilon_to_q("decoherence", p, eps)
print(f"decoherence p={p} eps={eps} -> q={q:.6f}; check eps={models.model_negativity('decoherence', ModelPoint(p, q)):.6f}")
