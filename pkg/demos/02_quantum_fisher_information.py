"""
Quantum Fisher information of both families: the numerical spectral
route, the SLD route and the closed forms, then the bound on the
negativity after changing parameters to (p, negativity).
"""
import numpy as np

from optent import estimation
from optent.models import ModelPoint

for kind in ("decoherence", "werner"):
    fam = estimation.model_family(kind)
    pt = ModelPoint(0.5, 0.5)
    print(f"-- {kind} at (p, q) = (0.5, 0.5) --")
    print("spectral   ", np.round(estimation.qfi(fam, [pt.p, pt.q]).entries, 6).tolist())
    print("SLD        ", np.round(estimation.qfi_from_sld(fam, [pt.p, pt.q]).entries, 6).tolist())
    print("closed form", np.round(estimation.qfi_closed_form(kind, pt).entries, 6).tolist())

# the inverse QFI in (p, eps) has 1 - eps^2 in the eps-eps slot
for eps in (0.3, 0.6, 0.9):
    h = estimation.qfi_p_epsilon("decoherence", 0.95, eps)
    inv = np.linalg.inv(h.entries)
    print(f"eps={eps}: [H^-1]_eps,eps = {inv[1, 1]:.6f}   1 - eps^2 = {1 - eps ** 2:.6f}")

# a single measurement reaches it: polarizers at 45 degrees
print("single-window bound at eps=0.972, K=5000:", estimation.epsilon_variance_bound(0.972, 5000))
