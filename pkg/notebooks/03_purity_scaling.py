"""
How fast does purity decay?
===========================

The microscopic model loses purity as t^2, a constant-rate dephasing model
as t, and a dephasing rate that grows linearly in time restores the t^2
law.  The ``compare`` scenario of the command line tool checks the same
claims and writes log-log plots; here the fits are done directly.
"""

# %%
import numpy as np

from lindgap import (
    dephasing_closed_form,
    dephasing_time_dependent,
    env_moments,
    fit_power_law,
    purity,
    random_micro_model,
    reduced_state,
)

model = random_micro_model(5, omega=1.0, seed=3)
m = env_moments(model)
sigma2 = 0.5 * (m.sigmaA2 + m.sigmaB2)
lam, lam_tilde = np.sqrt(sigma2), 0.5 * sigma2

t = np.geomspace(1e-5, 1e-4, 25) / max(1.0, np.sqrt(sigma2))
curves = {
    "microscopic": [1 - purity(reduced_state(model, s)) for s in t],
    "constant rate": [1 - purity(dephasing_closed_form(1.0, lam, s)) for s in t],
    "linear rate": [1 - purity(dephasing_time_dependent(1.0, lam_tilde, s)) for s in t],
}
for name, y in curves.items():
    fit = fit_power_law(t, y)
    print(f"{name:14s} 1 - P ~ {fit.prefactor:.4g} t^{fit.exponent:.3f}")
