"""Admittance model of the arm: step response and unforced energy decay.

Run: python demos/admittance_response.py
"""
import numpy as np

from swabsim.dynamics import AdmittanceParams, EndEffectorState, admittance_accel, energy, integrate_step

params = AdmittanceParams()  # M = I, D = 16 I, S = 4 I
dt = 0.008

# --- constant push along x --------------------------------------------------
# With f = 0.2 N the spring settles at x = f / S = 5 cm, slowly: the damping
# is heavy, so one pole sits near -0.25 /s and sets the pace.
state = EndEffectorState()
force = np.array([0.2, 0.0, 0.0])
print("   t [s]    x [mm]   v [mm/s]")
for n in range(1, 2501):
    state = integrate_step(state, admittance_accel(state, params, force), dt)
    if n % 250 == 0:
        print(f"{n * dt:8.2f} {1000 * state.position[0]:9.3f} {1000 * state.velocity[0]:10.3f}")
print(f"steady state f/S = {1000 * force[0] / 4.0:.1f} mm")

# --- release: energy must never rise ------------------------------------------
e = [energy(state, params)]
for _ in range(1250):
    state = integrate_step(state, admittance_accel(state, params, np.zeros(3)), dt)
    e.append(energy(state, params))
e = np.array(e)
print(f"\nenergy {e[0]:.3e} J -> {e[-1]:.3e} J over 10 s, largest step {np.diff(e).max():.2e} J")
