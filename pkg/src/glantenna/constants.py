"""Physical constants used across the toolkit (SI, CODATA 2018 via scipy)."""

from scipy import constants as _const

C0 = _const.c                    # speed of light in vacuum, m/s
EPS0 = _const.epsilon_0          # vacuum permittivity, F/m
MU0 = _const.mu_0                # vacuum permeability, H/m
ETA0 = (MU0 / EPS0) ** 0.5       # free-space wave impedance, ohm
Q_E = _const.e                   # elementary charge, C
K_B = _const.k                   # Boltzmann constant, J/K
HBAR = _const.hbar               # reduced Planck constant, J s

# Bulk conductivities above this are treated as perfect electric conductor.
PEC_SIGMA_THRESHOLD = 1.0e8      # S/m
