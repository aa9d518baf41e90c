"""Nonlinear single-qubit dynamics: torsion flows, state discrimination gates,
dissipative attractors, one-axis twisting and pair entanglement."""

from .core import (EPS_HERM, EPS_STATE, bloch_from_density, coherent_amplitudes, density_from_bloch,
                   effective_params, make_rng, trace_distance, trace_norm)
from .dissipative import DissipativeParams, autonomous_discriminate, fixed_points, jump_table
from .manybody import DickeState, dicke_coherent, evolve_ku, spin_moments
from .sat import CnfFormula, count_assignments, parse_dimacs, solve_sat_via_qsd
from .torsion import TorsionParams, discriminate_viviani, integrate, viviani_inputs, viviani_time

__version__ = "0.1.0"
