"""Teleportation of multi-qubit atomic states through cavity-induced Faraday rotation."""
from .cavity import CavityParams, GateMode, faraday_gate, faraday_phases, reflect_coupled, reflect_empty
from .hilbert import PauliString, PureState
from .resources import LossModel, expected_time, monte_carlo, success_probability
from .tables import builtin_table, verify_tables
from .teleport import InputState, Outcome, derive_correction, expand_joint_state, make_channel, run_protocol

__version__ = "0.1.0"
