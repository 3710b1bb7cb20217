from .compiler import (
    PERTURBATION_PARTS,
    CircuitBuilder,
    PulseConvention,
    compile_floquet_period,
    compile_perturbations,
    compile_u1,
    compile_u2,
    compile_ugs,
    echo_circuit,
)
from .models import (
    Circuit,
    CircuitError,
    CircuitParseError,
    Gate,
    GateName,
    NoiseModel,
    NonAdjacentGate,
    SeedRequired,
)
from .simulator import (
    Estimate,
    apply_gate,
    echo_series,
    simulate,
    simulate_dynamics,
    simulate_ideal,
    simulate_noisy,
)
from .text_format import from_text, to_text

__all__ = [
    "PERTURBATION_PARTS",
    "Circuit",
    "CircuitBuilder",
    "CircuitError",
    "CircuitParseError",
    "Estimate",
    "Gate",
    "GateName",
    "NoiseModel",
    "NonAdjacentGate",
    "PulseConvention",
    "SeedRequired",
    "apply_gate",
    "compile_floquet_period",
    "compile_perturbations",
    "compile_u1",
    "compile_u2",
    "compile_ugs",
    "echo_circuit",
    "echo_series",
    "from_text",
    "simulate",
    "simulate_dynamics",
    "simulate_ideal",
    "simulate_noisy",
    "to_text",
]
