from .builders import DrivePair, build_drive, build_dual, build_heff, effective_generator
from .corner_modes import (
    NoCornerPresent,
    ResonantEta,
    commutator_residual,
    corner_operators,
    dual_corner_operators,
    lambda_x,
    lambda_xx,
    psi_first_order,
    resonance_factor,
)
from .duality import dualize, dualize_operator

__all__ = [
    "DrivePair",
    "NoCornerPresent",
    "ResonantEta",
    "build_drive",
    "build_dual",
    "build_heff",
    "commutator_residual",
    "corner_operators",
    "dual_corner_operators",
    "dualize",
    "dualize_operator",
    "effective_generator",
    "lambda_x",
    "lambda_xx",
    "psi_first_order",
    "resonance_factor",
]
