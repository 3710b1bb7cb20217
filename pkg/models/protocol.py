# models/protocol.py
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Any

from utils.errors import CornerDtcError


class ModelError(CornerDtcError):
    pass


class ProtocolError(ModelError):
    pass


@dataclass(frozen=True, slots=True)
class FloquetProtocol:
    """Two-step drive: a near-pi X pulse for T/2, then stabilizers plus perturbations for T/2.

    Energies are in units where the stabilizer strength is of order one;
    ``omega`` is the angular drive frequency, T = 2 pi / omega.
    """

    j_r: float = 1.0
    j_b: float = 1.0
    epsilon: float = 0.0
    h_x: float = 0.0
    h_y: float = 0.0
    h_z: float = 0.0
    v_xx: float = 0.0
    v_zz: float = 0.0
    omega: float = 4.0
    include_corner_k1: bool = False

    def __post_init__(self) -> None:
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if f.name == "include_corner_k1":
                if not isinstance(value, bool):
                    raise ProtocolError("include_corner_k1 must be a boolean")
                continue
            if isinstance(value, bool) or not isinstance(value, int | float):
                raise ProtocolError(f"{f.name} must be a number, got {value!r}")
            if not math.isfinite(value):
                raise ProtocolError(f"{f.name} must be finite")
            object.__setattr__(self, f.name, float(value))
        if self.omega <= 0:
            raise ProtocolError(f"omega must be > 0, got {self.omega}")

    @property
    def period(self) -> float:
        return 2 * math.pi / self.omega

    @property
    def eta(self) -> float:
        if self.j_b == 0:
            raise ProtocolError("eta = j_r / j_b is undefined for j_b = 0")
        return self.j_r / self.j_b

    def j_for(self, is_red: bool) -> float:
        return self.j_r if is_red else self.j_b

    def replace(self, **changes: Any) -> FloquetProtocol:
        return dataclasses.replace(self, **changes)

    def with_eta(self, eta: float) -> FloquetProtocol:
        return self.replace(j_r=eta * self.j_b)

    def as_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)

    # --- presets ---

    @classmethod
    def uniform(cls, j: float = 1.0, **kwargs: Any) -> FloquetProtocol:
        return cls(j_r=j, j_b=j, **kwargs)

    @classmethod
    def ideal(cls, j: float = 1.0, omega: float = 4.0) -> FloquetProtocol:
        """No imperfection and no perturbation: the exactly solvable point."""
        return cls.uniform(j, omega=omega)

    @classmethod
    def perturbed(cls, omega: float = 4.0) -> FloquetProtocol:
        """Full perturbed drive used for the lifetime-versus-frequency runs."""
        return cls.uniform(
            1.0,
            epsilon=0.05,
            h_x=0.21,
            h_y=0.17,
            h_z=0.19,
            v_xx=0.31,
            v_zz=0.15,
            omega=omega,
            include_corner_k1=True,
        )

    @classmethod
    def dimerized(cls, eta: float = 1.0, omega: float = 20.0) -> FloquetProtocol:
        """Dimerized drive used for the resonance scan (j_b fixed to 1)."""
        return cls(
            j_r=eta,
            j_b=1.0,
            h_x=0.11,
            v_xx=0.11,
            v_zz=0.05,
            omega=omega,
        )
