from .autocorrelation import (
    autocorrelation,
    autocorrelations,
    expectation_series,
    ideal_autocorrelation,
)
from .energy import energy_density, energy_series, ground_energy
from .models import ObservableError, ObservableLabel, TimeSeries, resolve_observable
from .order_parameters import OrderParameters, membrane_operator, order_parameters

__all__ = [
    "ObservableError",
    "ObservableLabel",
    "OrderParameters",
    "TimeSeries",
    "autocorrelation",
    "autocorrelations",
    "energy_density",
    "energy_series",
    "expectation_series",
    "ground_energy",
    "ideal_autocorrelation",
    "membrane_operator",
    "order_parameters",
    "resolve_observable",
]
