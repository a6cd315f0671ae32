"""Discord, superseparability and bounded hidden-variable models for two-qubit
(and qubit-qutrit) correlations."""

from .boxes import Box, MeasurementFamily, born_box, witnesses
from .qmath import DensityMatrix, PureState

__all__ = ["Box", "DensityMatrix", "MeasurementFamily", "PureState", "born_box", "witnesses"]
__version__ = "0.1.0"
