"""Photon-by-photon simulation of continuous interferometric qubit readout."""

from qreadout.qubit import (
    DetectionChannel,
    MeasurementSetup,
    PureQubitState,
    apply_detection,
    channel_probabilities,
    evolve_coherent,
    make_setup,
    sequence_log_probability,
    sequence_probability,
)

__version__ = "0.1.0"

__all__ = [
    "DetectionChannel",
    "MeasurementSetup",
    "PureQubitState",
    "apply_detection",
    "channel_probabilities",
    "evolve_coherent",
    "make_setup",
    "sequence_log_probability",
    "sequence_probability",
]
