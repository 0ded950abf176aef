"""Numerical tolerances and physical constants used across the package."""

from dataclasses import dataclass

BOLTZMANN_CONSTANT = 1.380649e-23  # J/K, exact SI value
DEFAULT_TEMPERATURE = 300.0  # K


@dataclass(frozen=True)
class Tolerances:
    """Single record for every numerical threshold.

    Attributes:
        norm: allowed deviation of a state's squared norm from 1.
        unit_axis: allowed deviation of a Bloch axis length from 1.
        unitary: allowed entrywise deviation of ``U^dagger U`` from identity.
        degenerate_branch: outcome probabilities below this are impossible branches.
        probability_closure: allowed deviation of a level's total probability from 1.
        bob_state_distance: trace distance under which two Bob states are identified.
        phase_fix: magnitude below which a vector component counts as zero when
            fixing singular-vector phases.
    """

    norm: float = 1e-12
    unit_axis: float = 1e-12
    unitary: float = 1e-10
    degenerate_branch: float = 1e-12
    probability_closure: float = 1e-9
    bob_state_distance: float = 1e-9
    phase_fix: float = 1e-12


DEFAULT_TOLERANCES = Tolerances()

# 4**10 ~ 1.05M nodes at the deepest level
MAX_DEPTH = 10
