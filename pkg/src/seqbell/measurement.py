"""Two-outcome weak measurements on Alice's qubit.

The outcome-0 Kraus operator is ``cos(mu)|n><n| + sin(mu)|-n><-n|``. For
outcome 1 we use the same family at ``pi/2 - mu``, which is the hermitian
positive square root of ``I - K0^dagger K0``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import DegenerateBranchError, InvalidAxisError
from .linalg import IDENTITY, bloch_to_projector, check_normalized

Z_AXIS = (0.0, 0.0, 1.0)
X_AXIS = (1.0, 0.0, 0.0)


@dataclass(frozen=True)
class WeakMeasurement:
    axis: tuple[float, float, float]
    mu: float

    def __post_init__(self):
        axis = tuple(float(c) for c in self.axis)
        if len(axis) != 3 or abs(np.linalg.norm(axis) - 1.0) > DEFAULT_TOLERANCES.unit_axis:
            raise InvalidAxisError(f"measurement axis {axis} is not a unit vector")
        if not (0.0 <= self.mu <= np.pi / 2):
            raise ValueError(f"mu must lie in [0, pi/2], got {self.mu}")
        object.__setattr__(self, "axis", axis)


@dataclass(frozen=True)
class KrausPair:
    k0: np.ndarray
    k1: np.ndarray

    def __getitem__(self, outcome: int) -> np.ndarray:
        return (self.k0, self.k1)[outcome]


def kraus_operator(axis: Sequence[float], mu: float) -> np.ndarray:
    p = bloch_to_projector(axis)
    return np.cos(mu) * p + np.sin(mu) * (IDENTITY - p)


def kraus_pair(m: WeakMeasurement) -> KrausPair:
    return KrausPair(kraus_operator(m.axis, m.mu), kraus_operator(m.axis, np.pi / 2 - m.mu))


def outcome_probabilities(psi: np.ndarray, m: WeakMeasurement,
                          tol: Tolerances = DEFAULT_TOLERANCES) -> tuple[float, float]:
    """Probabilities of outcomes 0 and 1 when ``m`` acts on Alice's qubit."""
    check_normalized(psi, tol)
    k0 = kraus_pair(m).k0
    effect = np.kron(k0 @ k0.conj().T, IDENTITY)
    p0 = float(np.vdot(psi, effect @ psi).real)
    p0 = min(max(p0, 0.0), 1.0)
    return p0, 1.0 - p0


def post_measurement_state(psi: np.ndarray, m: WeakMeasurement, outcome: int,
                           tol: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    check_normalized(psi, tol)
    if outcome not in (0, 1):
        raise ValueError(f"outcome must be 0 or 1, got {outcome!r}")
    k = kraus_pair(m)[outcome]
    out = np.kron(k, IDENTITY) @ psi
    prob = float(np.vdot(out, out).real)
    if prob < tol.degenerate_branch:
        raise DegenerateBranchError(
            f"outcome {outcome} has probability {prob:.3g} below {tol.degenerate_branch:g}")
    return out / np.sqrt(prob)
