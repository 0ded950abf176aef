"""CHSH and entanglement metrics for two-qubit pure states.

Alice measures noisy ``sigma_z`` / ``sigma_x`` (Bloch vectors shortened by
``cos(2 mu)``); Bob measures projectively in the x-z plane along
``[+-cos(theta_b), 0, sin(theta_b)]``. On ``cos(eta)|00> + sin(eta)|11>``:

    S(theta_b) = 2 cos(2 mu) [sin(theta_b) + sin(2 eta) cos(theta_b)]
    S_opt      = sqrt(6 - 2 cos(4 eta)) cos(2 mu) = 2 sqrt(1 + sin^2(2 eta)) cos(2 mu)

and ``S_opt > 2`` exactly when ``mu < F(eta) = arctan(sin(2 eta)) / 2``, which
is the same angle as ``arccos(2 / sqrt(6 - 2 cos(4 eta))) / 2`` but stays
accurate for tiny ``eta``.

Functions taking angles accept scalars or numpy arrays.
"""

from __future__ import annotations

import numpy as np

from .errors import ProductStateError
from .linalg import PAULIS, check_normalized, density, partial_transpose
from .measurement import X_AXIS, Z_AXIS, kraus_operator

LOCAL_BOUND = 2.0
TSIRELSON_BOUND = 2.0 * np.sqrt(2.0)


def _require_entangled(eta) -> None:
    eta = np.asarray(eta, dtype=float)
    if np.any(eta <= 0.0) or np.any(eta >= np.pi / 2):
        raise ProductStateError(f"eta must lie strictly inside (0, pi/2), got {eta}")


def chsh_in_plane(eta, mu, theta_b):
    return 2.0 * np.cos(2.0 * mu) * (np.sin(theta_b) + np.sin(2.0 * eta) * np.cos(theta_b))


def optimal_bob_angle(eta):
    """Bob's angle ``arctan(1 / sin(2 eta))`` maximizing :func:`chsh_in_plane`."""
    _require_entangled(eta)
    return np.arctan2(1.0, np.sin(2.0 * np.asarray(eta, dtype=float)))


def chsh_optimal(eta, mu):
    return 2.0 * np.sqrt(1.0 + np.sin(2.0 * eta) ** 2) * np.cos(2.0 * mu)


def chsh_optimal_literal(eta, mu):
    """Same value as :func:`chsh_optimal`, written with ``cos(4 eta)``."""
    return np.sqrt(6.0 - 2.0 * np.cos(4.0 * eta)) * np.cos(2.0 * mu)


def chsh_excess(eta, mu):
    """``chsh_optimal(eta, mu) - 2`` without cancellation for small angles."""
    x = np.sin(2.0 * eta) ** 2
    return 2.0 * (x / (np.sqrt(1.0 + x) + 1.0) * np.cos(2.0 * mu) - 2.0 * np.sin(mu) ** 2)


def noise_bound(eta):
    """Largest noise ``F(eta)`` for which Alice's noisy pair still violates CHSH."""
    _require_entangled(eta)
    return noise_bound_unchecked(eta)


def noise_bound_unchecked(eta):
    # F -> 0 continuously at product states; used for margin reports
    return 0.5 * np.arctan(np.abs(np.sin(2.0 * np.asarray(eta, dtype=float))))


def noise_bound_literal(eta):
    return 0.5 * np.arccos(2.0 / np.sqrt(6.0 - 2.0 * np.cos(4.0 * eta)))


def correlation_matrix(psi: np.ndarray) -> np.ndarray:
    """``T[i, j] = <psi| sigma_i (x) sigma_j |psi>``."""
    rho = density(psi)
    return np.array([[np.trace(rho @ np.kron(a, b)).real for b in PAULIS] for a in PAULIS])


def horodecki_smax(psi: np.ndarray) -> float:
    """Maximal CHSH value over all projective settings: ``2 sqrt(t1 + t2)``."""
    check_normalized(psi)
    t = correlation_matrix(psi)
    eig = np.sort(np.linalg.eigvalsh(t.T @ t))
    return float(2.0 * np.sqrt(eig[-1] + eig[-2]))


def horodecki_smax_schmidt(theta):
    """Closed form ``2 sqrt(1 + sin^2(2 theta))`` for a state of Schmidt angle ``theta``."""
    return 2.0 * np.sqrt(1.0 + np.sin(2.0 * theta) ** 2)


def horodecki_excess(theta):
    """``horodecki_smax_schmidt(theta) - 2`` computed without cancellation."""
    x = np.sin(2.0 * theta) ** 2
    return 2.0 * x / (np.sqrt(1.0 + x) + 1.0)


def negativity(psi: np.ndarray) -> float:
    """Absolute sum of the negative eigenvalues of the partial transpose."""
    check_normalized(psi)
    eig = np.linalg.eigvalsh(partial_transpose(density(psi)))
    return float(-np.sum(eig[eig < 0.0]))


def chsh_from_correlators(psi: np.ndarray, mu: float, theta_b: float) -> float:
    """Assemble ``<A0B0> + <A0B1> + <A1B0> - <A1B1>`` from explicit operators.

    Alice's observables are ``E0 - E1`` of her weak z and x measurements.
    """
    alice = []
    for axis in (Z_AXIS, X_AXIS):
        k0 = kraus_operator(axis, mu)
        k1 = kraus_operator(axis, np.pi / 2 - mu)
        alice.append(k0.conj().T @ k0 - k1.conj().T @ k1)
    bob = [np.cos(theta_b) * PAULIS[0] + np.sin(theta_b) * PAULIS[2],
           -np.cos(theta_b) * PAULIS[0] + np.sin(theta_b) * PAULIS[2]]
    rho = density(psi)

    def corr(a, b):
        return np.trace(rho @ np.kron(a, b)).real

    a0, a1 = alice
    b0, b1 = bob
    return float(corr(a0, b0) + corr(a0, b1) + corr(a1, b0) - corr(a1, b1))
