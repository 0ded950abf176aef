"""Small dense complex linear algebra for one and two qubits.

Two-qubit pure states are plain ``numpy`` arrays of shape ``(4,)`` with
amplitudes ordered ``|00>, |01>, |10>, |11>``; the first tensor factor is
Alice's qubit. Single-qubit operators are ``(2, 2)`` complex arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import InvalidAxisError, InvalidStateError, InvalidUnitaryError

Side = Literal["A", "B"]

IDENTITY = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


@dataclass(frozen=True)
class SchmidtForm:
    """``psi = (u_a (x) u_b)(cos(theta)|00> + sin(theta)|11>)`` up to global phase.

    ``theta`` lies in ``[0, pi/4]``.
    """

    theta: float
    u_a: np.ndarray
    u_b: np.ndarray

    @property
    def coefficients(self) -> tuple[float, float]:
        return float(np.cos(self.theta)), float(np.sin(self.theta))

    def reconstruct(self) -> np.ndarray:
        core = np.array([np.cos(self.theta), 0.0, 0.0, np.sin(self.theta)], dtype=complex)
        return np.kron(self.u_a, self.u_b) @ core


def pure_state(amplitudes: Sequence[complex], tol: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """Return the normalized two-qubit state with the given amplitudes."""
    psi = np.asarray(amplitudes, dtype=complex).reshape(-1)
    if psi.shape != (4,) or not np.all(np.isfinite(psi)):
        raise InvalidStateError(f"expected 4 finite amplitudes, got {psi!r}")
    norm = np.linalg.norm(psi)
    if norm < tol.norm:
        raise InvalidStateError("cannot normalize the zero vector")
    return psi / norm


def basis_state(label: str) -> np.ndarray:
    """``basis_state("01")`` is ``|01>``."""
    psi = np.zeros(4, dtype=complex)
    psi[int(label, 2)] = 1.0
    return psi


def schmidt_state(theta: float) -> np.ndarray:
    """``cos(theta)|00> + sin(theta)|11>``."""
    return np.array([np.cos(theta), 0.0, 0.0, np.sin(theta)], dtype=complex)


PSI_0 = schmidt_state(np.pi / 4)


def check_normalized(psi: np.ndarray, tol: Tolerances = DEFAULT_TOLERANCES) -> None:
    if abs(np.vdot(psi, psi).real - 1.0) > tol.norm:
        raise InvalidStateError("state is not normalized")


def tensor_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def bloch_to_projector(n: Sequence[float], tol: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """``|n><n| = (I + n . sigma) / 2`` for a unit Bloch vector ``n``."""
    n = np.asarray(n, dtype=float)
    if n.shape != (3,) or not np.all(np.isfinite(n)):
        raise InvalidAxisError(f"Bloch vector must have 3 finite components, got {n!r}")
    if abs(np.linalg.norm(n) - 1.0) > tol.unit_axis:
        raise InvalidAxisError(f"Bloch axis {n.tolist()} is not unit length")
    return 0.5 * (IDENTITY + n[0] * SIGMA_X + n[1] * SIGMA_Y + n[2] * SIGMA_Z)


def bloch_vector(rho: np.ndarray) -> np.ndarray:
    """Bloch vector ``(tr(rho X), tr(rho Y), tr(rho Z))`` of a qubit density matrix."""
    return np.array([np.trace(rho @ p).real for p in PAULIS])


def amplitude_matrix(psi: np.ndarray) -> np.ndarray:
    """Reshape so that ``M[a, b]`` is the amplitude of ``|a>_A |b>_B``."""
    return np.asarray(psi, dtype=complex).reshape(2, 2)


def reduced_state(psi: np.ndarray, side: Side) -> np.ndarray:
    m = amplitude_matrix(psi)
    if side == "A":
        return m @ m.conj().T
    if side == "B":
        return m.T @ m.conj()
    raise ValueError(f"side must be 'A' or 'B', got {side!r}")


def density(psi: np.ndarray) -> np.ndarray:
    return np.outer(psi, psi.conj())


def partial_transpose(rho: np.ndarray) -> np.ndarray:
    """Partial transpose on the second qubit of a 4x4 density matrix."""
    r = np.asarray(rho).reshape(2, 2, 2, 2)
    return r.transpose(0, 3, 2, 1).reshape(4, 4)


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(rho - sigma))))


def fidelity(psi: np.ndarray, phi: np.ndarray) -> float:
    """``|<psi|phi>|^2``; insensitive to global phase."""
    return float(abs(np.vdot(psi, phi)) ** 2)


def is_unitary(u: np.ndarray, tol: float = DEFAULT_TOLERANCES.unitary) -> bool:
    u = np.asarray(u)
    if u.shape != (2, 2) or not np.all(np.isfinite(u)):
        return False
    return bool(np.max(np.abs(u.conj().T @ u - IDENTITY)) <= tol)


def _fix_phases(u_a: np.ndarray, u_b: np.ndarray, zero: float) -> tuple[np.ndarray, np.ndarray]:
    # make the first non-negligible entry of each u_b column real positive;
    # the compensating phase goes to the matching u_a column
    u_a = u_a.copy()
    u_b = u_b.copy()
    for i in range(2):
        col = u_b[:, i]
        j = 0 if abs(col[0]) > zero else 1
        phase = col[j] / abs(col[j])
        u_b[:, i] = col / phase
        u_a[:, i] = u_a[:, i] * phase
    return u_a, u_b


def schmidt_decompose(psi: np.ndarray, tol: Tolerances = DEFAULT_TOLERANCES) -> SchmidtForm:
    """Canonical Schmidt form with coefficients ``cos(theta) >= sin(theta) >= 0``.

    Uses the SVD ``M = W diag(s) V^dagger`` of the amplitude matrix, so that
    ``u_a = W`` and ``u_b = conj(V)``. Column phases follow the convention of
    :func:`_fix_phases`; for a maximally entangled input the basis is whatever
    the deterministic LAPACK SVD returns, after the same phase fixing.
    """
    check_normalized(psi, tol)
    w, s, vh = np.linalg.svd(amplitude_matrix(psi))
    theta = float(np.arctan2(s[1], s[0]))
    u_a, u_b = _fix_phases(w, vh.T, tol.phase_fix)
    return SchmidtForm(theta=theta, u_a=u_a, u_b=u_b)


def apply_local_unitary(psi: np.ndarray, u: np.ndarray, side: Side,
                        tol: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    if not is_unitary(u, tol.unitary):
        raise InvalidUnitaryError("operator is not unitary")
    if side == "A":
        op = np.kron(u, IDENTITY)
    elif side == "B":
        op = np.kron(IDENTITY, u)
    else:
        raise ValueError(f"side must be 'A' or 'B', got {side!r}")
    return op @ np.asarray(psi, dtype=complex)


def haar_random_state(rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    return z / np.linalg.norm(z)


def haar_random_unitary(rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))
