"""Sequential weak measurements on an entangled qubit pair.

Branch-tree simulator for Alice's sequence of noisy z/x measurements on
``(|00> + |11>)/sqrt(2)``, the CHSH metrics that keep every branch
Bell-violating, and ledgers for the communication and finite-memory costs of
classically simulating Bob's qubit.
"""

from .bell import (chsh_excess, chsh_in_plane, chsh_optimal, horodecki_smax, negativity,
                   noise_bound, optimal_bob_angle)
from .config import DEFAULT_TOLERANCES, Tolerances
from .cost import (branch_entropy, comm_cost, finite_memory_simulate, level_comm_cost,
                   telescoping_check, total_comm_bound_check)
from .kernels import BACKEND
from .linalg import (apply_local_unitary, bloch_to_projector, reduced_state, schmidt_decompose,
                     tensor_product)
from .measurement import (KrausPair, WeakMeasurement, kraus_pair, outcome_probabilities,
                          post_measurement_state)
from .protocol import (TABLE_I_SCHEDULE, BranchNode, Choice, History, Level, MuSchedule,
                       distinct_bob_states, enumerate_tree, protocol_step, sample_trajectory,
                       validate_schedule)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "DEFAULT_TOLERANCES", "TABLE_I_SCHEDULE", "BranchNode", "Choice", "History",
    "KrausPair", "Level", "MuSchedule", "Tolerances", "WeakMeasurement", "apply_local_unitary",
    "bloch_to_projector", "branch_entropy", "chsh_excess", "chsh_in_plane", "chsh_optimal",
    "comm_cost", "distinct_bob_states", "enumerate_tree", "finite_memory_simulate",
    "horodecki_smax", "kraus_pair", "level_comm_cost", "negativity", "noise_bound",
    "optimal_bob_angle", "outcome_probabilities", "post_measurement_state", "protocol_step",
    "reduced_state", "sample_trajectory", "schmidt_decompose", "telescoping_check",
    "tensor_product", "total_comm_bound_check", "validate_schedule",
]
