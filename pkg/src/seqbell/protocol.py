"""The sequential weak-measurement protocol.

At every step Alice picks the z-type (``X``) or x-type (``XBAR``) weak
measurement with probability 1/2 each, measures her qubit with noise ``mu_k``,
then rotates her qubit back so that the pair is ``(I (x) U_B)(cos t|00> +
sin t|11>)``. Bob never acts. Branch states are stored in that canonical form,
as a Schmidt angle ``t`` and Bob's real orthogonal frame ``U_B``, which keeps
tiny angles at full relative precision.

Levels of the branch tree are stored column-wise in :class:`Level`; indexing a
level yields :class:`BranchNode` objects. Nodes within a level are always in
canonical history order (``A0 < A1 < B0 < B1`` step by step).
"""

from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from . import bell, kernels
from .config import DEFAULT_TOLERANCES, MAX_DEPTH, Tolerances
from .errors import ConfigError, DegenerateBranchError, ScheduleViolationError
from .measurement import X_AXIS, Z_AXIS


class Choice(enum.Enum):
    X = "A"
    XBAR = "B"

    @property
    def axis(self) -> tuple[float, float, float]:
        return Z_AXIS if self is Choice.X else X_AXIS

    @property
    def index(self) -> int:
        return 0 if self is Choice.X else 1


@dataclass(frozen=True)
class History:
    """Alice's choices and outcomes so far; ``str(h)`` is e.g. ``"B1A0"``."""

    steps: tuple[tuple[Choice, int], ...] = ()

    def __str__(self) -> str:
        return "".join(f"{c.value}{o}" for c, o in self.steps)

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def code(self) -> int:
        """Base-4 integer whose order matches the canonical string order."""
        code = 0
        for c, o in self.steps:
            code = 4 * code + 2 * c.index + o
        return code

    @classmethod
    def from_code(cls, code: int, depth: int) -> "History":
        steps = []
        for _ in range(depth):
            code, digit = divmod(int(code), 4)
            steps.append((Choice.X if digit < 2 else Choice.XBAR, digit % 2))
        return cls(tuple(reversed(steps)))

    @classmethod
    def parse(cls, text: str) -> "History":
        if len(text) % 2:
            raise ValueError(f"malformed history {text!r}")
        steps = []
        for i in range(0, len(text), 2):
            steps.append((Choice(text[i]), int(text[i + 1])))
        return cls(tuple(steps))

    def extend(self, choice: Choice, outcome: int) -> "History":
        return History(self.steps + ((choice, outcome),))


@dataclass(frozen=True)
class MuSchedule:
    """Noise policy: a fixed ``mu_k`` per step, or ``fraction * F(theta_parent)``."""

    mode: str
    explicit_list: tuple[float, ...] = ()
    fraction: float = 0.0

    def __post_init__(self):
        if self.mode == "EXPLICIT":
            object.__setattr__(self, "explicit_list", tuple(float(m) for m in self.explicit_list))
            if any(not np.isfinite(m) or m <= 0.0 for m in self.explicit_list):
                raise ConfigError(f"explicit noise values must be positive, got {self.explicit_list}")
        elif self.mode == "ADAPTIVE":
            if not 0.0 < self.fraction < 1.0:
                raise ConfigError(f"adaptive fraction must lie in (0, 1), got {self.fraction}")
        else:
            raise ConfigError(f"unknown schedule mode {self.mode!r}")

    @classmethod
    def explicit(cls, mus: Sequence[float]) -> "MuSchedule":
        return cls("EXPLICIT", explicit_list=tuple(mus))

    @classmethod
    def explicit_unchecked(cls, mus: Sequence[float]) -> "MuSchedule":
        """Explicit schedule without the positivity check, for validation reports."""
        obj = object.__new__(cls)
        object.__setattr__(obj, "mode", "EXPLICIT")
        object.__setattr__(obj, "explicit_list", tuple(float(m) for m in mus))
        object.__setattr__(obj, "fraction", 0.0)
        return obj

    @classmethod
    def adaptive(cls, fraction: float) -> "MuSchedule":
        return cls("ADAPTIVE", fraction=float(fraction))

    def supports(self, depth: int) -> bool:
        return self.mode == "ADAPTIVE" or len(self.explicit_list) >= depth

    def mu_for(self, step: int, parent_theta: np.ndarray) -> np.ndarray:
        """Noise for step ``step`` (1-based) given each parent's Schmidt angle."""
        parent_theta = np.asarray(parent_theta, dtype=float)
        if self.mode == "EXPLICIT":
            if step > len(self.explicit_list):
                raise ConfigError(f"schedule has no entry for step {step}")
            return np.full(parent_theta.shape, self.explicit_list[step - 1])
        return self.fraction * bell.noise_bound_unchecked(parent_theta)


TABLE_I_SCHEDULE = MuSchedule.explicit([np.pi / 9, np.pi / 12, np.pi / 40, np.pi / 500])


def _pure_from_frame(theta, ub):
    # amplitude of |a>|b> is sigma_a * U_B[b, a]
    sig = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    amps = sig[..., :, None] * np.swapaxes(ub, -1, -2)
    return amps.reshape(amps.shape[:-2] + (4,)).astype(complex)


def _bob_bloch(theta, ub):
    theta = np.asarray(theta, dtype=float)
    ub = np.asarray(ub, dtype=float)
    w = np.stack([np.cos(theta) ** 2, np.sin(theta) ** 2], axis=-1)
    rho = np.einsum("...ik,...k,...jk->...ij", ub, w, ub)
    x = 2.0 * rho[..., 0, 1]
    z = rho[..., 0, 0] - rho[..., 1, 1]
    return np.stack([x, np.zeros_like(x), z], axis=-1)


@dataclass(frozen=True, eq=False)
class BranchNode:
    """One history together with the post-step state and its metrics.

    ``s_noisy`` is the CHSH value reachable at the step that produced this
    node (parent's Schmidt angle with this step's noise); it is ``nan`` at the
    root. ``s_max`` is the Horodecki maximum of the node's own state.
    """

    history: History
    schmidt_theta: float
    bob_frame: np.ndarray
    probability: float
    mu: float = float("nan")
    parent_theta: float = float("nan")

    @property
    def depth(self) -> int:
        return len(self.history)

    @property
    def state(self) -> np.ndarray:
        return _pure_from_frame(self.schmidt_theta, self.bob_frame)

    @property
    def negativity(self) -> float:
        return 0.5 * float(np.sin(2.0 * self.schmidt_theta))

    @property
    def s_noisy(self) -> float:
        if self.depth == 0:
            return float("nan")
        return float(bell.chsh_optimal(self.parent_theta, self.mu))

    @property
    def s_noisy_excess(self) -> float:
        if self.depth == 0:
            return float("nan")
        return float(bell.chsh_excess(self.parent_theta, self.mu))

    @property
    def s_max(self) -> float:
        return float(bell.horodecki_smax_schmidt(self.schmidt_theta))

    @property
    def s_max_excess(self) -> float:
        return float(bell.horodecki_excess(self.schmidt_theta))

    @property
    def bob_bloch(self) -> np.ndarray:
        return _bob_bloch(self.schmidt_theta, self.bob_frame)


def root_node() -> BranchNode:
    return BranchNode(History(), np.pi / 4, np.eye(2), 1.0)


@dataclass(eq=False)
class Level:
    """All ``4**depth`` branches at one time step, in canonical order."""

    depth: int
    codes: np.ndarray
    theta: np.ndarray
    bob_frame: np.ndarray
    probability: np.ndarray
    mu: np.ndarray
    parent_theta: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False)

    @classmethod
    def root(cls) -> "Level":
        nan = np.array([np.nan])
        return cls(0, np.zeros(1, dtype=np.int64), np.array([np.pi / 4]), np.eye(2)[None],
                   np.ones(1), nan, nan.copy())

    def __len__(self) -> int:
        return self.codes.shape[0]

    def __getitem__(self, i: int) -> BranchNode:
        return BranchNode(
            history=History.from_code(self.codes[i], self.depth),
            schmidt_theta=float(self.theta[i]),
            bob_frame=self.bob_frame[i].copy(),
            probability=float(self.probability[i]),
            mu=float(self.mu[i]),
            parent_theta=float(self.parent_theta[i]),
        )

    def __iter__(self) -> Iterator[BranchNode]:
        return (self[i] for i in range(len(self)))

    def history(self, i: int) -> str:
        return str(History.from_code(self.codes[i], self.depth))

    def _memo(self, key, fn):
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    @property
    def negativity(self) -> np.ndarray:
        return self._memo("neg", lambda: 0.5 * np.sin(2.0 * self.theta))

    @property
    def s_noisy(self) -> np.ndarray:
        return self._memo("s", lambda: bell.chsh_optimal(self.parent_theta, self.mu))

    @property
    def s_noisy_excess(self) -> np.ndarray:
        return self._memo("sx", lambda: bell.chsh_excess(self.parent_theta, self.mu))

    @property
    def s_max(self) -> np.ndarray:
        return self._memo("smax", lambda: bell.horodecki_smax_schmidt(self.theta))

    @property
    def s_max_excess(self) -> np.ndarray:
        return self._memo("smaxx", lambda: bell.horodecki_excess(self.theta))

    @property
    def bob_bloch(self) -> np.ndarray:
        return self._memo("bloch", lambda: _bob_bloch(self.theta, self.bob_frame))

    @property
    def states(self) -> np.ndarray:
        return _pure_from_frame(self.theta, self.bob_frame)


def _expand_chunks(expand, theta, ub, mu, workers, zero):
    n = theta.shape[0]
    if workers <= 1 or n < 2 * workers:
        return expand(theta, ub, mu, zero)
    bounds = np.linspace(0, n, workers + 1).astype(int)
    chunks = [(theta[a:b], ub[a:b], mu[a:b]) for a, b in zip(bounds[:-1], bounds[1:])]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(lambda c: expand(*c, zero), chunks))
    return tuple(np.concatenate(p) for p in zip(*parts))


def _check_depth(depth: int) -> None:
    if not isinstance(depth, (int, np.integer)) or depth < 0:
        raise ConfigError(f"depth must be a non-negative integer, got {depth!r}")
    if depth > MAX_DEPTH:
        raise ConfigError(f"depth {depth} exceeds the hard cap {MAX_DEPTH}")


def expand_level(parent: Level, schedule: MuSchedule, *, check: bool = True,
                 choice_probability: float = 0.5, workers: int = 1, backend: str | None = None,
                 tol: Tolerances = DEFAULT_TOLERANCES) -> Level:
    """Apply one protocol step to every branch of ``parent``."""
    step = parent.depth + 1
    mu = schedule.mu_for(step, parent.theta)
    if check:
        bound = bell.noise_bound_unchecked(parent.theta)
        bad = np.flatnonzero((mu <= 0.0) | (mu >= bound))
        if bad.size:
            i = bad[0]
            h = parent.history(i)
            raise ScheduleViolationError(
                f"step {step}: mu={mu[i]:.6g} outside (0, F(theta)={bound[i]:.6g}) "
                f"after history '{h}'", history=h)
    expand = kernels.get_backend(backend)
    theta, ub, outcome_p = _expand_chunks(expand, parent.theta, parent.bob_frame, mu,
                                          workers, tol.phase_fix)
    # genuine branches can have outcome probabilities far below
    # tol.degenerate_branch deep in adaptive runs; only exact zeros are rejected
    lost = ~(outcome_p > 0.0) | ((theta <= 0.0) & (np.repeat(parent.theta, 4) > 0.0))
    if check and np.any(lost):
        i = int(np.flatnonzero(lost)[0])
        h = parent.history(i // 4)
        if parent.theta[i // 4] > 0.0 and 0.0 < mu[i // 4] < np.pi / 4:
            raise DegenerateBranchError(
                f"step {step}: branch below history '{h}' (Schmidt angle "
                f"{parent.theta[i // 4]:.3g}) underflows double precision")
        raise DegenerateBranchError(f"step {step}: impossible branch below history '{h}'")
    weights = np.array([1 - choice_probability, 1 - choice_probability,
                        choice_probability, choice_probability])
    prob = (parent.probability[:, None] * weights[None, :]).reshape(-1) * outcome_p
    codes = (parent.codes[:, None] * 4 + np.arange(4)[None, :]).reshape(-1)
    return Level(
        depth=step,
        codes=codes,
        theta=theta,
        bob_frame=ub,
        probability=prob,
        mu=np.repeat(mu, 4),
        parent_theta=np.repeat(parent.theta, 4),
    )


def enumerate_tree(schedule: MuSchedule, depth: int, *, workers: int = 1,
                   backend: str | None = None, check: bool = True,
                   choice_probability: float = 0.5,
                   tol: Tolerances = DEFAULT_TOLERANCES) -> list[Level]:
    """Breadth-first enumeration of every history up to ``depth``.

    Returns ``depth + 1`` levels; ``levels[k]`` holds the ``4**k`` branches
    just after step ``k`` (``levels[0]`` is the shared initial state).
    """
    _check_depth(depth)
    if not schedule.supports(depth):
        raise ConfigError(f"schedule has {len(schedule.explicit_list)} entries, depth is {depth}")
    levels = [Level.root()]
    for _ in range(depth):
        levels.append(expand_level(levels[-1], schedule, check=check, workers=workers,
                                   backend=backend, choice_probability=choice_probability,
                                   tol=tol))
    return levels


def protocol_step(parent: BranchNode, choice: Choice, mu: float,
                  tol: Tolerances = DEFAULT_TOLERANCES) -> tuple[BranchNode, BranchNode]:
    """Both outcome branches of measuring ``choice`` with noise ``mu`` on ``parent``."""
    bound = float(bell.noise_bound_unchecked(parent.schmidt_theta))
    if not 0.0 < mu < bound:
        raise ScheduleViolationError(
            f"mu={mu:.6g} outside (0, F(theta)={bound:.6g}) after history '{parent.history}'",
            history=str(parent.history))
    theta, ub, outcome_p = kernels.expand(np.array([parent.schmidt_theta]),
                                          parent.bob_frame[None], np.array([mu]), tol.phase_fix)
    children = []
    for outcome in (0, 1):
        j = 2 * choice.index + outcome
        if not outcome_p[j] > 0.0:
            raise DegenerateBranchError(f"outcome {outcome} is impossible after '{parent.history}'")
        children.append(BranchNode(
            history=parent.history.extend(choice, outcome),
            schmidt_theta=float(theta[j]),
            bob_frame=ub[j],
            probability=parent.probability * 0.5 * float(outcome_p[j]),
            mu=float(mu),
            parent_theta=parent.schmidt_theta,
        ))
    return children[0], children[1]


@dataclass(frozen=True)
class TrajectoryStep:
    step: int
    choice: Choice
    outcome: int
    mu: float
    outcome_probability: float
    theta: float
    negativity: float
    s_noisy: float
    history: str


def sample_trajectory(seed: int, schedule: MuSchedule, depth: int, *,
                      choice_probability: float = 0.5,
                      tol: Tolerances = DEFAULT_TOLERANCES) -> list[TrajectoryStep]:
    """One random run of the protocol.

    Uses a PCG64 generator seeded with ``seed``; each step draws the choice
    first and the outcome second, so equal seeds replay bit-exactly.
    """
    _check_depth(depth)
    if not schedule.supports(depth):
        raise ConfigError(f"schedule has {len(schedule.explicit_list)} entries, depth is {depth}")
    rng = np.random.Generator(np.random.PCG64(seed))
    node = root_node()
    records = []
    for step in range(1, depth + 1):
        choice = Choice.XBAR if rng.random() < choice_probability else Choice.X
        u = rng.random()
        mu = float(schedule.mu_for(step, np.array([node.schmidt_theta]))[0])
        child0, child1 = protocol_step(node, choice, mu, tol)
        p0 = child0.probability / (node.probability * 0.5)
        outcome = 0 if u < p0 else 1
        node = child0 if outcome == 0 else child1
        # keep probabilities conditional so long runs do not underflow
        node = BranchNode(node.history, node.schmidt_theta, node.bob_frame, 1.0,
                          node.mu, node.parent_theta)
        records.append(TrajectoryStep(
            step=step, choice=choice, outcome=outcome, mu=mu,
            outcome_probability=p0 if outcome == 0 else 1.0 - p0,
            theta=node.schmidt_theta, negativity=node.negativity, s_noisy=node.s_noisy,
            history=str(node.history)))
    return records


@dataclass(frozen=True)
class LevelMargin:
    level: int
    mu: float
    min_bound: float
    margin: float

    @property
    def valid(self) -> bool:
        return self.margin > 0.0 and self.mu > 0.0


@dataclass(frozen=True)
class ScheduleReport:
    levels: tuple[LevelMargin, ...]

    @property
    def valid(self) -> bool:
        return all(m.valid for m in self.levels)

    def first_violation(self) -> LevelMargin | None:
        return next((m for m in self.levels if not m.valid), None)


def validate_schedule(schedule: MuSchedule, depth: int,
                      tol: Tolerances = DEFAULT_TOLERANCES) -> ScheduleReport:
    """Per-step margin ``min F(theta_parent) - mu_k`` over all reachable parents.

    For adaptive schedules ``mu`` is the largest noise used at the step and the
    margin is the smallest per-branch gap.
    """
    _check_depth(depth)
    if not schedule.supports(depth):
        raise ConfigError(f"schedule has {len(schedule.explicit_list)} entries, depth is {depth}")
    level = Level.root()
    rows = []
    for step in range(1, depth + 1):
        bound = bell.noise_bound_unchecked(level.theta)
        mu = schedule.mu_for(step, level.theta)
        rows.append(LevelMargin(level=step, mu=float(np.max(mu)),
                                min_bound=float(np.min(bound)),
                                margin=float(np.min(bound - mu))))
        if step < depth:
            child = expand_level(level, schedule, check=False, tol=tol)
            # an entangled parent measured inside its bound cannot give a product
            # child; a zero angle there is float64 underflow, not a schedule problem
            lost = (child.theta <= 0.0) & np.repeat((level.theta > 0.0) & (mu > 0.0) & (mu < bound), 4)
            if np.any(lost):
                i = int(np.flatnonzero(lost)[0]) // 4
                raise DegenerateBranchError(
                    f"step {step}: branch below history '{level.history(i)}' (Schmidt angle "
                    f"{level.theta[i]:.3g}) underflows double precision")
            level = child
    return ScheduleReport(tuple(rows))


@dataclass(frozen=True)
class DistinctStates:
    raw_count: int
    distinct_count: int
    labels: np.ndarray
    bloch: np.ndarray
    probability: np.ndarray
    first_member: np.ndarray

    @property
    def representatives(self) -> list[tuple[np.ndarray, float, int]]:
        """``(Bloch vector, aggregated probability, index of first member)`` per class."""
        return [(self.bloch[i], float(self.probability[i]), int(self.first_member[i]))
                for i in range(self.distinct_count)]


def distinct_bob_states(level: Level, tol: float = DEFAULT_TOLERANCES.bob_state_distance
                        ) -> DistinctStates:
    """Group Bob's reduced states whose trace distance is at most ``tol``.

    Trace distance between qubit states is half the Euclidean distance of their
    Bloch vectors; groups are the connected components of the ``<= tol`` graph,
    numbered by their first member in canonical order.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    r = level.bob_bloch
    n = r.shape[0]
    pairs = cKDTree(r).query_pairs(2.0 * tol, output_type="ndarray")
    graph = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n))
    _, comp = connected_components(graph, directed=False)
    # renumber components by first appearance
    _, first = np.unique(comp, return_index=True)
    order = np.argsort(first)
    remap = np.empty_like(order)
    remap[order] = np.arange(order.size)
    labels = remap[comp]
    first_member = first[order]
    prob = np.bincount(labels, weights=level.probability, minlength=order.size)
    return DistinctStates(raw_count=n, distinct_count=int(order.size), labels=labels,
                          bloch=r[first_member], probability=prob, first_member=first_member)
