"""Classical-simulation cost accounting over an enumerated branch tree.

Two ledgers:

* communication: a CHSH value ``S`` needs ``max(0, S/2 - 1)`` bits on average;
  ``c_k`` averages it over the branches of step ``k`` and the partial sums
  must stay below ``sqrt(2) - 1``;
* finite memory: a model of a classical memory with ``m`` slots. Bob's
  reduced states are grouped into distinct classes, the Shannon entropy of
  the class distribution is what must be stored, and anything above
  ``log2(m)`` bits is erased at a Landauer cost of ``k_B T ln 2`` per bit.
  A greedy quantizer maps the classes onto ``m`` representatives and reports
  the resulting distortion. The memory model is a concrete choice of ours;
  its outputs are model-dependent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import bell, kernels
from .config import BOLTZMANN_CONSTANT, DEFAULT_TEMPERATURE, DEFAULT_TOLERANCES, Tolerances
from .errors import ConfigError, IncompleteLevelError
from .protocol import BranchNode, Level, MuSchedule, distinct_bob_states, enumerate_tree

COMM_BOUND = math.sqrt(2.0) - 1.0
QUANTIZER_MAX_STATES = 16384


def comm_cost(s: float) -> float:
    """Average bits needed to reach CHSH value ``s``; zero at or below the local bound."""
    return max(0.0, s / 2.0 - 1.0)


def _as_level(nodes) -> Level:
    if isinstance(nodes, Level):
        return nodes
    nodes = list(nodes)
    if not nodes:
        raise IncompleteLevelError("empty level")
    depth = nodes[0].depth
    return Level(
        depth=depth,
        codes=np.array([n.history.code for n in nodes], dtype=np.int64),
        theta=np.array([n.schmidt_theta for n in nodes]),
        bob_frame=np.array([n.bob_frame for n in nodes]),
        probability=np.array([n.probability for n in nodes]),
        mu=np.array([n.mu for n in nodes]),
        parent_theta=np.array([n.parent_theta for n in nodes]),
    )


def _check_complete(level: Level, tol: Tolerances) -> None:
    expected = 4 ** level.depth
    if len(level) != expected:
        raise IncompleteLevelError(f"level {level.depth} has {len(level)} of {expected} branches")
    total = float(np.sum(level.probability))
    if abs(total - 1.0) > tol.probability_closure:
        raise IncompleteLevelError(f"level {level.depth} probabilities sum to {total!r}")


def level_comm_cost(nodes: Level | Sequence[BranchNode],
                    tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """Probability-weighted communication cost ``c_k`` of one complete level."""
    level = _as_level(nodes)
    _check_complete(level, tol)
    if level.depth == 0:
        return 0.0
    per_node = 0.5 * np.maximum(level.s_noisy_excess, 0.0)
    return float(np.sum(level.probability * per_node))


@dataclass(frozen=True)
class CommRow:
    level: int
    c_k: float
    partial_sum: float


@dataclass(frozen=True)
class CommLedger:
    per_level: tuple[CommRow, ...]
    bound: float = COMM_BOUND

    @property
    def total(self) -> float:
        return self.per_level[-1].partial_sum if self.per_level else 0.0

    @property
    def strictly_increasing(self) -> bool:
        sums = [0.0] + [r.partial_sum for r in self.per_level]
        return all(b > a for a, b in zip(sums, sums[1:]))

    @property
    def violation(self) -> bool:
        return any(r.partial_sum >= self.bound for r in self.per_level)


def comm_ledger(levels: Sequence[Level], tol: Tolerances = DEFAULT_TOLERANCES) -> CommLedger:
    rows = []
    partial = 0.0
    for level in levels:
        if level.depth == 0:
            continue
        c = level_comm_cost(level, tol)
        partial += c
        rows.append(CommRow(level.depth, c, partial))
    return CommLedger(tuple(rows))


def total_comm_bound_check(schedule: MuSchedule, depth: int, *, workers: int = 1,
                           tol: Tolerances = DEFAULT_TOLERANCES) -> CommLedger:
    return comm_ledger(enumerate_tree(schedule, depth, workers=workers, tol=tol), tol)


@dataclass(frozen=True)
class TelescopingResult:
    """Horodecki budget of a parent against what one more step spends.

    ``lhs``/``rhs`` are in CHSH units: ``lhs = S_max(parent)`` and
    ``rhs = 2 + max(0, S_noisy - 2) + sum_w (S_max(child) - 2)``. ``margin``
    is ``lhs - rhs`` computed from excesses over 2, so it stays meaningful
    for nearly separable parents. ``lhs_chsh``/``rhs_chsh`` give the same
    comparison without clipping the noisy term.
    """

    lhs: float
    rhs: float
    margin: float
    holds: bool
    lhs_chsh: float
    rhs_chsh: float


def _telescoping(parent_theta, mu, child_theta, weights, slack):
    parent_x = bell.horodecki_excess(parent_theta)
    noisy_x = bell.chsh_excess(parent_theta, mu)
    child_x = np.sum(weights * bell.horodecki_excess(child_theta), axis=-1)
    margin = parent_x - (np.maximum(noisy_x, 0.0) + child_x)
    return parent_x, noisy_x, child_x, margin, margin >= -slack


def telescoping_check(parent: BranchNode, mu: float, children: Sequence[BranchNode],
                      slack: float = 1e-9, tol: Tolerances = DEFAULT_TOLERANCES
                      ) -> TelescopingResult:
    children = list(children)
    if len(children) != 4:
        raise IncompleteLevelError(f"a family has 4 children, got {len(children)}")
    prefix = str(parent.history)
    if any(str(c.history)[:-2] != prefix for c in children):
        raise IncompleteLevelError("children do not all descend from the parent")
    weights = np.array([c.probability for c in children]) / parent.probability
    if abs(weights.sum() - 1.0) > tol.probability_closure:
        raise IncompleteLevelError(f"family weights sum to {weights.sum()!r}")
    theta = np.array([c.schmidt_theta for c in children])
    px, nx, cx, margin, holds = _telescoping(parent.schmidt_theta, mu, theta, weights, slack)
    return TelescopingResult(
        lhs=2.0 + float(px),
        rhs=2.0 + max(float(nx), 0.0) + float(cx),
        margin=float(margin),
        holds=bool(holds),
        lhs_chsh=2.0 + float(px),
        rhs_chsh=2.0 + float(nx) + float(cx),
    )


def telescoping_margins(parent: Level, children: Level, slack: float = 1e-9
                        ) -> tuple[np.ndarray, np.ndarray]:
    """Margins and pass flags for every family between two consecutive levels."""
    if children.depth != parent.depth + 1 or len(children) != 4 * len(parent):
        raise IncompleteLevelError("levels are not parent and complete children")
    weights = children.probability.reshape(-1, 4) / parent.probability[:, None]
    mu = children.mu.reshape(-1, 4)[:, 0]
    _, _, _, margin, holds = _telescoping(parent.theta, mu, children.theta.reshape(-1, 4),
                                          weights, slack)
    return margin, holds


def shannon_entropy(probabilities) -> float:
    p = np.asarray(probabilities, dtype=float)
    p = p[p > 0.0]
    return float(-np.sum(p * np.log2(p))) + 0.0


@dataclass(frozen=True)
class BranchEntropy:
    nodes: float
    bob_states: float


def branch_entropy(nodes: Level | Sequence[BranchNode],
                   tol: Tolerances = DEFAULT_TOLERANCES) -> BranchEntropy:
    """Entropy of the branch distribution and of the distinct-Bob-state distribution."""
    level = _as_level(nodes)
    _check_complete(level, tol)
    distinct = distinct_bob_states(level, tol.bob_state_distance)
    return BranchEntropy(shannon_entropy(level.probability), shannon_entropy(distinct.probability))


def landauer_heat(bits: float, temperature: float = DEFAULT_TEMPERATURE) -> float:
    return bits * BOLTZMANN_CONSTANT * temperature * math.log(2.0)


def quantize(bloch: np.ndarray, probability: np.ndarray, m: int) -> np.ndarray:
    """Greedily merge classes until at most ``m`` remain; returns a class -> slot map.

    Inputs are ordered by first member in canonical history order. The pair
    with the smallest ``p_i p_j / (p_i + p_j) * D(rho_i, rho_j)`` merges first
    (``D`` the trace distance); ties go to the lexicographically smallest
    pair. A merged class is the probability-weighted mixture of its parts and
    keeps the smaller index.
    """
    return np.asarray(kernels.quantize(bloch, probability, int(m)), dtype=np.int64)


@dataclass(frozen=True)
class ErasureRow:
    level: int
    raw_states: int
    distinct_states: int
    entropy_bits: float
    node_entropy_bits: float
    memory_slots: int
    bits_erased: float
    heat_joules: float
    distortion: float


@dataclass(frozen=True)
class ErasureLedger:
    per_level: tuple[ErasureRow, ...]
    temperature: float


def _distortion(level: Level, distinct, m: int) -> float:
    """Probability-weighted trace distance from each node to its slot's mixture."""
    if distinct.distinct_count > m:
        slot = quantize(distinct.bloch, distinct.probability, m)
    else:
        slot = np.arange(distinct.distinct_count)
    node_slot = slot[distinct.labels]
    weight = np.bincount(node_slot, weights=level.probability, minlength=slot.size)
    rep = np.zeros((slot.size, 3))
    np.add.at(rep, node_slot, level.probability[:, None] * level.bob_bloch)
    live = weight > 0
    rep[live] /= weight[live, None]
    # a slot holding a single node represents it exactly
    count = np.bincount(node_slot, minlength=slot.size)
    single = count[node_slot] == 1
    rep[node_slot[single]] = level.bob_bloch[single]
    gap = 0.5 * np.linalg.norm(level.bob_bloch - rep[node_slot], axis=1)
    return float(np.sum(level.probability * gap))


def finite_memory_simulate(levels: Sequence[Level], m: int,
                           temperature: float = DEFAULT_TEMPERATURE,
                           tol: Tolerances = DEFAULT_TOLERANCES) -> ErasureLedger:
    """Erasure ledger for each level under an ``m``-slot memory at ``temperature``.

    Distortion needs the quantizer, which is capped at
    ``QUANTIZER_MAX_STATES`` distinct states; above the cap it is NaN while
    the entropy, erasure and heat columns are still exact.
    """
    if int(m) != m or m < 1:
        raise ConfigError(f"memory slots must be a positive integer, got {m!r}")
    if not temperature > 0:
        raise ConfigError(f"temperature must be positive, got {temperature!r}")
    m = int(m)
    rows = []
    for level in levels:
        _check_complete(level, tol)
        distinct = distinct_bob_states(level, tol.bob_state_distance)
        entropy = shannon_entropy(distinct.probability)
        bits = max(0.0, entropy - math.log2(m))
        if distinct.distinct_count > QUANTIZER_MAX_STATES and distinct.distinct_count > m:
            # the erasure count does not need the quantizer; only distortion does
            distortion = math.nan
        else:
            distortion = _distortion(level, distinct, m)
        rows.append(ErasureRow(
            level=level.depth,
            raw_states=len(level),
            distinct_states=distinct.distinct_count,
            entropy_bits=entropy,
            node_entropy_bits=shannon_entropy(level.probability),
            memory_slots=m,
            bits_erased=bits,
            heat_joules=landauer_heat(bits, temperature),
            distortion=distortion,
        ))
    return ErasureLedger(tuple(rows), float(temperature))
