"""Coined walk on the directed edges of a concrete welded tree.

The walk started from ``|s, phi(s)>`` never leaves the span of genuine
directed edges, so states are vectors over edge slots: vertex ``u`` owns the
contiguous slots ``offset[u] .. offset[u] + d_u - 1``, one per genuine
neighbour in oracle slot order.
"""

from __future__ import annotations

import math
from collections import OrderedDict
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .graph import QueryLedger, WeldedTree

__all__ = [
    "COST_CONVENTIONS",
    "EdgeSpace",
    "EdgeState",
    "edge_space",
    "initial_state",
    "inverse_step",
    "lift_reduced",
    "project_reduced",
    "vertex_distribution",
    "vertex_probability",
    "walk_step",
]

# oracle calls charged per walk step: 4 implements C as U_phi Ref U_phi^dagger with
# U_phi costing 2; 2 is the per-step count stated for the walk operator.
COST_CONVENTIONS = (2, 4)
PREPARATION_COST = 2


class EdgeSpace:
    """Slot bookkeeping for one tree: tails, heads, reverse slots, reduced-basis labels."""

    def __init__(self, tree: WeldedTree) -> None:
        self.tree = tree
        size = tree.num_vertices
        mask = tree.slots >= 0
        self.degree = mask.sum(axis=1)
        self.offset = np.zeros(size + 1, dtype=np.int64)
        np.cumsum(self.degree, out=self.offset[1:])
        self.tail = np.repeat(np.arange(size), self.degree)
        self.head = tree.slots[mask]
        self.port = np.concatenate([np.arange(d) for d in self.degree])

        # slot of (head -> tail) for every (tail -> head)
        lookup = {(int(u), int(v)): e for e, (u, v) in enumerate(zip(self.tail, self.head))}
        self.reverse = np.array([lookup[(int(v), int(u))] for u, v in zip(self.tail, self.head)], dtype=np.int64)

        layer = tree.layer_of
        lower = layer[self.head] < layer[self.tail]
        self.basis_index = 2 * layer[self.tail] - lower.astype(np.int64)
        counts = np.bincount(self.basis_index, minlength=4 * tree.n + 2)
        self.basis_weight = 1.0 / np.sqrt(counts[self.basis_index])

    @property
    def dim(self) -> int:
        return len(self.tail)

    @cached_property
    def exit_slots(self) -> np.ndarray:
        t = self.tree.exit
        return np.arange(self.offset[t], self.offset[t + 1])


_SPACES: OrderedDict[int, EdgeSpace] = OrderedDict()
_CACHE_SIZE = 8


def edge_space(tree: WeldedTree) -> EdgeSpace:
    """Slot tables for ``tree``, cached for the few most recently used trees."""
    space = _SPACES.get(id(tree))
    if space is None or space.tree is not tree:
        space = EdgeSpace(tree)
        _SPACES[id(tree)] = space
        while len(_SPACES) > _CACHE_SIZE:
            _SPACES.popitem(last=False)
    _SPACES.move_to_end(id(tree))
    return space


@dataclass
class EdgeState:
    amplitudes: np.ndarray
    steps_applied: int = 0
    space: EdgeSpace | None = field(default=None, repr=False, compare=False)

    def norm_sq(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def dump_csv(self, tree: WeldedTree) -> str:
        space = self.space or edge_space(tree)
        width = (2 * tree.n + 3) // 4
        lines = ["vertex_hex,port,amplitude"]
        for e in np.flatnonzero(self.amplitudes):
            lines.append(f"{tree.name_of(int(space.tail[e])):0{width}x},{int(space.port[e])},{self.amplitudes[e]:.15g}")
        return "\n".join(lines) + "\n"


def initial_state(tree: WeldedTree, ledger: QueryLedger | None = None, dtype=float) -> EdgeState:
    space = edge_space(tree)
    x = np.zeros(space.dim, dtype=dtype)
    x[space.offset[0] : space.offset[1]] = 1.0 / math.sqrt(2.0)
    if ledger is not None:
        ledger.charge_quantum("preparation", PREPARATION_COST)
    return EdgeState(x, 0, space)


def _coin(space: EdgeSpace, x: np.ndarray) -> np.ndarray:
    sums = np.add.reduceat(x, space.offset[:-1])
    return (2.0 / space.degree * sums)[space.tail] - x


def walk_step(
    tree: WeldedTree, state: EdgeState, ledger: QueryLedger | None = None, cost: int = 4
) -> EdgeState:
    """Grover coin at every vertex, then the flip-flop shift."""
    space = state.space or edge_space(tree)
    y = _coin(space, state.amplitudes)[space.reverse]
    if ledger is not None:
        ledger.charge_quantum("walk", cost)
    return EdgeState(y, state.steps_applied + 1, space)


def inverse_step(
    tree: WeldedTree, state: EdgeState, ledger: QueryLedger | None = None, cost: int = 4
) -> EdgeState:
    space = state.space or edge_space(tree)
    y = _coin(space, state.amplitudes[space.reverse])
    if ledger is not None:
        ledger.charge_quantum("walk", cost)
    return EdgeState(y, state.steps_applied - 1, space)


def vertex_distribution(tree: WeldedTree, state: EdgeState) -> np.ndarray:
    space = state.space or edge_space(tree)
    return np.add.reduceat(np.abs(state.amplitudes) ** 2, space.offset[:-1])


def vertex_probability(tree: WeldedTree, state: EdgeState, u: int) -> float:
    """Probability of observing vertex id ``u`` in the first register."""
    space = state.space or edge_space(tree)
    block = state.amplitudes[space.offset[u] : space.offset[u + 1]]
    return float(np.sum(np.abs(block) ** 2))


def project_reduced(tree: WeldedTree, state: EdgeState) -> tuple[np.ndarray, float]:
    """Coefficients on the layer-uniform basis and the norm of what is left over."""
    space = state.space or edge_space(tree)
    x = state.amplitudes
    weighted = space.basis_weight * x
    size = 4 * tree.n + 2
    if np.iscomplexobj(x):
        coeffs = np.bincount(space.basis_index, weights=weighted.real, minlength=size) + 1j * np.bincount(
            space.basis_index, weights=weighted.imag, minlength=size
        )
    else:
        coeffs = np.bincount(space.basis_index, weights=weighted, minlength=size)
    residual = float(np.linalg.norm(x - coeffs[space.basis_index] * space.basis_weight))
    return coeffs, residual


def lift_reduced(tree: WeldedTree, coeffs: np.ndarray) -> EdgeState:
    """Embed a reduced-basis vector into edge space."""
    space = edge_space(tree)
    return EdgeState(np.asarray(coeffs)[space.basis_index] * space.basis_weight, 0, space)
