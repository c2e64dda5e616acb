"""Deterministic exit finding: phase-matched amplitude amplification of the walk.

``A = U_walk^T1 U_p`` prepares the walk state from an extra basis slot
``|s, bot>``, and ``G = A S_0(beta) A^dagger S_t(alpha)`` is iterated ``T2``
times with Long's phase-matching angles, after which the target overlap is 1.
``U_p`` is completed to a unitary as the transposition of ``|s, bot>`` with
the walk's initial state; nothing else about it is observable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import edgewalk
from .graph import QueryLedger, WeldedTree
from .reduced import ReducedModel, Window, predetermine_T, target_amplitude

__all__ = [
    "AmplifyPlan",
    "REPORT_HEADER",
    "ReducedApplier",
    "EdgeApplier",
    "ScalingFit",
    "grover_iterate",
    "make_plan",
    "phase_matched_recurrence",
    "plan_from_overlap",
    "query_total",
    "report_line",
    "run_deterministic",
    "sample_exit",
    "scaling_fit",
]

REPORT_HEADER = "n,T1,p_T1,T2,alpha,final_prob,oracle_calls_conv2,oracle_calls_conv4"
UP_COST = 2
TARGET_PHASE_COST = 2


@dataclass(frozen=True)
class AmplifyPlan:
    T1: int
    p_T1: float
    theta: float
    T2: int
    alpha: float
    beta: float
    n: int | None = None
    # sign of <target|A|s,bot>; S_t and S_0 only see projectors, so it never enters alpha
    overlap_sign: int = 1


def plan_from_overlap(T1: int, overlap: float, n: int | None = None) -> AmplifyPlan:
    p = abs(overlap)
    if not 0.0 < p <= 1.0 + 1e-12:
        raise ValueError(f"overlap modulus must lie in (0, 1], got {p}")
    p = min(p, 1.0)
    theta = math.asin(p)
    # guard the ceiling against rounding just above an integer (p = 1/2 gives exactly 1)
    T2 = max(0, math.ceil((math.pi / 2 - theta) / (2 * theta) - 1e-9))
    ratio = math.sin(math.pi / (4 * T2 + 2)) / p
    if ratio > 1.0 - 1e-12:
        # asin is ill-conditioned at 1; a rounding-level shortfall would cost ~1e-8 in alpha
        ratio = 1.0
    alpha = 2.0 * math.asin(ratio)
    return AmplifyPlan(T1, p, theta, T2, alpha, -alpha, n, 1 if overlap >= 0 else -1)


def make_plan(n: int, kind: Window = "theorem") -> AmplifyPlan:
    T1, _ = predetermine_T(n, kind)
    return plan_from_overlap(T1, float(target_amplitude(n, T1)), n)


class ReducedApplier:
    """``A`` and ``A^dagger`` on the reduced basis plus one slot for ``|s, bot>``."""

    def __init__(self, n: int, T1: int, ledger: QueryLedger | None = None, cost: int = 4) -> None:
        self.model = ReducedModel(n)
        self.T1 = T1
        self.ledger = ledger
        self.cost = cost
        self.dim = self.model.dim + 1
        self.start = self.model.dim
        self.target = np.array([self.model.target])

    def _charge(self) -> None:
        if self.ledger is not None:
            self.ledger.charge_quantum("U_p", UP_COST)
            self.ledger.charge_quantum("walk", self.cost * self.T1)

    def _swap(self, x: np.ndarray) -> np.ndarray:
        y = x.copy()
        y[[0, self.start]] = x[[self.start, 0]]
        return y

    def forward(self, x: np.ndarray) -> np.ndarray:
        self._charge()
        y = self._swap(x)
        body = y[:-1]
        for _ in range(self.T1):
            body = self.model.apply(body)
        y[:-1] = body
        return y

    def backward(self, x: np.ndarray) -> np.ndarray:
        self._charge()
        y = x.copy()
        body = y[:-1]
        for _ in range(self.T1):
            body = self.model.apply_inverse(body)
        y[:-1] = body
        return self._swap(y)


class EdgeApplier:
    """Same operators on the directed-edge space of a concrete tree."""

    def __init__(self, tree: WeldedTree, T1: int, ledger: QueryLedger | None = None, cost: int = 4) -> None:
        self.tree = tree
        self.space = edgewalk.edge_space(tree)
        self.T1 = T1
        self.ledger = ledger
        self.cost = cost
        self.dim = self.space.dim + 1
        self.start = self.space.dim
        self.target = self.space.exit_slots
        self.psi0 = edgewalk.initial_state(tree).amplitudes

    def _swap(self, x: np.ndarray) -> np.ndarray:
        # transposition of |s,bot> with the initial walk state
        c_e = x[-1]
        c_0 = np.vdot(self.psi0, x[:-1])
        y = x.copy()
        y[:-1] += (c_e - c_0) * self.psi0
        y[-1] = c_0
        return y

    def forward(self, x: np.ndarray) -> np.ndarray:
        if self.ledger is not None:
            self.ledger.charge_quantum("U_p", UP_COST)
        y = self._swap(x)
        state = edgewalk.EdgeState(y[:-1], 0, self.space)
        for _ in range(self.T1):
            state = edgewalk.walk_step(self.tree, state, self.ledger, self.cost)
        y[:-1] = state.amplitudes
        return y

    def backward(self, x: np.ndarray) -> np.ndarray:
        if self.ledger is not None:
            self.ledger.charge_quantum("U_p", UP_COST)
        state = edgewalk.EdgeState(x[:-1].copy(), 0, self.space)
        for _ in range(self.T1):
            state = edgewalk.inverse_step(self.tree, state, self.ledger, self.cost)
        y = x.copy()
        y[:-1] = state.amplitudes
        return self._swap(y)


Applier = ReducedApplier | EdgeApplier


def grover_iterate(plan: AmplifyPlan, applier: Applier, x: np.ndarray) -> np.ndarray:
    """One ``G(alpha, beta)``: target phase, then ``A S_0(beta) A^dagger``."""
    y = np.asarray(x, dtype=complex).copy()
    y[applier.target] *= np.exp(1j * plan.alpha)
    if applier.ledger is not None:
        applier.ledger.charge_quantum("S_t", TARGET_PHASE_COST)
    y = applier.backward(y)
    y[applier.start] *= np.exp(-1j * plan.beta)
    return applier.forward(y)


def start_vector(applier: Applier) -> np.ndarray:
    x = np.zeros(applier.dim, dtype=complex)
    x[applier.start] = 1.0
    return x


def amplified_state(plan: AmplifyPlan, applier: Applier, trace: Callable[[np.ndarray], None] | None = None):
    x = applier.forward(start_vector(applier))
    if trace is not None:
        trace(x)
    for _ in range(plan.T2):
        x = grover_iterate(plan, applier, x)
        if trace is not None:
            trace(x)
    return x


def target_probability(applier: Applier, x: np.ndarray) -> float:
    return float(np.sum(np.abs(x[applier.target]) ** 2))


def sample_exit(tree: WeldedTree, x: np.ndarray, seed: int) -> int:
    """Measure the vertex register of an extended edge vector; returns a vertex name."""
    space = edgewalk.edge_space(tree)
    probs = np.add.reduceat(np.abs(x[:-1]) ** 2, space.offset[:-1])
    probs = probs / probs.sum()
    u = int(np.random.default_rng(seed).choice(len(probs), p=probs))
    return tree.name_of(u)


def run_deterministic(
    target: WeldedTree | int,
    plan: AmplifyPlan,
    ledger: QueryLedger | None = None,
    cost: int = 4,
    seed: int = 0,
) -> tuple[int | float, QueryLedger]:
    """Apply ``G^T2 A`` to ``|s, bot>``.

    With an integer ``n`` the reduced model is used and the target probability
    is returned; with a tree the final vertex register is sampled and the
    observed name returned.
    """
    ledger = ledger if ledger is not None else QueryLedger()
    if isinstance(target, WeldedTree):
        applier: Applier = EdgeApplier(target, plan.T1, ledger, cost)
        x = amplified_state(plan, applier)
        return sample_exit(target, x, seed), ledger
    applier = ReducedApplier(target, plan.T1, ledger, cost)
    x = amplified_state(plan, applier)
    return target_probability(applier, x), ledger


def phase_matched_recurrence(plan: AmplifyPlan) -> list[float]:
    """Target amplitude modulus after 0..T2 iterations in the two-dimensional model."""
    s, c = math.sin(plan.theta), math.cos(plan.theta)
    psi = np.array([s, c], dtype=complex)
    reflect = np.eye(2) - (1 - np.exp(-1j * plan.beta)) * np.outer(psi, psi)
    phase_t = np.diag([np.exp(1j * plan.alpha), 1.0])
    g = reflect @ phase_t
    out = [abs(psi[0])]
    x = psi
    for _ in range(plan.T2):
        x = g @ x
        out.append(abs(x[0]))
    return out


def query_total(plan: AmplifyPlan, cost: int) -> int:
    per_A = UP_COST + cost * plan.T1
    return (2 * plan.T2 + 1) * per_A + TARGET_PHASE_COST * plan.T2


def report_line(n: int, kind: Window = "theorem") -> str:
    plan = make_plan(n, kind)
    final, _ = run_deterministic(n, plan)
    return (
        f"{n},{plan.T1},{plan.p_T1:.15g},{plan.T2},{plan.alpha:.15g},{final:.15g},"
        f"{query_total(plan, 2)},{query_total(plan, 4)}"
    )


@dataclass(frozen=True)
class ScalingFit:
    constant: float
    spread: float  # max/min of total / (n^1.5 log2 n)

    @property
    def within_factor_two(self) -> bool:
        # some constant c has every ratio in [c/2, 2c] iff max/min <= 4
        return self.spread <= 4.0


def scaling_fit(ns, totals) -> ScalingFit:
    ns = np.asarray(ns, dtype=float)
    ratios = np.asarray(totals, dtype=float) / (ns**1.5 * np.log2(ns))
    lo, hi = float(ratios.min()), float(ratios.max())
    return ScalingFit(math.sqrt(lo * hi), hi / lo)
