"""The walk restricted to its layer-uniform invariant subspace.

Basis ordering (dimension ``4n + 2``)::

    0          |0,R>      initial state |s, phi(s)>
    2k-1, 2k   |k,L>, |k,R>   for k = 1..2n
    4n+1       |2n+1,L>   target state |t, phi(t)>

The coin acts on the pairs ``(2k-1, 2k)`` (``R_A`` in the left tree, ``R_A'``
in the right tree) and fixes the two end vectors; the shift swaps the pairs
``(2k, 2k+1)``. Both are applied matrix-free in O(n) per step.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Literal

import numpy as np

from .scalars import ExactAmplitude, FactorFingerprint, fingerprint

__all__ = [
    "TABLE2",
    "ExactState",
    "FloatState",
    "ReducedModel",
    "SCAN_HEADER",
    "FRAMES_HEADER",
    "ScanRow",
    "TableRow",
    "WalkParams",
    "WindowError",
    "build",
    "conjecture_scan",
    "emit_frames",
    "initial_state",
    "predetermine_T",
    "run",
    "step",
    "table_row",
    "target_amplitude",
    "target_series",
    "window",
]

SQRT2 = math.sqrt(2.0)
TWO_SQRT2_THIRD = 2.0 * SQRT2 / 3.0

Scalar = Literal["float", "exact"]
Window = Literal["theorem", "conjecture"]

# Published exact maxima: n -> (T, two exponent, odd factors, power of 3 in the denominator).
TABLE2 = {
    50: (109, 152, (19, 38861), 108),
    100: (215, 300, (318388779301,), 214),
    150: (323, 451, (274739, 1231103390273), 322),
}


class WindowError(ValueError):
    """The requested step window contains no odd step count."""


@dataclass(frozen=True)
class WalkParams:
    p: Fraction = Fraction(1, 3)
    q: Fraction = Fraction(2, 3)

    def __post_init__(self) -> None:
        if self.p + self.q != 1:
            raise ValueError("p + q must equal 1")


@dataclass(frozen=True)
class ReducedModel:
    n: int
    params: WalkParams = WalkParams()

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"tree height must be positive, got {self.n}")

    @property
    def dim(self) -> int:
        return 4 * self.n + 2

    @property
    def target(self) -> int:
        return 4 * self.n + 1

    # float / complex vectors -------------------------------------------------

    def coin(self, x: np.ndarray) -> np.ndarray:
        n = self.n
        y = x.copy()
        left_l, left_r = x[1 : 2 * n : 2], x[2 : 2 * n + 1 : 2]
        y[1 : 2 * n : 2] = -left_l / 3.0 + TWO_SQRT2_THIRD * left_r
        y[2 : 2 * n + 1 : 2] = TWO_SQRT2_THIRD * left_l + left_r / 3.0
        right_l, right_r = x[2 * n + 1 : 4 * n : 2], x[2 * n + 2 : 4 * n + 1 : 2]
        y[2 * n + 1 : 4 * n : 2] = right_l / 3.0 + TWO_SQRT2_THIRD * right_r
        y[2 * n + 2 : 4 * n + 1 : 2] = TWO_SQRT2_THIRD * right_l - right_r / 3.0
        return y

    def shift(self, x: np.ndarray) -> np.ndarray:
        return x.reshape(self.dim // 2, 2, *x.shape[1:])[:, ::-1].reshape(x.shape).copy()

    def apply(self, x: np.ndarray) -> np.ndarray:
        """``M_U x`` for a vector (or a stack of column vectors) of length ``dim``."""
        return self.shift(self.coin(x))

    def apply_inverse(self, x: np.ndarray) -> np.ndarray:
        """``M_U^T x``: coin and shift are involutions, so the inverse reverses their order."""
        return self.coin(self.shift(x))

    def dense(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Dense ``(M_C, M_S, M_U)``; meant for cross-checks at modest n."""
        eye = np.eye(self.dim)
        m_c = self.coin(eye)
        m_s = self.shift(eye)
        return m_c, m_s, m_s @ m_c

    # exact vectors ------------------------------------------------------------

    def exact_step(self, a: list[int], b: list[int]) -> tuple[list[int], list[int]]:
        """One step on numerators with a shared exponent; the exponent rises by one.

        Identity entries of the coin are taken as 3/3 so that every component
        gains the same power of 3.
        """
        n, dim = self.n, self.dim
        na = [0] * dim
        nb = [0] * dim
        na[0], nb[0] = 3 * a[0], 3 * b[0]
        na[-1], nb[-1] = 3 * a[-1], 3 * b[-1]
        # left pairs: L' = -L + 2sqrt2 R, R' = 2sqrt2 L + R (over 3); right pairs flip both signs of the diagonal
        for k in range(1, 2 * n + 1):
            i, j = 2 * k - 1, 2 * k
            s = -1 if k <= n else 1
            ai, bi, aj, bj = a[i], b[i], a[j], b[j]
            na[i] = s * ai + 4 * bj
            nb[i] = s * bi + 2 * aj
            na[j] = 4 * bi - s * aj
            nb[j] = 2 * ai - s * bj
        na[0::2], na[1::2] = na[1::2], na[0::2]
        nb[0::2], nb[1::2] = nb[1::2], nb[0::2]
        return na, nb


def build(n: int) -> ReducedModel:
    return ReducedModel(n)


@dataclass
class FloatState:
    amplitudes: np.ndarray
    steps_applied: int = 0

    def norm_sq(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)


@dataclass
class ExactState:
    """Numerators ``a``, ``b`` of every component over the common ``3**steps_applied``."""

    a: list[int]
    b: list[int]
    steps_applied: int = 0

    def __getitem__(self, i: int) -> ExactAmplitude:
        return ExactAmplitude(self.a[i], self.b[i], self.steps_applied)

    def __len__(self) -> int:
        return len(self.a)

    def components(self) -> list[ExactAmplitude]:
        return [self[i] for i in range(len(self))]

    def to_floats(self) -> np.ndarray:
        return np.array([float(c) for c in self.components()])

    def is_unit(self) -> bool:
        """Exact check that the squared norm equals one."""
        rational = sum(x * x + 2 * y * y for x, y in zip(self.a, self.b))
        irrational = sum(x * y for x, y in zip(self.a, self.b))
        return irrational == 0 and rational == 9**self.steps_applied


def initial_state(model: ReducedModel, kind: Scalar = "float") -> FloatState | ExactState:
    if kind == "exact":
        a = [0] * model.dim
        a[0] = 1
        return ExactState(a, [0] * model.dim, 0)
    x = np.zeros(model.dim)
    x[0] = 1.0
    return FloatState(x, 0)


def step(model: ReducedModel, state: FloatState | ExactState) -> FloatState | ExactState:
    if len(state.a if isinstance(state, ExactState) else state.amplitudes) != model.dim:
        raise ValueError("state dimension does not match the model")
    if isinstance(state, ExactState):
        a, b = model.exact_step(state.a, state.b)
        return ExactState(a, b, state.steps_applied + 1)
    return FloatState(model.apply(state.amplitudes), state.steps_applied + 1)


def run(model: ReducedModel, state: FloatState | ExactState, steps: int) -> FloatState | ExactState:
    if steps < 0:
        raise ValueError("step count must be non-negative")
    for _ in range(steps):
        state = step(model, state)
    return state


def target_amplitude(model: ReducedModel | int, steps: int, kind: Scalar = "float"):
    """``<4n+1| M_U^steps |0>`` as a float or an :class:`ExactAmplitude`."""
    if isinstance(model, int):
        model = ReducedModel(model)
    final = run(model, initial_state(model, kind), steps)
    if isinstance(final, ExactState):
        return final[model.target]
    return float(final.amplitudes[model.target])


def target_series(n: int, t_max: int) -> np.ndarray:
    """Target amplitudes for t = 0..t_max (floating point)."""
    model = ReducedModel(n)
    x = np.zeros(model.dim)
    x[0] = 1.0
    out = np.zeros(t_max + 1)
    for t in range(1, t_max + 1):
        x = model.apply(x)
        out[t] = x[-1]
    return out


def window(n: int, kind: Window) -> list[int]:
    """Odd step counts searched when predetermining the walk length."""
    if kind == "conjecture":
        return [t for t in range(2 * n, math.floor(2.5 * n) + 1) if t % 2 == 1]
    if kind == "theorem":
        upper = 3.6 * n * math.log2(5 * n)
        return [t for t in range(2 * n + 1, math.ceil(upper)) if t % 2 == 1 and t < upper]
    raise ValueError(f"unknown window kind {kind!r}")


def predetermine_T(n: int, kind: Window = "theorem") -> tuple[int, float]:
    """Odd T in the window maximising the target amplitude modulus; smallest T on ties.

    Returns ``(T, |amplitude|)``.
    """
    candidates = window(n, kind)
    if not candidates:
        raise WindowError(f"no odd step count in the {kind} window for n={n}")
    series = np.abs(target_series(n, candidates[-1]))
    values = series[candidates]
    best = int(np.argmax(values))
    return candidates[best], float(values[best])


@dataclass(frozen=True)
class ScanRow:
    n: int
    T: int
    P_T: float
    T_over_n: float
    n_inv_cuberoot: float
    passed: bool

    def csv(self) -> str:
        return (
            f"{self.n},{self.T},{self.P_T:.15g},{self.T_over_n:.15g},"
            f"{self.n_inv_cuberoot:.15g},{str(self.passed).lower()}"
        )


SCAN_HEADER = "n,T,P_T,T_over_n,n_inv_cuberoot,pass"


def _scan_one(n: int) -> ScanRow:
    T, p = predetermine_T(n, "conjecture")
    bound = n ** (-1.0 / 3.0)
    return ScanRow(n, T, p, T / n, bound, p > bound)


def conjecture_scan(n_min: int, n_max: int, jobs: int = 1) -> list[ScanRow]:
    if not 3 <= n_min <= n_max:
        raise ValueError("need 3 <= n_min <= n_max")
    ns = range(n_min, n_max + 1)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_scan_one, ns, chunksize=8))
    return [_scan_one(n) for n in ns]


FRAMES_HEADER = "T,k,amplitude"


def emit_frames(n: int, t_max: int, odd_only: bool = True) -> list[tuple[int, int, float]]:
    """Nonzero components ``(T, k, amplitude)`` of the state after T steps.

    T = 0 is always emitted; otherwise only odd T unless ``odd_only`` is false.
    """
    model = ReducedModel(n)
    x = np.zeros(model.dim)
    x[0] = 1.0
    rows: list[tuple[int, int, float]] = []
    for t in range(t_max + 1):
        if t > 0:
            x = model.apply(x)
        if t == 0 or not odd_only or t % 2 == 1:
            rows.extend((t, int(k), float(x[k])) for k in np.flatnonzero(x))
    return rows


@dataclass(frozen=True)
class TableRow:
    n: int
    T: int
    amplitude: ExactAmplitude
    fingerprint: FactorFingerprint
    reference: FactorFingerprint | None
    odd_factors_divide: bool | None
    ratio_to_reference: Fraction | None
    value: float


def table_row(n: int, steps: int | None = None) -> TableRow:
    """Exact maximal target amplitude in the conjecture window, compared with the published value.

    ``ratio_to_reference`` is |computed| / published, exact; a value other than 1
    is a constant-factor convention mismatch, reported rather than hidden.
    """
    if steps is None:
        steps, _ = predetermine_T(n, "conjecture")
    amp = target_amplitude(n, steps, "exact")
    fp = fingerprint(amp)
    ref = None
    divides = None
    ratio = None
    if n in TABLE2 and TABLE2[n][0] == steps:
        _, two_exp, odd_factors, three_exp = TABLE2[n]
        odd = math.prod(odd_factors)
        ref = FactorFingerprint(two_exp, odd, three_exp, False)
        divides = fp.odd_part % odd == 0
        if not fp.has_sqrt2_factor:
            ratio = Fraction(2**fp.two_exponent * fp.odd_part, 3**fp.three_exponent_denominator) / Fraction(
                2**two_exp * odd, 3**three_exp
            )
    return TableRow(n, steps, amp, fp, ref, divides, ratio, float(amp))
