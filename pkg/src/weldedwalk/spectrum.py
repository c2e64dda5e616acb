"""Closed-form spectral decomposition of the reduced walk matrix.

``M_C = 2 A A^T - I`` with ``A`` the (4n+2) x (2n+2) isometry below, and the
eigenvectors of ``M_U = M_S M_C`` come from those of the tridiagonal
``J = A^T M_S A``: an eigenvector ``v`` of ``J`` with eigenvalue
``lam = 2 sqrt(pq) cos(theta)`` gives the pair ``u = A v - exp(+-i phi) M_S A v``
with ``phi = arccos(lam)``. The eigenvalues ``+1`` and ``-1`` give ``u = A v``.

The oscillatory angles solve ``sqrt(q) sin((n+1) theta) + sigma sqrt(p) sin(n theta) = 0``.
The ``sigma = +1`` family has centro-symmetric eigenvectors (its ``v`` is
mirrored with ``+``), the ``sigma = -1`` family is antisymmetric; roots pair as
``theta_{-k} = pi - theta_k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .reduced import ReducedModel, target_series

__all__ = [
    "EigenPair",
    "GAP_HEADER",
    "SPECTRUM_HEADER",
    "NumericalError",
    "PhaseGap",
    "Spectrum",
    "average_probability",
    "build_A",
    "build_spectrum",
    "chebyshev_U",
    "closed_form_A",
    "delta_E",
    "eigen_residuals",
    "g",
    "g_prime",
    "jordan_cross_check",
    "lemma5_brackets",
    "phase_gap",
    "reconstruct_check",
    "theorem_check",
    "theta_roots",
]

P = 1.0 / 3.0
Q = 2.0 / 3.0
SQRT_PQ = math.sqrt(P * Q)
THETA0 = math.atan(math.sqrt(3.0) / (math.sqrt(2.0) - 1.0))
THETA1 = math.atan(math.sqrt(3.0) / (math.sqrt(2.0) + 1.0))
S_PRIME = (math.pi / 3.0, 2.0 * math.pi / 3.0)
SPECTRUM_HEADER = "kind,k,sigma,theta,lambda,phi,norm_sq,overlap"


class NumericalError(RuntimeError):
    pass


def chebyshev_U(i: int, x, form: Literal["recurrence", "trig"] = "recurrence"):
    """Monic Chebyshev polynomial of the second kind: U_{-1}=0, U_0=1, U_i = x U_{i-1} - U_{i-2}.

    ``form="trig"`` evaluates ``sin((i+1) t) / sin t`` with ``x = 2 cos t``
    and needs ``|x| <= 2``.
    """
    if i < -1:
        raise ValueError("index must be >= -1")
    x = np.asarray(x, dtype=float)
    if form == "trig":
        if np.any(np.abs(x) > 2.0 + 1e-15):
            raise ValueError("trigonometric form needs |x/2| <= 1")
        t = np.arccos(np.clip(x / 2.0, -1.0, 1.0))
        s = np.sin(t)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.sin((i + 1) * t) / s
        # 0/0 near t = 0 and t = pi: the quotient is ill-conditioned there, use the recurrence
        edge = np.abs(s) < 1e-6
        if np.any(edge):
            out = np.where(edge, chebyshev_U(i, x), out)
        return out[()] if out.ndim == 0 else out
    prev, cur = np.zeros_like(x), np.ones_like(x)
    if i == -1:
        return prev[()] if prev.ndim == 0 else prev
    for _ in range(i):
        prev, cur = cur, x * cur - prev
    return cur[()] if cur.ndim == 0 else cur


def _f(theta: np.ndarray, n: int, sigma: int) -> np.ndarray:
    return math.sqrt(Q) * np.sin((n + 1) * theta) + sigma * math.sqrt(P) * np.sin(n * theta)


def theta_roots(n: int, sigma: int) -> np.ndarray:
    """The n roots in (0, pi) of sqrt(q) sin((n+1)t) + sigma sqrt(p) sin(nt), ascending."""
    if n < 1:
        raise ValueError("n must be positive")
    if sigma not in (1, -1):
        raise ValueError("sigma must be +1 or -1")
    points = 8 * (n + 1)
    for _ in range(5):
        grid = np.linspace(0.0, math.pi, points + 2)[1:-1]
        vals = _f(grid, n, sigma)
        exact = grid[vals == 0.0]
        change = np.flatnonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)
        lo, hi = grid[change].copy(), grid[change + 1].copy()
        flo = vals[change]
        while np.any(hi - lo >= 1e-14):
            mid = 0.5 * (lo + hi)
            fm = _f(mid, n, sigma)
            left = np.sign(fm) == np.sign(flo)
            lo = np.where(left, mid, lo)
            flo = np.where(left, fm, flo)
            hi = np.where(left, hi, mid)
            if np.all(mid == lo) and np.all(mid == hi):
                break
        roots = np.sort(np.concatenate([0.5 * (lo + hi), exact]))
        if len(roots) == n:
            return roots
        points *= 2
    raise NumericalError(f"found {len(roots)} roots instead of {n} (n={n}, sigma={sigma})")


def g(theta):
    return np.arccos(2.0 * SQRT_PQ * np.cos(theta))


def g_prime(theta):
    return 2.0 * SQRT_PQ * np.sin(theta) / np.sqrt(1.0 - 4.0 * P * Q * np.cos(theta) ** 2)


@dataclass(frozen=True)
class EigenPair:
    """One eigenvector of ``M_U``; its eigenvalue is ``exp(i * angle)``.

    For oscillatory pairs ``sigma`` is the root family (``k`` runs 2..n+1 in
    both) and ``branch`` picks ``exp(+i phi)`` or ``exp(-i phi)``. For the
    real eigenvalues ``k = 1`` and ``sigma`` is the sign of the eigenvalue.
    """

    kind: Literal["plus_one", "minus_one", "oscillatory"]
    k: int
    sigma: int
    branch: int
    theta: float
    lam: float
    phi: float
    norm_sq: float
    overlap_product: float

    @property
    def angle(self) -> float:
        if self.kind == "minus_one":
            return math.pi
        return self.branch * self.phi

    @property
    def mirror(self) -> int:
        """Sign relating the second half of ``v`` to the reversed first half."""
        return self.sigma


def _norm_sq_oscillatory(n: int, theta: float, sigma: int) -> float:
    # expressed through the sigma=+1 partner angle
    t = theta if sigma == 1 else math.pi - theta
    lam_sq = (2.0 * SQRT_PQ * math.cos(t)) ** 2
    s = math.sin(t)
    return (
        2.0 * (1.0 - lam_sq) ** 2 / (Q * s * s) * (n + math.sqrt(Q / P) * math.sin(2 * (n + 1) * t) / (2.0 * s))
    )


def _norm_sq_real(n: int) -> float:
    try:
        return 2.0 / (P - Q) * (2.0 * P - (Q / P) ** n)
    except OverflowError:  # (q/p)^n = 2^n leaves the float range near n = 1024
        return math.inf


@dataclass
class Spectrum:
    n: int
    pairs: list[EigenPair]
    p: float = P
    q: float = Q
    _model: ReducedModel = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self._model = ReducedModel(self.n)

    def angles(self) -> np.ndarray:
        return np.array([e.angle for e in self.pairs])

    def overlaps(self) -> np.ndarray:
        """``<target|E_j><E_j|initial>`` for normalised eigenvectors."""
        return np.array([e.overlap_product for e in self.pairs])

    def v_vector(self, pair: EigenPair) -> np.ndarray:
        """Closed-form (unnormalised) eigenvector of ``J`` with first component 1."""
        n = self.n
        half = np.empty(n + 1)
        half[0] = 1.0
        j = np.arange(1, n + 1)
        if pair.kind == "oscillatory":
            x = 2.0 * math.cos(pair.theta)
            cheb = [chebyshev_U(i, x, form="trig") for i in range(-1, n)]  # cheb[i+1] = U_i
            half[1:] = pair.lam / math.sqrt(P) * np.array([cheb[i] for i in j]) - np.array(
                [cheb[i - 1] for i in j]
            ) / math.sqrt(Q)
        else:
            half[1:] = (pair.sigma * math.sqrt(Q / P)) ** j / math.sqrt(Q)
        return np.concatenate([half, pair.mirror * half[::-1]])

    def eigenvector(self, pair: EigenPair, normalized: bool = False) -> np.ndarray:
        a = build_A(self.n) @ self.v_vector(pair)
        if pair.kind == "oscillatory":
            u = a - np.exp(1j * pair.angle) * self._model.shift(a)
        else:
            u = a.astype(complex)
        if normalized:
            u = u / np.linalg.norm(u)
        return u

    def csv_rows(self) -> list[str]:
        rows = [SPECTRUM_HEADER]
        for e in self.pairs:
            rows.append(
                f"{e.kind},{e.k},{'+' if e.sigma > 0 else '-'},{e.theta:.15g},{e.lam:.15g},"
                f"{e.angle:.15g},{e.norm_sq:.15g},{e.overlap_product:.15g}"
            )
        return rows


def build_spectrum(n: int) -> Spectrum:
    pairs: list[EigenPair] = []
    norm1 = _norm_sq_real(n)
    pairs.append(EigenPair("plus_one", 1, 1, 1, 0.0, 1.0, 0.0, norm1, 1.0 / norm1))
    pairs.append(EigenPair("minus_one", 1, -1, 1, math.pi, -1.0, math.pi, norm1, -1.0 / norm1))
    # theta_{-k} = pi - theta_k, so the sigma=-1 roots are taken in descending order
    for sigma, roots in ((1, theta_roots(n, 1)), (-1, theta_roots(n, -1)[::-1])):
        for idx, theta in enumerate(roots):
            lam = 2.0 * SQRT_PQ * math.cos(theta)
            phi = math.acos(lam)
            norm = _norm_sq_oscillatory(n, float(theta), sigma)
            overlap = sigma * (1.0 - lam * lam) / norm
            for branch in (1, -1):
                pairs.append(EigenPair("oscillatory", idx + 2, sigma, branch, float(theta), lam, phi, norm, overlap))
    return Spectrum(n, pairs)


def build_A(n: int) -> np.ndarray:
    """Isometry with ``M_C = 2 A A^T - I``: left columns (sqrt p, sqrt q), right ones mirrored."""
    a = np.zeros((4 * n + 2, 2 * n + 2))
    a[0, 0] = 1.0
    for i in range(1, n + 1):
        a[2 * i - 1, i] = math.sqrt(P)
        a[2 * i, i] = math.sqrt(Q)
    return a + a[::-1, ::-1]


def eigen_residuals(spec: Spectrum) -> np.ndarray:
    """``||M_U u - exp(i angle) u|| / ||u||`` for every pair (matrix-free)."""
    model = ReducedModel(spec.n)
    out = []
    for e in spec.pairs:
        u = spec.eigenvector(e)
        out.append(np.linalg.norm(model.apply(u) - np.exp(1j * e.angle) * u) / np.linalg.norm(u))
    return np.array(out)


def reconstruct_check(n: int) -> float:
    """Max-entry error of ``M_U - sum_j exp(i phi_j) |E_j><E_j|``."""
    spec = build_spectrum(n)
    vecs = np.column_stack([spec.eigenvector(e, normalized=True) for e in spec.pairs])
    phases = np.exp(1j * spec.angles())
    _, _, m_u = ReducedModel(n).dense()
    return float(np.max(np.abs(m_u - (vecs * phases) @ vecs.conj().T)))


def closed_form_A(n: int, t: int) -> float:
    """Target amplitude after t steps from the spectral closed form (0 for even t).

    The sum runs over the sigma = +1 root family.
    """
    if t % 2 == 0:
        return 0.0
    thetas = theta_roots(n, 1)
    first = (P - Q) / (2.0 * P - (Q / P) ** n)
    c = np.cos(thetas)
    s = np.sin(thetas)
    terms = (
        np.cos(t * np.arccos(2.0 * SQRT_PQ * c))
        / (1.0 - 4.0 * P * Q * c * c)
        * s * s
        / (n + math.sqrt(Q / P) * np.sin(2 * (n + 1) * thetas) / (2.0 * s))
    )
    return float(first + 2.0 * Q * np.sum(terms))


def _circular_gap(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    d = np.abs(a[:, None] - b[None, :]) % (2 * math.pi)
    return np.minimum(d, 2 * math.pi - d)


def _in_window(spec: Spectrum, window: tuple[float, float]) -> np.ndarray:
    lo, hi = window
    return np.array([e.kind == "oscillatory" and lo < e.theta < hi for e in spec.pairs])


def delta_E(spec: Spectrum, window: tuple[float, float] = S_PRIME) -> float:
    """Smallest circular distance from a selected eigenvalue angle to any other one."""
    angles = spec.angles()
    sel = _in_window(spec, window)
    if not sel.any():
        return math.inf
    gaps = _circular_gap(angles[sel], angles)
    idx = np.flatnonzero(sel)
    gaps[np.arange(len(idx)), idx] = np.inf
    return float(gaps.min())


@dataclass(frozen=True)
class PhaseGap:
    n: int
    delta_theta: float
    delta_E_S: float
    bound: float
    fraction_in_window: float

    @property
    def passed(self) -> bool:
        return self.n * self.delta_theta >= (math.pi - 2.0 * THETA0) * (1.0 - 1e-9)

    @property
    def relation_holds(self) -> bool:
        return self.delta_E_S >= math.sqrt(6.0 / 7.0) * self.delta_theta

    def csv(self) -> str:
        return (
            f"{self.n},{self.delta_theta:.15g},{self.delta_E_S:.15g},{self.bound:.15g},"
            f"{str(self.passed).lower()}"
        )


GAP_HEADER = "n,delta_theta,delta_E_S,bound,pass"


def phase_gap(n: int, window: tuple[float, float] = S_PRIME) -> PhaseGap:
    plus = theta_roots(n, 1)
    thetas = np.sort(np.concatenate([plus, math.pi - plus]))
    lo, hi = window
    sel = (thetas > lo) & (thetas < hi)
    if sel.any() and len(thetas) > 1:
        d = np.abs(thetas[sel][:, None] - thetas[None, :])
        d[np.arange(sel.sum()), np.flatnonzero(sel)] = np.inf
        delta_theta = float(d.min())
    else:
        delta_theta = math.inf
    spec = build_spectrum(n)
    return PhaseGap(
        n,
        delta_theta,
        delta_E(spec, window),
        (math.pi - 2.0 * THETA0) / n,
        float(sel.mean()),
    )


def lemma5_brackets(n: int) -> bool:
    """Offsets of in-window roots from the asymptotes l*pi/n lie in (theta1/n, theta0/n)."""
    lo, hi = THETA1 / n, THETA0 / n
    ok = True
    for sigma in (1, -1):
        roots = theta_roots(n, sigma)
        roots = roots[(roots > S_PRIME[0]) & (roots < S_PRIME[1])]
        grid = math.pi / n
        if sigma == 1:
            # theta = l pi / n - delta
            delta = np.ceil(roots / grid) * grid - roots
        else:
            delta = roots - np.floor(roots / grid) * grid
        ok &= bool(np.all((delta > lo) & (delta < hi)))
    return ok


def _dirichlet(x: np.ndarray, T: int) -> np.ndarray:
    """(1/T) sum_{t<T} exp(i x t), with the removable singularity at x = 0 mod 2pi."""
    z = np.exp(1j * x)
    near = np.abs(1.0 - z) < 1e-12
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (1.0 - z**T) / (T * (1.0 - z))
    return np.where(near, 1.0 + 0j, out)


def average_probability(
    n: int, T: int, k: int, window: tuple[float, float] = S_PRIME
) -> tuple[float, float]:
    """Average of ``p(t1 + ... + tk)`` over independent uniform ``t_m`` in ``0..T-1``.

    Returns ``(exact average from the spectral sum, the lower bound)``.
    """
    if T < 1 or k < 1:
        raise ValueError("need T >= 1 and k >= 1")
    spec = build_spectrum(n)
    w = spec.overlaps()
    angles = spec.angles()
    kernel = _dirichlet(angles[:, None] - angles[None, :], T) ** k
    exact = float(np.real(w @ kernel @ w))
    sel = _in_window(spec, window)
    gap = delta_E(spec, window)
    lower = float(np.sum(w[sel] ** 2) - (math.pi / (T * gap)) ** k)
    return exact, lower


def theorem_check(n: int) -> tuple[float, float, bool]:
    """Max of p(t) over odd t in [2n, ceil(3.6 n log2 5n)] against 1/(20n)."""
    if n < 2:
        raise ValueError("n must be at least 2")
    upper = math.ceil(3.6 * n * math.log2(5 * n))
    series = target_series(n, upper)
    odd = np.arange(2 * n + 1, upper + 1, 2)
    best = float(np.max(series[odd] ** 2))
    bound = 1.0 / (20 * n)
    return best, bound, best > bound


def jordan_cross_check(n: int) -> dict[str, float]:
    """Residuals of the isometry / tridiagonal / singular-value relations."""
    model = ReducedModel(n)
    m_c, m_s, _ = model.dense()
    a = build_A(n)
    out: dict[str, float] = {}
    out["isometry"] = float(np.max(np.abs(a.T @ a - np.eye(2 * n + 2))))
    out["coin_from_A"] = float(np.max(np.abs(2 * a @ a.T - np.eye(4 * n + 2) - m_c)))

    j = a.T @ m_s @ a
    off = [math.sqrt(P)] + [SQRT_PQ] * (n - 1) + [Q] + [SQRT_PQ] * (n - 1) + [math.sqrt(P)]
    pattern = np.diag(off, 1) + np.diag(off, -1)
    out["tridiagonal_pattern"] = float(np.max(np.abs(j - pattern)))

    spec = build_spectrum(n)
    eig_res = 0.0
    norm_res = 0.0
    for e in spec.pairs:
        if e.kind == "oscillatory" and e.branch == -1:
            continue
        v = spec.v_vector(e)
        eig_res = max(eig_res, float(np.linalg.norm(j @ v - e.lam * v) / np.linalg.norm(v)))
        if e.kind == "oscillatory":
            u = spec.eigenvector(e)
            expected = 2.0 * (1.0 - e.lam**2) * float(v @ v)
            norm_res = max(norm_res, abs(float(np.vdot(u, u).real) - expected) / expected)
    out["J_eigen_residual"] = eig_res
    out["u_norm_scaling"] = norm_res
    lams = np.linalg.eigvalsh(j)
    out["J_has_plus_minus_one"] = float(min(np.min(np.abs(lams - 1.0)), np.min(np.abs(lams + 1.0))))

    b = np.zeros((4 * n + 2, 2 * n + 1))
    for i in range(2 * n + 1):
        b[2 * i, i] = b[2 * i + 1, i] = 1.0 / math.sqrt(2.0)
    out["shift_from_B"] = float(np.max(np.abs(2 * b @ b.T - np.eye(4 * n + 2) - m_s)))
    s = np.linalg.svd(a.T @ b, compute_uv=False)  # 2n+1 values, descending
    lam_desc = np.sort(lams)[::-1][: len(s)]  # drop the lam = -1 partner of the missing direction
    out["arccos_relation"] = float(
        np.max(np.abs(np.arccos(np.clip(lam_desc, -1, 1)) - 2.0 * np.arccos(np.clip(s, -1, 1))))
    )
    return out
