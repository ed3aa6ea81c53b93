"""
Reduced dynamics on the invariant subspace of the two-step walk operator.

The walk alternates between the two parts, so its square maps each part to
itself. Restricted to the part holding the initial and target states, the
two-step operator leaves a small subspace invariant:

* receiver in the same part: a 3-dimensional subspace (2-dimensional when
  m = 2), with a matrix that does not depend on n;
* receiver in the opposite part: a 4-dimensional subspace, with eigenvalues
  1, 1, exp(+i omega), exp(-i omega).

Everything in this module is closed form or a power of a 4x4 (or smaller)
real matrix. The embedded basis vectors are kept so the matrices can be
checked against the full simulator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from numpy.typing import NDArray

from .exceptions import DegenerateBasisError, ParityError
from .walk import Layout, WalkParams, WalkState, initial_state, target_state

__all__ = [
    "ReducedModel",
    "SpectralModel",
    "TransferReport",
    "build_reduced",
    "build_reduced_same",
    "build_reduced_same_degenerate",
    "build_reduced_opposite",
    "spectral_opposite",
    "phase_opposite",
    "fidelity_closed_form",
    "fmax_opposite",
    "star_transfer_time",
    "opposite_transfer_time",
    "nearest_even",
    "nearest_odd",
    "transfer_time",
]

TIE_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class ReducedModel:
    """
    Two-step operator restricted to its invariant subspace.

    ``matrix[j, k] = <phi_j| U^2 |phi_k>``. For the opposite layout the
    initial coordinates describe the state after the first walk step, so
    ``t`` applications of ``matrix`` correspond to walk step ``2t + 1``; for
    the same layout they correspond to walk step ``2t``.
    """

    params: WalkParams
    matrix: NDArray[np.float64]
    basis: tuple[WalkState, ...]
    init_coords: NDArray[np.float64]
    target_coords: NDArray[np.float64]

    @property
    def layout(self) -> Layout:
        return self.params.layout

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def step_offset(self) -> int:
        return 0 if self.layout is Layout.SAME else 1

    def evolve(self, t: int) -> NDArray[np.float64]:
        """Coordinates after ``t`` applications of the two-step matrix."""
        if t < 0:
            raise ValueError("t must be non-negative")
        v = self.init_coords.copy()
        for _ in range(t):
            v = self.matrix @ v
        return v

    def fidelity_after(self, t: int) -> float:
        return float(np.dot(self.target_coords, self.evolve(t)) ** 2)

    def walk_fidelities(self, max_steps: int) -> NDArray[np.float64]:
        """Fidelity at walk steps ``0..max_steps``; wrong-parity steps are exactly 0."""
        out = np.zeros(max_steps + 1)
        v = self.init_coords.copy()
        s = self.step_offset
        while s <= max_steps:
            out[s] = np.dot(self.target_coords, v) ** 2
            v = self.matrix @ v
            s += 2
        return out

    def embed(self, coords: Sequence[float]) -> WalkState:
        """Full-space state with the given coordinates in the basis."""
        p1 = sum(c * b.part1 for c, b in zip(coords, self.basis))
        p2 = sum(c * b.part2 for c, b in zip(coords, self.basis))
        return WalkState(self.params, p1, p2, 0)


def _sized_params(m: int, n: int, layout: Layout, sender: int, receiver: Optional[int]) -> WalkParams:
    return WalkParams(m, n, layout, sender, receiver)


def build_reduced_same(m: int, n: int, sender: int = 1, receiver: int = 2) -> ReducedModel:
    """
    3x3 reduced matrix for sender and receiver in the first part.

    Basis: the initial state, the target state, and the uniform state over
    the m - 2 unmarked vertices of the first part.

    Raises
    ------
    DegenerateBasisError
        If m < 3; use :func:`build_reduced_same_degenerate` for m = 2.
    """
    if m < 3:
        raise DegenerateBasisError(
            f"the 3-dimensional same-part basis needs m >= 3, got m={m}; "
            "use build_reduced_same_degenerate for m=2"
        )
    params = _sized_params(m, n, Layout.SAME, sender, receiver)
    g = 2.0 * math.sqrt(m - 2) / m
    matrix = np.array([
        [1 - 2 / m, -2 / m, g],
        [-2 / m, 1 - 2 / m, g],
        [-g, -g, 1 - 4 / m],
    ])

    rest = np.ones((m, n), dtype=np.complex128) / math.sqrt(n * (m - 2))
    rest[[params.sender - 1, params.receiver - 1]] = 0.0
    phi3 = WalkState(params, rest, np.zeros((n, m)), 0)
    basis = (initial_state(params), target_state(params), phi3)
    return ReducedModel(params, matrix, basis, np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0]))


def build_reduced_same_degenerate(m: int, n: int, sender: int = 1, receiver: int = 2) -> ReducedModel:
    """2x2 reduced matrix for m = 2, where only the two marked vertices exist in part 1."""
    if m != 2:
        raise DegenerateBasisError(f"the degenerate same-part model is defined for m=2 only, got m={m}")
    params = _sized_params(m, n, Layout.SAME, sender, receiver)
    matrix = np.array([[1 - 2 / m, -2 / m], [-2 / m, 1 - 2 / m]])
    basis = (initial_state(params), target_state(params))
    return ReducedModel(params, matrix, basis, np.array([1.0, 0.0]), np.array([0.0, 1.0]))


def build_reduced_opposite(m: int, n: int, sender: int = 1, receiver: int = 1) -> ReducedModel:
    """
    4x4 reduced matrix for sender in part 1 and receiver in part 2.

    The basis lives in part 2: the receiver with coin pointing at the
    sender, the receiver with every other coin, every other vertex with coin
    pointing at the sender, and the remaining (m-1)(n-1) states.

    Raises
    ------
    DegenerateBasisError
        If m < 2 or n < 2.
    """
    if m < 2 or n < 2:
        raise DegenerateBasisError(f"the opposite-part basis needs m, n >= 2, got m={m}, n={n}")
    params = _sized_params(m, n, Layout.OPPOSITE, sender, receiver)
    s, rho = params.sender - 1, params.receiver - 1
    rm, rn = math.sqrt(m - 1), math.sqrt(n - 1)
    mn = m * n
    matrix = np.array([
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1 - 2 / n, 4 * rm * rn / mn, 2 * (m - 2) * rn / mn],
        [0.0, 0.0, 1 - 2 / m, -2 * rm / m],
        [0.0, -2 * rn / n, 2 * (n - 2) * rm / mn, (m - 2) * (n - 2) / mn],
    ])

    zero1 = np.zeros((m, n))
    blocks = [np.zeros((n, m)) for _ in range(4)]
    blocks[0][rho, s] = 1.0
    blocks[1][rho, :] = 1.0 / rm
    blocks[1][rho, s] = 0.0
    blocks[2][:, s] = 1.0 / rn
    blocks[2][rho, s] = 0.0
    blocks[3][:, :] = 1.0 / (rm * rn)
    blocks[3][rho, :] = 0.0
    blocks[3][:, s] = 0.0
    basis = tuple(WalkState(params, zero1, b, 0) for b in blocks)

    init = np.array([-1 / math.sqrt(n), 0.0, -math.sqrt((n - 1) / n), 0.0])
    target = np.array([1 / math.sqrt(m), math.sqrt((m - 1) / m), 0.0, 0.0])
    return ReducedModel(params, matrix, basis, init, target)


def build_reduced(params: WalkParams) -> ReducedModel:
    """Pick the reduced model that matches ``params``."""
    if params.layout is Layout.OPPOSITE:
        return build_reduced_opposite(params.m, params.n, params.sender, params.receiver)
    if params.m == 2:
        return build_reduced_same_degenerate(params.m, params.n, params.sender, params.receiver)
    return build_reduced_same(params.m, params.n, params.sender, params.receiver)


def _require_opposite_sizes(m: int, n: int) -> None:
    if m < 2 or n < 2:
        raise DegenerateBasisError(f"needs m, n >= 2, got m={m}, n={n}")


def phase_opposite(m: int, n: int) -> float:
    """Rotation angle omega of the non-trivial eigenvalues exp(+-i omega)."""
    return math.acos((m * n - 2 * m - 2 * n + 2) / (m * n))


@dataclass(frozen=True, eq=False)
class SpectralModel:
    """
    Eigen-decomposition of the opposite-part 4x4 matrix.

    Columns of ``eigenvectors`` are chi_1..chi_4 in the phi basis with
    eigenvalues ``1, 1, exp(i omega), exp(-i omega)``. ``init_weights`` and
    ``target_weights`` expand the initial and target coordinates in that
    eigenbasis.
    """

    m: int
    n: int
    omega: float
    a: complex
    b: float
    c: complex
    eigenvalues: NDArray[np.complex128] = field(repr=False)
    eigenvectors: NDArray[np.complex128] = field(repr=False)
    init_weights: NDArray[np.complex128] = field(repr=False)
    target_weights: NDArray[np.complex128] = field(repr=False)

    def evolve(self, t: int) -> NDArray[np.complex128]:
        """phi-coordinates after ``t`` two-step iterations, from the eigen-expansion."""
        return self.eigenvectors @ (self.init_weights * self.eigenvalues ** t)

    def residuals(self, matrix) -> NDArray[np.float64]:
        """``|M chi_k - lambda_k chi_k|`` for each eigenpair."""
        m = np.asarray(matrix)
        r = m @ self.eigenvectors - self.eigenvectors * self.eigenvalues
        return np.linalg.norm(r, axis=0)


def spectral_opposite(m: int, n: int) -> SpectralModel:
    _require_opposite_sizes(m, n)
    omega = phase_opposite(m, n)
    k = m + n - 1
    q = m * n - m - n + 1  # (m-1)(n-1)
    a = complex(-q / math.sqrt(2 * n * q * k), -1 / math.sqrt(2 * n))
    b = math.sqrt(n / (2 * k))
    c = complex((m - 1) / math.sqrt(2 * n * (m - 1) * k), -math.sqrt((n - 1) / (2 * n)))

    chi = np.zeros((4, 4), dtype=np.complex128)
    chi[0, 0] = 1.0
    chi[1:, 1] = np.array([math.sqrt(n - 1), math.sqrt(m - 1), -1.0]) / math.sqrt(k)
    chi[1:, 2] = [a, b, c]
    chi[1:, 3] = [a.conjugate(), b, c.conjugate()]
    lam = np.array([1.0, 1.0, np.exp(1j * omega), np.exp(-1j * omega)])

    w = math.sqrt((n - 1) / (2 * k))
    init_w = np.array([-1 / math.sqrt(n), -math.sqrt(q / (n * k)), -w, -w], dtype=np.complex128)
    tm = math.sqrt((m - 1) / m)
    target_w = np.array([1 / math.sqrt(m), math.sqrt(q / (m * k)),
                         tm * a.conjugate(), tm * a], dtype=np.complex128)
    return SpectralModel(m, n, omega, a, b, c, lam, chi, init_w, target_w)


def fidelity_closed_form(m: int, n: int, steps: int) -> float:
    """
    Transfer fidelity after an odd number of walk steps, opposite layout.

    Raises
    ------
    ParityError
        For even ``steps``; the particle is then in the sender's part and the
        fidelity is identically zero.
    """
    _require_opposite_sizes(m, n)
    if steps < 1 or steps % 2 == 0:
        raise ParityError(f"closed-form fidelity needs an odd positive step count, got {steps}")
    t = (steps - 1) // 2
    omega = phase_opposite(m, n)
    q = (m - 1) * (n - 1)
    k = m + n - 1
    amp = m * n - q * math.cos(omega * t) + math.sqrt(q * k) * math.sin(omega * t)
    return amp * amp / (m * n * k * k)


def fmax_opposite(m: int, n: int) -> float:
    """Supremum over time of the opposite-layout fidelity; 1 exactly when m == n."""
    if m < 1 or n < 1:
        raise ValueError(f"sizes must be positive, got m={m}, n={n}")
    return ((math.sqrt((m - 1) * (n - 1)) + math.sqrt(m * n)) / (m + n - 1)) ** 2


def star_transfer_time(m: int) -> float:
    """Continuous transfer time 2 pi / arccos((m - 4) / m) for the same layout."""
    if m < 2:
        raise ValueError(f"needs m >= 2, got {m}")
    return 2 * math.pi / math.acos((m - 4) / m)


def opposite_transfer_time(m: int, n: int) -> float:
    """Continuous step count 2t + 1 at the first fidelity maximum, opposite layout."""
    _require_opposite_sizes(m, n)
    theta = math.acos(-math.sqrt((m - 1) * (n - 1) / (m * n)))
    return 2 * theta / phase_opposite(m, n) + 1


def _nearest_with_parity(x: float, parity: int) -> int:
    lo = 2 * math.floor((x - parity) / 2) + parity
    hi = lo + 2
    d_lo, d_hi = x - lo, hi - x
    if d_lo < d_hi or abs(d_lo - d_hi) <= TIE_TOL:
        return lo
    return hi


def nearest_even(x: float) -> int:
    """Closest even integer; exact midpoints go down."""
    return _nearest_with_parity(x, 0)


def nearest_odd(x: float) -> int:
    """Closest odd integer; exact midpoints go down."""
    return _nearest_with_parity(x, 1)


@dataclass(frozen=True)
class TransferReport:
    params: WalkParams
    T_opt: int
    T_continuous: float
    F_max_analytic: float
    F_at_T: float
    omega: Optional[float] = None
    neighbors: tuple[tuple[int, float], ...] = ()
    curve: Optional[tuple[tuple[int, float], ...]] = None

    def to_dict(self) -> dict:
        d = {
            "m": self.params.m,
            "n": self.params.n,
            "layout": self.params.layout.value,
            "sender": self.params.sender,
            "receiver": self.params.receiver,
        }
        if self.omega is not None:
            d["omega"] = self.omega
        d.update(
            T_continuous=self.T_continuous,
            T_opt=self.T_opt,
            F_max_analytic=self.F_max_analytic,
            F_at_T=self.F_at_T,
            neighbors=[{"step": s, "fidelity": f} for s, f in self.neighbors],
        )
        if self.curve is not None:
            d["curve"] = [{"step": s, "fidelity": f} for s, f in self.curve]
        return d


def transfer_time(params: WalkParams, curve_steps: Optional[int] = None) -> TransferReport:
    """
    Recommended step count and the fidelity it reaches.

    The same layout uses the star-graph time and evaluates the fidelity by
    powering the reduced matrix (no closed form is available). The opposite
    layout uses the closed-form time, envelope and fidelity. ``neighbors``
    holds the fidelity two steps before and after ``T_opt``.
    """
    model = build_reduced(params)
    if params.layout is Layout.SAME:
        t_cont = star_transfer_time(params.m)
        t_opt = max(nearest_even(t_cont), 2)
        f_max, omega = 1.0, None
        horizon = max(t_opt + 2, curve_steps or 0)
        fids = model.walk_fidelities(horizon)
        f_of = lambda s: float(fids[s])
    else:
        m, n = params.m, params.n
        t_cont = opposite_transfer_time(m, n)
        t_opt = nearest_odd(t_cont)
        f_max, omega = fmax_opposite(m, n), phase_opposite(m, n)
        f_of = lambda s: fidelity_closed_form(m, n, s) if s % 2 else 0.0

    neighbors = tuple((s, f_of(s)) for s in (t_opt - 2, t_opt + 2) if s >= 1)
    curve = None
    if curve_steps is not None:
        curve = tuple((s, f_of(s)) for s in range(1, curve_steps + 1))
    return TransferReport(params, t_opt, t_cont, f_max, f_of(t_opt), omega, neighbors, curve)
