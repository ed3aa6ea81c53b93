"""
Coined quantum walk on the complete bipartite graph K_{m,n}.

The Hilbert space is the direct sum of two blocks. Part 1 holds the states
|i, alpha> (particle on vertex i of the first part, about to hop to vertex
alpha of the second part) and part 2 holds |alpha, i>. Amplitudes are kept
as two dense arrays, ``part1`` of shape (m, n) and ``part2`` of shape (n, m),
so one step of the walk is a row-wise coin followed by a transpose.

Vertex labels are 1-based in every public signature and in exported files;
arrays are indexed 0-based.

Linearized layout
-----------------
Flattening a state gives a vector of length 2mn with the part-1 block first::

    |i, alpha>  ->  (i - 1) * n + (alpha - 1)
    |alpha, i>  ->  m * n + (alpha - 1) * m + (i - 1)

This is exactly ``np.concatenate([part1.ravel(), part2.ravel()])``.
"""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np
from numpy.typing import NDArray

from .exceptions import ConfigurationError

__all__ = [
    "Layout",
    "WalkParams",
    "WalkState",
    "StepOperator",
    "initial_state",
    "target_state",
    "apply_grover",
    "step",
    "evolve",
    "fidelity",
    "write_state_csv",
]

ComplexArray = NDArray[np.complex128]


class Layout(str, enum.Enum):
    """Placement of the receiver relative to the sender."""

    SAME = "same"
    OPPOSITE = "opposite"

    @classmethod
    def parse(cls, value: Union[str, "Layout"]) -> "Layout":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("-", "").replace("_", "")
        aliases = {"same": cls.SAME, "samepart": cls.SAME,
                   "opposite": cls.OPPOSITE, "oppositepart": cls.OPPOSITE,
                   "opp": cls.OPPOSITE}
        try:
            return aliases[key]
        except KeyError:
            raise ConfigurationError(
                f"unknown layout {value!r}; expected 'same' or 'opposite'"
            ) from None


@dataclass(frozen=True)
class WalkParams:
    """
    Graph sizes and marked-vertex placement.

    Parameters
    ----------
    m, n : int
        Number of vertices in the first and second part.
    layout : Layout or str
        ``"same"`` puts the receiver in the first part next to the sender,
        ``"opposite"`` puts it in the second part.
    sender : int
        1-based vertex of the first part. Defaults to 1.
    receiver : int, optional
        1-based vertex, in part 1 for the same layout and in part 2 for the
        opposite layout. Defaults to 2 (same) or 1 (opposite).

    Raises
    ------
    ConfigurationError
        If a size or index is out of range.
    """

    m: int
    n: int
    layout: Layout = Layout.OPPOSITE
    sender: int = 1
    receiver: Optional[int] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "layout", Layout.parse(self.layout))
        for name in ("m", "n", "sender"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise ConfigurationError(f"{name} must be an integer, got {value!r}")
            object.__setattr__(self, name, int(value))
        if self.receiver is None:
            object.__setattr__(self, "receiver", 2 if self.layout is Layout.SAME else 1)
        elif isinstance(self.receiver, bool) or not isinstance(self.receiver, (int, np.integer)):
            raise ConfigurationError(f"receiver must be an integer, got {self.receiver!r}")
        object.__setattr__(self, "receiver", int(self.receiver))

        if self.m < 1 or self.n < 1:
            raise ConfigurationError(f"part sizes must be positive, got m={self.m}, n={self.n}")
        if not 1 <= self.sender <= self.m:
            raise ConfigurationError(f"sender must lie in 1..{self.m}, got {self.sender}")
        if self.layout is Layout.SAME:
            if self.m < 2:
                raise ConfigurationError("the same-part layout needs m >= 2")
            if not 1 <= self.receiver <= self.m:
                raise ConfigurationError(f"receiver must lie in 1..{self.m}, got {self.receiver}")
            if self.receiver == self.sender:
                raise ConfigurationError("sender and receiver must be distinct vertices")
        elif not 1 <= self.receiver <= self.n:
            raise ConfigurationError(f"receiver must lie in 1..{self.n}, got {self.receiver}")

    @property
    def dim(self) -> int:
        return 2 * self.m * self.n

    @property
    def marked_part1(self) -> tuple[int, ...]:
        """0-based marked rows of the part-1 block."""
        if self.layout is Layout.SAME:
            return (self.sender - 1, self.receiver - 1)
        return (self.sender - 1,)

    @property
    def marked_part2(self) -> tuple[int, ...]:
        """0-based marked rows of the part-2 block."""
        if self.layout is Layout.SAME:
            return ()
        return (self.receiver - 1,)


def _frozen(a: ComplexArray) -> ComplexArray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class WalkState:
    """
    Amplitudes over both parts of the graph.

    ``part1[i, a]`` is the amplitude of |i+1, a+1> and ``part2[a, i]`` the
    amplitude of |a+1, i+1>. Arrays are read-only; every operation returns a
    new state.
    """

    params: WalkParams
    part1: ComplexArray
    part2: ComplexArray
    step: int = 0

    def __post_init__(self) -> None:
        m, n = self.params.m, self.params.n
        p1 = np.array(self.part1, dtype=np.complex128)
        p2 = np.array(self.part2, dtype=np.complex128)
        if p1.shape != (m, n) or p2.shape != (n, m):
            raise ValueError(
                f"expected blocks of shape {(m, n)} and {(n, m)}, got {p1.shape} and {p2.shape}"
            )
        object.__setattr__(self, "part1", _frozen(p1))
        object.__setattr__(self, "part2", _frozen(p2))

    @classmethod
    def from_vector(cls, params: WalkParams, vector, step: int = 0) -> "WalkState":
        v = np.asarray(vector, dtype=np.complex128)
        if v.shape != (params.dim,):
            raise ValueError(f"expected a vector of length {params.dim}, got shape {v.shape}")
        mn = params.m * params.n
        return cls(params, v[:mn].reshape(params.m, params.n),
                   v[mn:].reshape(params.n, params.m), step)

    def to_vector(self) -> ComplexArray:
        return np.concatenate([self.part1.ravel(), self.part2.ravel()])

    def norm_squared(self) -> float:
        return float(np.vdot(self.part1, self.part1).real + np.vdot(self.part2, self.part2).real)

    def inner(self, other: "WalkState") -> complex:
        """<self|other>, antilinear in ``self``."""
        _check_same_params(self.params, other.params)
        return complex(np.vdot(self.part1, other.part1) + np.vdot(self.part2, other.part2))

    def rows(self):
        """Yield ``(part, position, coin, amplitude)`` with 1-based labels in layout order."""
        for part, block in ((1, self.part1), (2, self.part2)):
            for (pos, coin), amp in np.ndenumerate(block):
                yield part, pos + 1, coin + 1, complex(amp)


def _check_same_params(a: WalkParams, b: WalkParams) -> None:
    if a != b:
        raise ValueError(f"walk parameters differ: {a} vs {b}")


def _empty(params: WalkParams) -> tuple[ComplexArray, ComplexArray]:
    return (np.zeros((params.m, params.n), dtype=np.complex128),
            np.zeros((params.n, params.m), dtype=np.complex128))


def initial_state(params: WalkParams) -> WalkState:
    """Particle on the sender with a uniform superposition of coin states."""
    p1, p2 = _empty(params)
    p1[params.sender - 1, :] = 1.0 / np.sqrt(params.n)
    return WalkState(params, p1, p2, 0)


def target_state(params: WalkParams) -> WalkState:
    """
    Particle on the receiver with a uniform superposition of coin states.

    For the same-part layout the target lives in part 1 (weight 1/sqrt(n) on
    each |r, alpha>); for the opposite layout it lives in part 2 (weight
    1/sqrt(m) on each |rho, i>).
    """
    p1, p2 = _empty(params)
    if params.layout is Layout.SAME:
        p1[params.receiver - 1, :] = 1.0 / np.sqrt(params.n)
    else:
        p2[params.receiver - 1, :] = 1.0 / np.sqrt(params.m)
    return WalkState(params, p1, p2, 0)


def apply_grover(coeffs) -> ComplexArray:
    """
    Apply the Grover diffusion ``2/d * J - I`` to a coin vector in O(d).

    Examples
    --------
    >>> apply_grover([1, 0, 0, 0]).real
    array([-0.5,  0.5,  0.5,  0.5])
    """
    c = np.asarray(coeffs, dtype=np.complex128)
    if c.ndim != 1 or c.size == 0:
        raise ValueError("apply_grover expects a non-empty 1-D array")
    return (2.0 / c.size) * c.sum() - c


def _coin_block(block: ComplexArray, marked: tuple[int, ...]) -> ComplexArray:
    # Grover on every row, then -I on marked rows.
    d = block.shape[1]
    out = (2.0 / d) * block.sum(axis=1, keepdims=True) - block
    if marked:
        idx = list(marked)
        out[idx] = -block[idx]
    return out


@dataclass(frozen=True)
class StepOperator:
    """
    One step U = S1 C1 + S2 C2 of the walk, applied without building a matrix.

    Marked vertices get the coin -I and every other vertex gets the Grover
    coin. The shift sends |i, alpha> to |alpha, i> and back, so on the block
    arrays it is a transpose. Cost per step is O(mn).
    """

    params: WalkParams
    _marked: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_marked", (self.params.marked_part1, self.params.marked_part2))

    def coin(self, state: WalkState) -> WalkState:
        _check_same_params(self.params, state.params)
        m1, m2 = self._marked
        return WalkState(self.params, _coin_block(state.part1, m1),
                         _coin_block(state.part2, m2), state.step)

    def shift(self, state: WalkState) -> WalkState:
        _check_same_params(self.params, state.params)
        # S1 |i,a> = |a,i>, S2 |a,i> = |i,a>
        return WalkState(self.params, state.part2.T, state.part1.T, state.step)

    def __call__(self, state: WalkState) -> WalkState:
        moved = self.shift(self.coin(state))
        return WalkState(self.params, moved.part1, moved.part2, state.step + 1)


def step(state: WalkState, op: Optional[StepOperator] = None) -> WalkState:
    """Advance ``state`` by one step of the walk."""
    if op is None:
        op = StepOperator(state.params)
    elif op.params != state.params:
        raise ValueError(f"operator built for {op.params}, state has {state.params}")
    return op(state)


def evolve(state: WalkState, steps: int, op: Optional[StepOperator] = None) -> WalkState:
    if steps < 0:
        raise ValueError("steps must be non-negative")
    op = op or StepOperator(state.params)
    for _ in range(steps):
        state = op(state)
    return state


def fidelity(state: WalkState, target: WalkState) -> float:
    """Squared modulus of <target|state>."""
    return abs(target.inner(state)) ** 2


def write_state_csv(state: WalkState, path: Union[str, Path, None] = None) -> str:
    """
    Dump every amplitude as CSV with columns ``part,position,coin,re,im``.

    Labels are 1-based and numbers carry 17 significant digits. Returns the
    CSV text; also writes it to ``path`` when given.
    """
    from .formatting import format_float

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["part", "position", "coin", "re", "im"])
    for part, pos, coin, amp in state.rows():
        writer.writerow([part, pos, coin, format_float(amp.real), format_float(amp.imag)])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text
