"""
Brute-force reference: the full 2mn x 2mn evolution matrix.

The matrix is assembled entry by entry from the basis-sum form of the two
part operators::

    U1 = sum_i sum_{a,b} c1(i)[a, b] |a,i><i,b|
    U2 = sum_a sum_{i,j} c2(a)[i, j] |i,a><a,j|

with ``c(v) = -I`` on a marked vertex and ``2/d - delta`` otherwise. Nothing
here calls into :mod:`bipartite_walk.walk` apart from the parameter type, so
the oracle and the structured simulator can be compared as independent
paths. Intended for small instances only.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np
from numpy.typing import NDArray

from .exceptions import SizeGuardError
from .formatting import format_float
from .walk import Layout, WalkParams

__all__ = ["MAX_ORACLE_SIZE", "DenseUnitary", "build_dense", "matrix_power_fidelity", "write_dense_csv"]

MAX_ORACLE_SIZE = 4096  # bound on m*n


def _guard(params: WalkParams) -> None:
    if params.m * params.n > MAX_ORACLE_SIZE:
        raise SizeGuardError(
            f"dense oracle limited to m*n <= {MAX_ORACLE_SIZE}, got {params.m}*{params.n}"
        )


def _row1(m: int, n: int, i: int, a: int) -> int:
    """Linear index of |i,a> (0-based labels)."""
    return i * n + a


def _row2(m: int, n: int, a: int, i: int) -> int:
    """Linear index of |a,i> (0-based labels)."""
    return m * n + a * m + i


def _marked(params: WalkParams) -> tuple[set, set]:
    s = params.sender - 1
    if params.layout is Layout.SAME:
        return {s, params.receiver - 1}, set()
    return {s}, {params.receiver - 1}


@dataclass(frozen=True, eq=False)
class DenseUnitary:
    params: WalkParams
    matrix: NDArray[np.complex128]

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def unitarity_residual(self) -> float:
        """max |U^dagger U - I| over all entries."""
        u = self.matrix
        return float(np.max(np.abs(u.conj().T @ u - np.eye(self.dim))))

    def initial_vector(self) -> NDArray[np.complex128]:
        m, n = self.params.m, self.params.n
        v = np.zeros(self.dim, dtype=np.complex128)
        s = self.params.sender - 1
        for a in range(n):
            v[_row1(m, n, s, a)] = 1.0 / np.sqrt(n)
        return v

    def target_vector(self) -> NDArray[np.complex128]:
        m, n = self.params.m, self.params.n
        v = np.zeros(self.dim, dtype=np.complex128)
        r = self.params.receiver - 1
        if self.params.layout is Layout.SAME:
            for a in range(n):
                v[_row1(m, n, r, a)] = 1.0 / np.sqrt(n)
        else:
            for i in range(m):
                v[_row2(m, n, r, i)] = 1.0 / np.sqrt(m)
        return v

    def trajectory(self, vector, steps: int) -> NDArray[np.complex128]:
        """Rows ``0..steps`` of ``U^t @ vector`` by repeated matrix-vector products."""
        out = np.empty((steps + 1, self.dim), dtype=np.complex128)
        out[0] = vector
        for t in range(steps):
            out[t + 1] = self.matrix @ out[t]
        return out


def build_dense(params: WalkParams) -> DenseUnitary:
    """
    Assemble U = U1 + U2 for ``params`` as an explicit matrix.

    Raises
    ------
    SizeGuardError
        If m*n exceeds :data:`MAX_ORACLE_SIZE`.
    """
    _guard(params)
    m, n = params.m, params.n
    marked1, marked2 = _marked(params)
    u = np.zeros((2 * m * n, 2 * m * n), dtype=np.complex128)

    # U1: |i,b> --coin--> sum_a c1[a,b] |i,a> --shift--> |a,i>
    for i in range(m):
        for a in range(n):
            for b in range(n):
                if i in marked1:
                    c = -1.0 if a == b else 0.0
                else:
                    c = 2.0 / n - (1.0 if a == b else 0.0)
                if c != 0.0:
                    u[_row2(m, n, a, i), _row1(m, n, i, b)] += c

    # U2: |a,j> --coin--> sum_i c2[i,j] |a,i> --shift--> |i,a>
    for a in range(n):
        for i in range(m):
            for j in range(m):
                if a in marked2:
                    c = -1.0 if i == j else 0.0
                else:
                    c = 2.0 / m - (1.0 if i == j else 0.0)
                if c != 0.0:
                    u[_row1(m, n, i, a), _row2(m, n, a, j)] += c

    u.flags.writeable = False
    return DenseUnitary(params, u)


def matrix_power_fidelity(params: WalkParams, steps: int) -> float:
    """|<target| U^steps |init>|^2 by dense powering."""
    if steps < 0:
        raise ValueError("steps must be non-negative")
    dense = build_dense(params)
    psi = dense.trajectory(dense.initial_vector(), steps)[-1]
    return float(abs(np.vdot(dense.target_vector(), psi)) ** 2)


def write_dense_csv(dense: DenseUnitary, path: Union[str, Path, None] = None) -> str:
    """Nonzero entries as CSV ``row,col,re,im`` with 1-based indices."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["row", "col", "re", "im"])
    rows, cols = np.nonzero(dense.matrix)
    for r, c in zip(rows, cols):
        z = dense.matrix[r, c]
        writer.writerow([r + 1, c + 1, format_float(z.real), format_float(z.imag)])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text
