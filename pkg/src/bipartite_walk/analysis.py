"""
Fidelity curves, peak search, F_max sweeps and the cross-validation battery.
"""

from __future__ import annotations

import csv
import enum
import io
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence, Union

import numpy as np
from numpy.typing import NDArray

from .dense import build_dense
from .exceptions import UnsupportedSourceError
from .formatting import format_float
from .reduced import (
    build_reduced,
    build_reduced_opposite,
    fidelity_closed_form,
    fmax_opposite,
    spectral_opposite,
    transfer_time,
)
from .walk import (
    Layout,
    StepOperator,
    WalkParams,
    WalkState,
    apply_grover,
    fidelity,
    initial_state,
    target_state,
)

log = logging.getLogger(__name__)

__all__ = [
    "Source",
    "FidelityCurve",
    "Peak",
    "SweepGrid",
    "VerifyLimits",
    "CheckResult",
    "VerificationReport",
    "simulate_fidelities",
    "curve",
    "find_peak",
    "scan_peak",
    "sweep_fmax",
    "verify",
    "write_curves_csv",
]


class Source(str, enum.Enum):
    FULL_SIMULATION = "full"
    REDUCED_MATRIX = "reduced"
    CLOSED_FORM = "closed-form"


@dataclass(frozen=True, eq=False)
class FidelityCurve:
    params: WalkParams
    source: Source
    steps: NDArray[np.int64]
    fidelities: NDArray[np.float64]

    @property
    def points(self) -> list[tuple[int, float]]:
        return [(int(s), float(f)) for s, f in zip(self.steps, self.fidelities)]

    def at(self, step: int) -> float:
        idx = np.searchsorted(self.steps, step)
        if idx >= len(self.steps) or self.steps[idx] != step:
            raise KeyError(step)
        return float(self.fidelities[idx])


def simulate_fidelities(params: WalkParams, max_steps: int) -> NDArray[np.float64]:
    """Fidelity with the target after each of walk steps ``0..max_steps``."""
    op = StepOperator(params)
    target = target_state(params)
    psi = initial_state(params)
    out = np.empty(max_steps + 1)
    out[0] = fidelity(psi, target)
    for s in range(1, max_steps + 1):
        psi = op(psi)
        out[s] = fidelity(psi, target)
    return out


def _closed_form_fidelities(params: WalkParams, max_steps: int) -> NDArray[np.float64]:
    out = np.zeros(max_steps + 1)
    for s in range(1, max_steps + 1, 2):
        out[s] = fidelity_closed_form(params.m, params.n, s)
    return out


def curve(
    params: WalkParams,
    max_steps: int,
    sources: Iterable[Union[Source, str]] = (Source.FULL_SIMULATION,),
) -> list[FidelityCurve]:
    """
    One fidelity curve per requested source over walk steps ``1..max_steps``.

    Raises
    ------
    UnsupportedSourceError
        If the closed form is requested for the same-part layout.
    """
    if max_steps < 1:
        raise ValueError("max_steps must be at least 1")
    sources = [Source(s) for s in sources]
    if Source.CLOSED_FORM in sources and params.layout is Layout.SAME:
        raise UnsupportedSourceError("no closed-form fidelity exists for the same-part layout")

    steps = np.arange(1, max_steps + 1)
    curves = []
    for src in sources:
        if src is Source.FULL_SIMULATION:
            f = simulate_fidelities(params, max_steps)
        elif src is Source.REDUCED_MATRIX:
            f = build_reduced(params).walk_fidelities(max_steps)
        else:
            f = _closed_form_fidelities(params, max_steps)
        curves.append(FidelityCurve(params, src, steps, f[1:]))
    return curves


@dataclass(frozen=True)
class Peak:
    """First local maximum and global maximum among the target-parity steps."""

    first_step: int
    first_value: float
    global_step: int
    global_value: float


def find_peak(c: FidelityCurve) -> Peak:
    parity = 0 if c.params.layout is Layout.SAME else 1
    mask = (c.steps % 2 == parity) & (c.steps >= 1)
    steps, f = c.steps[mask], c.fidelities[mask]
    if len(steps) == 0:
        raise ValueError("curve has no steps of the target parity")
    first = len(f) - 1
    for k in range(len(f) - 1):
        if f[k] >= f[k + 1] and (k == 0 or f[k] >= f[k - 1]):
            first = k
            break
    g = int(np.argmax(f))  # ties resolve to the earliest step
    return Peak(int(steps[first]), float(f[first]), int(steps[g]), float(f[g]))


def scan_peak(params: WalkParams, max_steps: Optional[int] = None) -> Peak:
    """Peak of the simulated curve over ``1..max(4 T_opt, 100)`` unless told otherwise."""
    if max_steps is None:
        max_steps = max(4 * transfer_time(params).T_opt, 100)
    return find_peak(curve(params, max_steps)[0])


def write_curves_csv(curves: Sequence[FidelityCurve], path: Union[str, Path, None] = None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["step", "fidelity", "source"])
    for c in curves:
        for s, f in c.points:
            w.writerow([s, format_float(f), c.source.value])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


@dataclass(frozen=True, eq=False)
class SweepGrid:
    m_values: tuple[int, ...]
    n_values: tuple[int, ...]
    fmax: NDArray[np.float64]

    def to_csv(self, path: Union[str, Path, None] = None) -> str:
        """Header row of n values, one row per m with m in the first column."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["m\\n", *self.n_values])
        for m, row in zip(self.m_values, self.fmax):
            w.writerow([m, *(format_float(x) for x in row)])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    def to_dict(self) -> dict:
        return {"m_values": list(self.m_values), "n_values": list(self.n_values),
                "fmax": [list(map(float, row)) for row in self.fmax]}


def sweep_fmax(m_values: Iterable[int], n_values: Iterable[int]) -> SweepGrid:
    ms, ns = tuple(int(v) for v in m_values), tuple(int(v) for v in n_values)
    if not ms or not ns:
        raise ValueError("sweep ranges must be non-empty")
    if min(ms + ns) < 2:
        raise ValueError("sweep values must be at least 2")
    grid = np.array([[fmax_opposite(m, n) for n in ns] for m in ms])
    return SweepGrid(ms, ns, grid)


# ---------------------------------------------------------------------------
# verification battery
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VerifyLimits:
    max_oracle_size: int = 36          # m*n bound for dense-oracle checks
    oracle_steps: int = 50
    norm_steps: int = 10_000
    norm_size: tuple[int, int] = (5, 7)
    reduced_max: int = 10              # m, n in 2..reduced_max
    spectral_max: int = 8
    sweep_max: int = 12                # fidelity-envelope and closed-form checks
    sweep_steps: int = 200
    n_independence_m: tuple[int, ...] = (3, 5, 10)
    n_independence_n: tuple[int, ...] = (1, 2, 5, 9)
    n_independence_steps: int = 60
    grover_dims: tuple[int, ...] = (1, 2, 3, 4, 7, 64, 1000, 10_000)
    seed: int = 20160101


@dataclass
class CheckResult:
    name: str
    tolerance: float
    worst: float = 0.0
    cases: int = 0
    failures: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return not self.failures

    def record(self, residual: float, case) -> None:
        self.cases += 1
        residual = float(residual)
        self.worst = max(self.worst, residual)
        if not residual <= self.tolerance:
            self.failures.append({"case": str(case), "residual": residual})

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "tolerance": self.tolerance,
                "worst_residual": self.worst, "cases": self.cases,
                "failures": self.failures[:20], "seconds": self.seconds}


@dataclass
class VerificationReport:
    checks: list[CheckResult]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {"passed": self.passed, "checks": [c.to_dict() for c in self.checks]}


def _oracle_params(limit: int) -> list[WalkParams]:
    out = []
    for m in range(1, limit + 1):
        for n in range(1, limit // m + 1):
            out.append(WalkParams(m, n, Layout.OPPOSITE))
            if m >= 2:
                out.append(WalkParams(m, n, Layout.SAME))
    return out


def _check_oracle(lim: VerifyLimits, unitarity: CheckResult, equiv: CheckResult) -> None:
    for p in _oracle_params(lim.max_oracle_size):
        dense = build_dense(p)
        unitarity.record(dense.unitarity_residual(), p)
        ref = dense.trajectory(dense.initial_vector(), lim.oracle_steps)
        op, psi = StepOperator(p), initial_state(p)
        worst = np.max(np.abs(psi.to_vector() - ref[0]))
        for t in range(1, lim.oracle_steps + 1):
            psi = op(psi)
            worst = max(worst, np.max(np.abs(psi.to_vector() - ref[t])))
        equiv.record(worst, p)


def _random_state(params: WalkParams, rng: np.random.Generator) -> WalkState:
    v = rng.normal(size=params.dim) + 1j * rng.normal(size=params.dim)
    return WalkState.from_vector(params, v / np.linalg.norm(v))


def _check_norm(lim: VerifyLimits, res: CheckResult, rng) -> None:
    m, n = lim.norm_size
    for layout in Layout:
        p = WalkParams(m, n, layout)
        for label, psi in (("init", initial_state(p)), ("random", _random_state(p, rng))):
            op, drift = StepOperator(p), 0.0
            for _ in range(lim.norm_steps):
                psi = op(psi)
                drift = max(drift, abs(psi.norm_squared() - 1.0))
            res.record(drift, f"{p} {label}")


def _check_grover(lim: VerifyLimits, res: CheckResult, rng) -> None:
    for d in lim.grover_dims:
        c = rng.normal(size=d) + 1j * rng.normal(size=d)
        res.record(np.max(np.abs(apply_grover(apply_grover(c)) - c)), f"d={d}")


def _check_shift(lim: VerifyLimits, res: CheckResult, rng) -> None:
    for m, n in ((1, 1), (2, 3), (5, 7), (16, 9)):
        for layout in Layout:
            if layout is Layout.SAME and m < 2:
                continue
            p = WalkParams(m, n, layout)
            op, psi = StepOperator(p), _random_state(p, rng)
            back = op.shift(op.shift(psi))
            res.record(np.max(np.abs(back.to_vector() - psi.to_vector())), p)


def _sweep_params(lim: VerifyLimits) -> list[WalkParams]:
    return [WalkParams(m, n, Layout.OPPOSITE)
            for m in range(2, lim.sweep_max + 1) for n in range(2, lim.sweep_max + 1)]


def _check_parity_envelope_closed(lim: VerifyLimits, parity: CheckResult,
                                  envelope: CheckResult, closed: CheckResult) -> None:
    same = [WalkParams(m, n, Layout.SAME) for m in (2, 3, 4, 7) for n in (1, 2, 5)]
    for p in _sweep_params(lim) + same:
        f = simulate_fidelities(p, lim.sweep_steps)
        wrong = 1 if p.layout is Layout.SAME else 0
        parity.record(np.max(np.abs(f[wrong::2])), p)
        if p.layout is Layout.OPPOSITE:
            envelope.record(max(0.0, np.max(f) - fmax_opposite(p.m, p.n)), p)
            cf = [fidelity_closed_form(p.m, p.n, s) for s in range(1, lim.sweep_steps + 1, 2)]
            closed.record(np.max(np.abs(f[1::2] - cf)), p)


def _two_step_matrix(model) -> NDArray[np.complex128]:
    op = StepOperator(model.params)
    images = [op(op(b)) for b in model.basis]
    return np.array([[b.inner(img) for img in images] for b in model.basis])


def _reduced_models(lim: VerifyLimits):
    for m in range(2, lim.reduced_max + 1):
        for n in range(1, lim.reduced_max + 1):
            yield build_reduced(WalkParams(m, n, Layout.SAME))
            if n >= 2:
                yield build_reduced_opposite(m, n)


def _check_reduced(lim: VerifyLimits, entries: CheckResult, invariance: CheckResult,
                   orthonormal: CheckResult) -> None:
    for model in _reduced_models(lim):
        entries.record(np.max(np.abs(_two_step_matrix(model) - model.matrix)), model.params)
        gram = np.array([[a.inner(b) for b in model.basis] for a in model.basis])
        orthonormal.record(np.max(np.abs(gram - np.eye(model.dim))), model.params)
        op = StepOperator(model.params)
        worst = 0.0
        for b in model.basis:
            img = op(op(b))
            coords = [c.inner(img) for c in model.basis]
            outside = img.to_vector() - model.embed(coords).to_vector()
            worst = max(worst, np.linalg.norm(outside))
        invariance.record(worst, model.params)


def _check_spectral(lim: VerifyLimits, res: CheckResult) -> None:
    for m in range(2, lim.spectral_max + 1):
        for n in range(2, lim.spectral_max + 1):
            model = build_reduced_opposite(m, n)
            res.record(np.max(spectral_opposite(m, n).residuals(model.matrix)), (m, n))


def _check_n_independence(lim: VerifyLimits, res: CheckResult) -> None:
    for m in lim.n_independence_m:
        curves = [simulate_fidelities(WalkParams(m, n, Layout.SAME), lim.n_independence_steps)
                  for n in lim.n_independence_n]
        ref = curves[0]
        for n, f in zip(lim.n_independence_n[1:], curves[1:]):
            res.record(np.max(np.abs(f[::2] - ref[::2])), f"m={m} n={n}")


def _check_marked_placement(lim: VerifyLimits, res: CheckResult) -> None:
    for m, n in ((3, 2), (4, 3), (2, 5), (5, 4)):
        for layout in Layout:
            base = simulate_fidelities(WalkParams(m, n, layout), 40)
            receivers = range(1, (m if layout is Layout.SAME else n) + 1)
            for s in range(1, m + 1):
                for r in receivers:
                    if layout is Layout.SAME and r == s:
                        continue
                    f = simulate_fidelities(WalkParams(m, n, layout, s, r), 40)
                    res.record(np.max(np.abs(f - base)), (m, n, layout.value, s, r))


def verify(limits: Optional[VerifyLimits] = None,
           progress: Optional[Callable[[str], None]] = None) -> VerificationReport:
    """
    Run the cross-validation battery. Failures are reported, never raised.
    """
    lim = limits or VerifyLimits()
    rng = np.random.default_rng(lim.seed)
    c = {name: CheckResult(name, tol) for name, tol in (
        ("dense_unitarity", 1e-12),
        ("oracle_equivalence", 1e-12),
        ("norm_preservation", 1e-9),
        ("grover_involution", 1e-14),
        ("shift_adjointness", 1e-15),
        ("bipartite_parity", 0.0),
        ("fmax_dominance", 1e-12),
        ("closed_form_agreement", 1e-10),
        ("reduced_matrix_entries", 1e-12),
        ("basis_orthonormality", 1e-12),
        ("subspace_invariance", 1e-12),
        ("eigen_residuals", 1e-12),
        ("same_part_n_independence", 1e-12),
        ("marked_vertex_independence", 1e-12),
    )}
    tasks = [
        (("dense_unitarity", "oracle_equivalence"), lambda: _check_oracle(
            lim, c["dense_unitarity"], c["oracle_equivalence"])),
        (("norm_preservation",), lambda: _check_norm(lim, c["norm_preservation"], rng)),
        (("grover_involution",), lambda: _check_grover(lim, c["grover_involution"], rng)),
        (("shift_adjointness",), lambda: _check_shift(lim, c["shift_adjointness"], rng)),
        (("bipartite_parity", "fmax_dominance", "closed_form_agreement"),
         lambda: _check_parity_envelope_closed(
             lim, c["bipartite_parity"], c["fmax_dominance"], c["closed_form_agreement"])),
        (("reduced_matrix_entries", "subspace_invariance", "basis_orthonormality"),
         lambda: _check_reduced(lim, c["reduced_matrix_entries"], c["subspace_invariance"],
                                c["basis_orthonormality"])),
        (("eigen_residuals",), lambda: _check_spectral(lim, c["eigen_residuals"])),
        (("same_part_n_independence",), lambda: _check_n_independence(
            lim, c["same_part_n_independence"])),
        (("marked_vertex_independence",), lambda: _check_marked_placement(
            lim, c["marked_vertex_independence"])),
    ]
    for names, task in tasks:
        if progress:
            progress(", ".join(names))
        t0 = time.perf_counter()
        task()
        dt = time.perf_counter() - t0
        for name in names:
            c[name].seconds = dt
    report = VerificationReport(list(c.values()))
    for check in report.checks:
        log.info("%-28s %s worst=%.3e tol=%.0e", check.name,
                 "PASS" if check.passed else "FAIL", check.worst, check.tolerance)
    return report
