"""
Exit criteria. Each test carries an ``acceptance`` marker; the conftest hook
prints one PASS/FAIL line per criterion at the end of the run.
"""

import json
import math
import time

import numpy as np
import pytest

from bipartite_walk import (
    StepOperator,
    WalkParams,
    build_dense,
    build_reduced,
    fidelity_closed_form,
    fmax_opposite,
    initial_state,
    spectral_opposite,
    transfer_time,
)
from bipartite_walk.analysis import simulate_fidelities
from bipartite_walk.cli import run
from bipartite_walk.reduced import nearest_even, star_transfer_time


def two_step_matrix(model):
    op = StepOperator(model.params)
    images = [op(op(b)) for b in model.basis]
    return np.array([[b.inner(img) for img in images] for b in model.basis])


@pytest.mark.acceptance("1 Fig. 1: K_{100,100} peak at 23, F(23) = closed form, F_max = 1")
def test_fig1_reproduction(record_property):
    t0 = time.perf_counter()
    f = simulate_fidelities(WalkParams(100, 100, "opposite"), 60)
    peak = int(np.argmax(f[1:])) + 1
    closed = fidelity_closed_form(100, 100, 23)
    fmax = fmax_opposite(100, 100)
    elapsed = time.perf_counter() - t0
    record_property("detail", f"peak={peak} F(23)={f[23]:.12f} |diff|={abs(f[23] - closed):.1e} "
                              f"Fmax={fmax!r} t={elapsed:.3f}s")
    assert peak == 23
    assert abs(f[23] - closed) <= 1e-10
    assert fmax == 1.0
    assert elapsed < 1.0


@pytest.mark.acceptance("2 Fig. 2: K_{100,50} peak at 19, F_max = 0.8873 +- 5e-4, F(19) = closed form")
def test_fig2_reproduction(record_property):
    t0 = time.perf_counter()
    f = simulate_fidelities(WalkParams(100, 50, "opposite"), 60)
    odd = f[1::2]
    first = next(k for k in range(len(odd) - 1)
                 if odd[k] >= odd[k + 1] and (k == 0 or odd[k] >= odd[k - 1]))
    first_peak = 2 * first + 1
    # step 19 is also the global maximum over more than one revival period
    global_54 = int(np.argmax(f[1:55])) + 1
    fmax = fmax_opposite(100, 50)
    closed = fidelity_closed_form(100, 50, 19)
    elapsed = time.perf_counter() - t0
    record_property("detail", f"first peak={first_peak} argmax(1..54)={global_54} Fmax={fmax:.6f} "
                              f"|diff|={abs(f[19] - closed):.1e} t={elapsed:.3f}s")
    assert first_peak == 19
    assert global_54 == 19
    assert abs(fmax - 0.8873) <= 0.0005
    assert abs(f[19] - closed) <= 1e-10
    assert elapsed < 1.0


@pytest.mark.acceptance("3 T-formula: scan peak over 1..200 within +-2 of T_opt for (m,n) in {2..12}^2")
def test_t_formula_validation(record_property):
    t0 = time.perf_counter()
    bad = []
    for m in range(2, 13):
        for n in range(2, 13):
            p = WalkParams(m, n, "opposite")
            t_opt = transfer_time(p).T_opt
            f = simulate_fidelities(p, 200)
            peak = int(np.argmax(f[1:])) + 1
            if abs(peak - t_opt) > 2 or f[peak] < f[t_opt] - 1e-12:
                bad.append((m, n, t_opt, peak))
    elapsed = time.perf_counter() - t0
    record_property("detail", f"{121 - len(bad)}/121 pairs pass; first offenders (m,n,T_opt,peak): "
                              f"{bad[:4]} t={elapsed:.2f}s")
    assert elapsed < 10.0
    assert not bad, f"{len(bad)} of 121 pairs have their 1..200 maximum away from T_opt: {bad[:10]}"


@pytest.mark.acceptance("4 Same part: even-step curves independent of n")
def test_same_part_n_independence(record_property):
    t0 = time.perf_counter()
    worst = 0.0
    for m in (3, 5, 10, 100):
        curves = [simulate_fidelities(WalkParams(m, n, "same"), 60) for n in (1, 2, 7, 50)]
        for c in curves[1:]:
            worst = max(worst, np.max(np.abs(c[::2] - curves[0][::2])))
    elapsed = time.perf_counter() - t0
    record_property("detail", f"worst={worst:.1e} t={elapsed:.2f}s")
    assert worst <= 1e-12
    assert elapsed < 5.0


@pytest.mark.acceptance("5 Star graph K_{m,1}: transfer at nearest even 2pi/arccos((m-4)/m)")
def test_star_graph_transfer(record_property):
    t0 = time.perf_counter()
    got = {}
    for m in (2, 4, 5, 20, 100):
        steps = nearest_even(star_transfer_time(m))
        got[m] = (steps, simulate_fidelities(WalkParams(m, 1, "same"), steps)[steps])
    elapsed = time.perf_counter() - t0
    record_property("detail", " ".join(f"m={m}:T={s},F={f:.6f}" for m, (s, f) in got.items())
                    + f" t={elapsed:.3f}s")
    for m in (2, 4):
        assert abs(got[m][1] - 1.0) <= 1e-12
    for m in (20, 100):
        assert got[m][1] > 0.99
    assert elapsed < 1.0


@pytest.mark.acceptance("6 Oracle equivalence for m*n <= 36, both layouts, 50 steps")
def test_oracle_equivalence(record_property):
    t0 = time.perf_counter()
    worst_step, worst_unitary, cases = 0.0, 0.0, 0
    for m in range(1, 37):
        for n in range(1, 36 // m + 1):
            for layout in ("same", "opposite"):
                if layout == "same" and m < 2:
                    continue
                p = WalkParams(m, n, layout)
                dense = build_dense(p)
                worst_unitary = max(worst_unitary, dense.unitarity_residual())
                ref = dense.trajectory(dense.initial_vector(), 50)
                op, psi = StepOperator(p), initial_state(p)
                for t in range(1, 51):
                    psi = op(psi)
                    worst_step = max(worst_step, np.max(np.abs(psi.to_vector() - ref[t])))
                cases += 1
    elapsed = time.perf_counter() - t0
    record_property("detail", f"{cases} instances, step diff={worst_step:.1e}, "
                              f"unitarity={worst_unitary:.1e}, t={elapsed:.2f}s")
    assert worst_step <= 1e-12
    assert worst_unitary <= 1e-12
    assert elapsed < 30.0


@pytest.mark.acceptance("7 Reduced matrices rebuilt from walk steps; eigen-residuals")
def test_reduced_matrices(record_property):
    worst_entry, worst_eig, cases = 0.0, 0.0, 0
    for m in range(2, 11):
        for n in range(2, 11):
            for layout in ("same", "opposite"):
                model = build_reduced(WalkParams(m, n, layout))
                worst_entry = max(worst_entry, np.max(np.abs(two_step_matrix(model) - model.matrix)))
                cases += 1
            model = build_reduced(WalkParams(m, n, "opposite"))
            worst_eig = max(worst_eig, np.max(spectral_opposite(m, n).residuals(model.matrix)))
    record_property("detail", f"{cases} models, entry diff={worst_entry:.1e}, eigen residual={worst_eig:.1e}")
    assert worst_entry <= 1e-12
    assert worst_eig < 1e-12


@pytest.mark.acceptance("8 Invariant suite green under the verify command")
def test_verify_command(tmp_path, record_property):
    out = tmp_path / "verify.json"
    status = run(["verify", "--out", str(out), "--quiet"])
    doc = json.loads(out.read_text())
    checks = {c["name"]: c for c in doc["checks"]}
    record_property("detail", f"exit={status}; " + ", ".join(
        f"{k}={'ok' if c['passed'] else 'FAIL'}" for k, c in checks.items()))
    assert status == 0 and doc["passed"]
    for name in ("norm_preservation", "grover_involution", "shift_adjointness",
                 "bipartite_parity", "fmax_dominance"):
        assert checks[name]["passed"] and checks[name]["cases"] > 0
    assert checks["norm_preservation"]["worst_residual"] < 1e-9
    assert checks["bipartite_parity"]["worst_residual"] == 0.0


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
