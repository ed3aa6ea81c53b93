import numpy as np
import pytest

from bipartite_walk import (
    Source,
    UnsupportedSourceError,
    VerifyLimits,
    WalkParams,
    curve,
    find_peak,
    fmax_opposite,
    sweep_fmax,
    transfer_time,
    verify,
)
from bipartite_walk.analysis import scan_peak, simulate_fidelities, write_curves_csv


class TestCurve:
    def test_k100_100_sources_agree(self):
        full, closed = curve(WalkParams(100, 100), 60, ["full", "closed-form"])
        assert full.source is Source.FULL_SIMULATION and closed.source is Source.CLOSED_FORM
        np.testing.assert_array_equal(full.steps, np.arange(1, 61))
        assert np.max(np.abs(full.fidelities - closed.fidelities)) < 1e-10
        assert find_peak(full).global_step == 23

    def test_k100_50_first_peak(self):
        (full,) = curve(WalkParams(100, 50), 60)
        peak = find_peak(full)
        assert peak.first_step == 19
        # the second revival overtakes the first inside 60 steps
        assert peak.global_step == 55

    @pytest.mark.parametrize("layout", ["same", "opposite"])
    def test_reduced_matches_full_k55(self, layout):
        full, red = curve(WalkParams(5, 5, layout), 80, [Source.FULL_SIMULATION, Source.REDUCED_MATRIX])
        assert np.max(np.abs(full.fidelities - red.fidelities)) < 1e-12

    def test_closed_form_same_rejected(self):
        with pytest.raises(UnsupportedSourceError):
            curve(WalkParams(4, 3, "same"), 10, ["closed-form"])

    @pytest.mark.parametrize("layout, wrong", [("same", 1), ("opposite", 0)])
    def test_parity_exact_zeros(self, layout, wrong):
        for c in curve(WalkParams(6, 5, layout), 50, ["full", "reduced"]):
            vals = c.fidelities[c.steps % 2 == wrong]
            assert np.all(vals == 0.0)
            assert np.all((c.fidelities >= 0) & (c.fidelities <= 1 + 1e-12))

    def test_deterministic(self):
        a = write_curves_csv(curve(WalkParams(9, 4), 40, ["full", "reduced", "closed-form"]))
        b = write_curves_csv(curve(WalkParams(9, 4), 40, ["full", "reduced", "closed-form"]))
        assert a == b

    def test_envelope(self):
        for m, n in [(3, 8), (12, 2), (7, 7)]:
            (c,) = curve(WalkParams(m, n), 200)
            assert c.fidelities.max() <= fmax_opposite(m, n) + 1e-12

    def test_csv_header(self):
        (c,) = curve(WalkParams(2, 2), 3)
        lines = write_curves_csv([c]).splitlines()
        assert lines[0] == "step,fidelity,source"
        assert lines[2] == "2,0.0,full"
        parsed = [(int(s), float(f)) for s, f, _ in (line.split(",") for line in lines[1:])]
        assert parsed == c.points

    def test_at(self):
        (c,) = curve(WalkParams(2, 2), 5)
        assert c.at(1) == pytest.approx(0.25)
        with pytest.raises(KeyError):
            c.at(9)


class TestPeak:
    @pytest.mark.parametrize("m", range(2, 13))
    @pytest.mark.parametrize("n", range(2, 13))
    def test_first_peak_brackets_t_opt(self, m, n):
        p = WalkParams(m, n)
        r = transfer_time(p)
        peak = find_peak(curve(p, 200)[0])
        assert abs(peak.first_step - r.T_opt) <= 2
        assert peak.first_value >= r.F_at_T - 1e-12

    def test_scan_window_default(self):
        peak = scan_peak(WalkParams(100, 100))
        assert peak.first_step == 23

    def test_same_part_peak(self):
        peak = find_peak(curve(WalkParams(4, 9, "same"), 20)[0])
        assert peak.first_step == 4 and peak.first_value == pytest.approx(1.0, abs=1e-12)


class TestSweep:
    def test_diagonal_and_symmetry(self):
        g = sweep_fmax(range(2, 21), range(2, 21))
        assert np.all(np.diag(g.fmax) == 1.0)
        np.testing.assert_array_equal(g.fmax, g.fmax.T)

    def test_fig4_slice(self):
        g = sweep_fmax([100], range(2, 201))
        row = g.fmax[0]
        assert g.n_values[int(np.argmax(row))] == 100
        assert row[g.n_values.index(50)] == pytest.approx(0.8873, abs=5e-4)
        assert np.all(np.diff(row[g.n_values.index(100):]) < 0)

    def test_csv_layout(self):
        lines = sweep_fmax([2, 3], [2, 3, 4]).to_csv().splitlines()
        assert lines[0] == "m\\n,2,3,4"
        assert lines[1].startswith("2,1.0,")
        assert len(lines) == 3

    @pytest.mark.parametrize("ms, ns", [([], [2]), ([1, 2], [2])])
    def test_invalid(self, ms, ns):
        with pytest.raises(ValueError):
            sweep_fmax(ms, ns)


class TestVerify:
    def test_small_limits_pass(self):
        lim = VerifyLimits(max_oracle_size=8, norm_steps=200, reduced_max=5, spectral_max=5,
                           sweep_max=5, sweep_steps=60, n_independence_m=(3, 5))
        report = verify(lim)
        assert report.passed, report.to_dict()
        assert report["dense_unitarity"].cases > 0
        d = report.to_dict()
        assert {c["name"] for c in d["checks"]} >= {
            "oracle_equivalence", "norm_preservation", "grover_involution", "shift_adjointness",
            "bipartite_parity", "fmax_dominance", "subspace_invariance", "eigen_residuals",
            "same_part_n_independence"}

    def test_failures_are_reported(self):
        from bipartite_walk.analysis import CheckResult
        c = CheckResult("demo", 1e-12)
        c.record(1e-3, "bad case")
        c.record(0.0, "good case")
        assert not c.passed and c.worst == 1e-3 and c.cases == 2
