import json
import math

import pytest

from bgpc import harness
from bgpc.harness import ExperimentSpec, run_experiment, run_trial, summary_csv, trials_csv, write_csv

from conftest import success_rates

SMALL = dict(base=dict(n=16, m=4, N=4, signal="dense", seed=3), axes=[["m", [2, 4]]], trials=3, solver="pi")


def small(**kw):
    d = json.loads(json.dumps(SMALL))
    d.update(kw)
    return ExperimentSpec.from_dict(d)


def test_one_trial_one_record_per_cell():
    res = run_experiment(small(trials=1, axes=[["m", [2, 3, 4]], ["N", [2, 3]]]))
    assert len(res.records) == 6
    assert sorted(r.cell for r in res.records) == list(range(6))


def test_rate_is_fraction_of_successes():
    res = run_experiment(small())
    for c, cell in enumerate(res.cells):
        recs = [r for r in res.records if r.cell == c]
        assert cell.success_rate == sum(r.success for r in recs) / len(recs)
        for r in recs:
            assert r.success == (r.rsnr_db > 30.0)


def test_run_twice_identical():
    a = run_experiment(small())
    b = run_experiment(small())
    assert summary_csv(a) == summary_csv(b)
    assert trials_csv(a, timing=False) == trials_csv(b, timing=False)


def test_worker_count_invariance():
    spec = small(axes=[["m", [2, 4]], ["N", [2, 4]]])
    a = run_experiment(spec, workers=1)
    b = run_experiment(spec, workers=3)
    assert summary_csv(a) == summary_csv(b)
    assert trials_csv(a, timing=False) == trials_csv(b, timing=False)


def test_trial_is_reproducible_in_isolation():
    spec = small()
    res = run_experiment(spec)
    r = run_trial(spec, 1, 2)
    ref = next(x for x in res.records if x.cell == 1 and x.trial == 2)
    assert (r.seed, r.rsnr_db, r.iterations) == (ref.seed, ref.rsnr_db, ref.iterations)


def test_solver_errors_become_tagged_failures():
    # least squares needs n > m; every trial fails but the sweep completes
    res = run_experiment(small(solver="ls", axes=[["m", [16, 20]]]))
    assert all(not r.success and "n > m" in r.reason for r in res.records)
    assert all(r.rsnr_db == -math.inf for r in res.records)
    assert "-inf" in trials_csv(res)


def test_couplings_and_s1_rule():
    spec = ExperimentSpec(base=dict(n=8, m=16, N=4, s0=2, signal="sparse"), axes=[["s0", [2, 3]]], trials=1,
                          solver="tpi", couplings={"n": "4*s0", "m": "2*n"}, init="phases")
    p = harness.cell_params(spec, spec.cells()[1])
    assert (p["n"], p["m"]) == (12, 24)
    assert harness._s1(spec, p, p["m"]) == 6


def test_summary_csv_format(tmp_path):
    res = run_experiment(small(axes=[["sigma_w", [0.0, 0.1]]], trials=3))
    text = summary_csv(res)
    lines = text.splitlines()
    assert lines[0] == "axis1,success_rate,trials"
    assert lines[1].startswith("0,") and lines[2].startswith("0.1,")
    res2 = run_experiment(small(trials=3, axes=[["m", [2]], ["N", [3]]]))
    assert summary_csv(res2).splitlines()[0] == "axis1,axis2,success_rate,trials"
    out, side = write_csv(res, tmp_path / "r.csv")
    assert out.read_text() == text
    assert side.name == "r.trials.csv"
    assert side.read_text().splitlines()[0].split(",") == list(harness.TRIAL_COLUMNS)


def test_six_significant_digits():
    assert harness._g(1 / 3) == "0.333333"
    assert harness._g(math.inf) == "inf"
    assert harness._g(12345678.9) == "1.23457e+07"


def test_spec_json_roundtrip(tmp_path):
    spec = small(couplings={"n": "4*m"}, init="corrupted:0.5")
    harness.save_spec(spec, tmp_path / "s.json")
    loaded = harness.load_spec(tmp_path / "s.json")
    assert loaded == spec
    assert json.loads((tmp_path / "s.json").read_text())["schema"] == 1


@pytest.mark.parametrize("patch", [{"schema": 2}, {"bogus": 1}, {"axes": []}, {"axes": [["q", [1]]]},
                                   {"solver": "svd"}, {"init": "random"}, {"trials": 0},
                                   {"axes": [["m", [1]], ["n", [1]], ["N", [1]]]}])
def test_spec_validation(patch):
    d = small().to_dict()
    d.update(patch)
    with pytest.raises(ValueError):
        ExperimentSpec.from_dict(d)


def test_phase_transition_needs_two_axes():
    with pytest.raises(ValueError):
        harness.phase_transition(small())


def test_degenerate_grid_matches_run_experiment():
    spec = small(axes=[["m", [4]], ["N", [4]]])
    pt = harness.phase_transition(spec)
    one = run_experiment(small(axes=[["m", [4]]]))
    assert pt.cells[0].success_rate == one.cells[0].success_rate
    assert [r.rsnr_db for r in pt.records] != []


def test_presets_build():
    for name in harness.PRESETS:
        spec = harness.preset(name)
        assert spec.trials == 20
        assert harness.preset(name, full=True).trials == 100


@pytest.mark.slow
def test_pi_subspace_sweep():
    rates, _ = success_rates(dict(n=128, m=32, N=16, signal="dense"), "m", [8, 16, 32], 20)
    assert all(v == 1.0 for v in rates.values()), rates


@pytest.mark.slow
def test_pi_noisy_m48_fails():
    rates, _ = success_rates(dict(n=128, m=48, N=16, sigma_w=0.1, signal="dense"), "m", [48], 20)
    assert rates[48] <= 0.05, rates


@pytest.mark.slow
def test_success_rate_trend_in_m():
    rates, _ = success_rates(dict(n=128, m=16, N=16, signal="dense"), "m", [16, 56], 50)
    assert rates[16] >= rates[56]


@pytest.mark.slow
def test_subspace_grid_cell():
    spec = ExperimentSpec(base=dict(n=128, m=32, N=16, signal="dense"), axes=[["m", [32]], ["n", [128]]], trials=20)
    assert harness.phase_transition(spec).cells[0].success_rate == 1.0


@pytest.mark.slow
def test_alg3_grid_cell():
    spec = ExperimentSpec(base=dict(n=256, m=512, N=32, s0=20, sigma_w=0.1, signal="sparse"),
                          axes=[["s0", [20]], ["n", [256]]], couplings={"m": "2*n"}, trials=20,
                          solver="tpi", init="alg3")
    assert harness.phase_transition(spec).cells[0].success_rate == 1.0
