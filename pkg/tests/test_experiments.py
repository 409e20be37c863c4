import json
import math

import numpy as np
import pytest

from faultcontain.engine import run
from faultcontain.experiments import (
    fit_log2, measure_radius, pooled, run_scenarios, run_trials, stabilization_profile, summarize,
    write_csv, write_json, ProfileRow,
)
from faultcontain.faults import MemoryCorruption, legitimate_config, star_coloring, worst_case_scenarios
from faultcontain.graph import gnp, path, star
from faultcontain.protocols import A1, ACOL
from faultcontain.rng import Streams


def test_summarize_matches_numpy():
    rng = np.random.default_rng(0)
    x = rng.geometric(0.3, size=5000)
    s = summarize(x)
    assert s.mean == pytest.approx(x.mean(), rel=1e-12)
    assert s.variance == pytest.approx(x.var(ddof=1), rel=1e-12)
    assert s.se == pytest.approx(x.std(ddof=1) / math.sqrt(x.size), rel=1e-12)
    assert s.min <= s.mean <= s.max
    assert sum(s.histogram.values()) == x.size


def test_variance_standard_error_is_calibrated():
    # spread of sample variances across replicates should match se_variance
    rng = np.random.default_rng(1)
    reps = [rng.geometric(0.5, size=400) for _ in range(400)]
    variances = np.array([r.var(ddof=1) for r in reps])
    predicted = np.mean([summarize(r).se_variance for r in reps])
    assert predicted == pytest.approx(variances.std(ddof=1), rel=0.15)


def test_measure_radius():
    g = path(6)
    assert measure_radius(set(), g, 2) == 0
    assert measure_radius({2}, g, 2) == 0
    assert measure_radius({1, 2, 5}, g, 2) == 3


def test_radius_from_trace():
    g, cfg = star(3), star_coloring(3)
    sc = worst_case_scenarios(g, cfg, 0)["broadcast_true"]
    res = run(g, cfg, ACOL, sc, rng=Streams(0))
    assert measure_radius(res.trace, g, 0) == 1


def test_run_trials_is_deterministic_and_engine_independent():
    g = gnp(25, 0.2, 2)
    cfg = legitimate_config(g, ACOL, 1)
    sc = worst_case_scenarios(g, cfg, 3)["memory_c"]
    a = run_trials(g, ACOL, sc, 300, 17, cfg)
    b = run_trials(g, ACOL, sc, 300, 17, cfg, engine="scalar")
    assert a.to_dict() == b.to_dict()
    assert run_trials(g, ACOL, sc, 300, 17, cfg).to_json() == a.to_json()


def test_run_scenarios_matches_individual_runs():
    g, cfg = star(4), star_coloring(4)
    scen = list(worst_case_scenarios(g, cfg, 0).values())
    together = run_scenarios(g, ACOL, scen, 50, 3, cfg)
    from faultcontain.rng import derive

    for i, (sc, s) in enumerate(zip(scen, together)):
        assert s.to_dict() == run_trials(g, ACOL, sc, 50, derive(3, i), cfg).to_dict()


def test_divergences_are_counted():
    g = gnp(40, 0.3, 1)
    s = run_trials(g, ACOL, None, 20, 0, max_rounds=2)
    assert s.divergences > 0
    assert s.trials == 20
    assert s["rounds_to_legitimate"].n == 20 - s.divergences


def test_result_invariants():
    g = gnp(30, 0.2, 5)
    cfg = legitimate_config(g, ACOL, 2)
    for sc in worst_case_scenarios(g, cfg, 4).values():
        s = run_trials(g, ACOL, sc, 100, 1, cfg, keep_results=True)
        for r in s.results:
            assert r.rounds_to_legal <= r.rounds_to_legitimate
            assert (r.radius == 0) == (r.contaminated <= {4})


def test_outputs(tmp_path):
    g, cfg = star(2), star_coloring(2)
    sums = [run_trials(g, ACOL, sc, 40, 1, cfg) for sc in worst_case_scenarios(g, cfg, 0).values()]
    write_csv(sums, tmp_path / "s.csv")
    lines = (tmp_path / "s.csv").read_bytes().split(b"\n")
    assert lines[0] == b"# format=1"
    assert lines[1].startswith(b"protocol,scenario,")
    assert b"\r" not in (tmp_path / "s.csv").read_bytes()
    write_json(sums, tmp_path / "s.json")
    doc = json.loads((tmp_path / "s.json").read_text())
    assert doc["format"] == 1 and len(doc["summaries"]) == 5
    p = pooled(sums, "rounds_to_legitimate")
    assert p.n == 200


def test_a1_profile_converges():
    rows = stabilization_profile(A1, [16, 64], 20, 3)
    assert all(r.divergences == 0 for r in rows)


def test_fit_log2_exact():
    rows = [ProfileRow(n, 1, 3 * math.log2(n), 0, 0, 0) for n in (16, 64, 256)]
    c, resid = fit_log2(rows)
    assert c == pytest.approx(3.0)
    assert resid == pytest.approx(0.0, abs=1e-12)
