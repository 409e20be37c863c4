import numpy as np
import pytest

from faultcontain import batch
from faultcontain.engine import random_config, run
from faultcontain.faults import (
    BroadcastCorruption, MemoryCorruption, legitimate_config, memory_sweep_scenarios,
    star_coloring, worst_case_scenarios,
)
from faultcontain.graph import gnp, hub_over, path, star, unit_disc
from faultcontain.protocols import ACOL, ColorState
from faultcontain.rng import Streams, trial_keys


def scalar_rows(g, cfg, scenario, keys, max_rounds=10_000):
    out = []
    for k in keys:
        rng = Streams(int(k))
        start = cfg if cfg is not None else random_config(g, ACOL, rng)
        try:
            r = run(g, start, ACOL, scenario, max_rounds=max_rounds, rng=rng)
        except Exception:
            out.append(None)
            continue
        out.append((r.rounds_to_legal, r.rounds_to_legitimate, r.trace.contaminated()))
    return out


def batch_rows(g, cfg, scenario, keys, max_rounds=10_000):
    if cfg is None:
        c0, f0 = batch.random_states(g, keys)
    else:
        c0, f0 = batch.encode(cfg)
    fa = batch.FaultArrays.from_scenarios([scenario] * len(keys))
    res = batch.run_batch(g, c0, f0, keys, fa, max_rounds=max_rounds)
    return [
        None if res.diverged[i] else
        (int(res.rounds_to_legal[i]), int(res.rounds_to_legitimate[i]),
         set(np.flatnonzero(res.contaminated[i]).tolist()))
        for i in range(len(keys))
    ]


def test_random_states_match_scalar():
    g = gnp(30, 0.2, 1)
    keys = trial_keys(5, np.arange(20))
    c, f = batch.random_states(g, keys)
    for i, k in enumerate(keys):
        cfg = random_config(g, ACOL, Streams(int(k)))
        assert batch.encode(cfg)[0].tolist() == c[i].tolist()
        assert batch.encode(cfg)[1].tolist() == f[i].tolist()


@pytest.mark.parametrize("g", [star(1), star(6), path(7), hub_over(path(5)), gnp(35, 0.15, 2),
                               unit_disc(50, 0.25, 3)[0]])
def test_batch_matches_scalar_engine(g):
    keys = trial_keys(9, np.arange(40))
    assert batch_rows(g, None, None, keys) == scalar_rows(g, None, None, keys)
    cfg = legitimate_config(g, ACOL, 1)
    for v in range(0, g.n, max(1, g.n // 4)):
        scen = list(worst_case_scenarios(g, cfg, v, injection_round=v % 2).values())
        scen += memory_sweep_scenarios(g, cfg, v)[:4]
        for s in scen:
            assert batch_rows(g, cfg, s, keys) == scalar_rows(g, cfg, s, keys), s


def test_batch_divergence_matches_scalar():
    g = gnp(40, 0.3, 4)
    keys = trial_keys(1, np.arange(10))
    assert batch_rows(g, None, None, keys, max_rounds=2) == scalar_rows(g, None, None, keys, max_rounds=2)


def test_out_of_range_broadcast_payload():
    g, cfg = star(3), star_coloring(3)
    keys = trial_keys(2, np.arange(30))
    for s in (BroadcastCorruption(0, ColorState(9, True)), BroadcastCorruption(0, ColorState(None, True)),
              MemoryCorruption(1, new_c=7)):
        assert batch_rows(g, cfg, s, keys) == scalar_rows(g, cfg, s, keys)


def test_mixed_fault_rows_and_chunking(monkeypatch):
    monkeypatch.setattr(batch, "_CELL_BUDGET", 64)
    g = gnp(20, 0.25, 6)
    cfg = legitimate_config(g, ACOL, 3)
    scen = [None if v % 5 == 0 else worst_case_scenarios(g, cfg, v)["memory_both"] for v in range(g.n)]
    keys = trial_keys(4, np.arange(g.n))
    c0, f0 = batch.encode(cfg)
    res = batch.run_batch(g, c0, f0, keys, batch.FaultArrays.from_scenarios(scen))
    for i, s in enumerate(scen):
        want = scalar_rows(g, cfg, s, keys[i:i + 1])[0]
        got = (int(res.rounds_to_legal[i]), int(res.rounds_to_legitimate[i]),
               set(np.flatnonzero(res.contaminated[i]).tolist()))
        assert got == want
