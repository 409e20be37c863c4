import itertools

import pytest

from faultcontain.engine import run
from faultcontain.errors import ContractError
from faultcontain.faults import (
    KEEP, BroadcastCorruption, MemoryCorruption, legitimate_config, memory_sweep_scenarios,
    n_conf, staircase_a2_config, star_coloring, worst_case_scenarios,
)
from faultcontain.graph import complete, gnp, independent_degree, staircase, star, unit_disc
from faultcontain.protocols import A1, A2, ACOL, ColorState
from faultcontain.rng import Streams


def test_legitimate_config_examples():
    cfg = legitimate_config(star(4), ACOL, 1)
    assert ACOL.is_legitimate(star(4), cfg)
    assert cfg.states[0].c <= 4
    k3 = legitimate_config(complete(3), ACOL, 2)
    assert sorted(s.c for s in k3.states) == [0, 1, 2]
    g = gnp(50, 0.1, 3)
    assert A1.is_legitimate(g, legitimate_config(g, A1, 4))


def test_n_conf_examples():
    g, cfg = star(3), star_coloring(3)
    assert n_conf(g, cfg, 0, 0).members == {1, 2, 3}
    assert len(n_conf(g, cfg, 0, 2)) == 0


def test_n_conf_rejects_adjacent_members():
    with pytest.raises(ContractError):
        n_conf(complete(3), [ColorState(0, True)] * 3, 0, 0)


def test_n_conf_bounded_by_independent_degree():
    g, _ = unit_disc(120, 0.12, 4)
    cfg = legitimate_config(g, ACOL, 5)
    for v in range(g.n):
        di = independent_degree(g, v)
        for c in range(g.degree(v) + 2):
            assert len(n_conf(g, cfg, v, c)) <= di


def test_worst_case_on_star():
    g, cfg = star(4), star_coloring(4)
    sc = worst_case_scenarios(g, cfg, 0)
    assert sc["broadcast_true"] == BroadcastCorruption(0, ColorState(0, True))
    assert sc["memory_c"].corrupt(cfg.states[0]) == ColorState(0, True)
    assert sc["memory_final"].corrupt(cfg.states[0]) == ColorState(1, False)
    assert sc["memory_both"].corrupt(cfg.states[0]) == ColorState(0, False)


def test_worst_case_ties_break_to_smallest_color():
    g = star(4)
    states = [ColorState(4, True), ColorState(2, True), ColorState(2, True),
              ColorState(1, True), ColorState(1, True)]
    assert worst_case_scenarios(g, states, 0)["broadcast_true"].payload.c == 1


def test_false_broadcast_has_no_effect():
    g, cfg = star(5), star_coloring(5)
    sc = worst_case_scenarios(g, cfg, 0)["broadcast_false"]
    for t in range(50):
        res = run(g, cfg, ACOL, sc, rng=Streams.for_trial(0, t))
        assert res.trace.contaminated() == set()
        assert res.rounds_to_legitimate == 0


def test_memory_sweep_covers_repair_branch():
    g, cfg = star(3), star_coloring(3)
    sweep = memory_sweep_scenarios(g, cfg, 1)
    values = {(s.new_c, s.new_final if s.new_final is not KEEP else "keep") for s in sweep}
    assert (2, "keep") in values  # degree + 1
    assert (None, False) in values
    assert (0, "keep") not in values  # the no-op
    assert len(sweep) == 2 * 4 - 1


def test_corrupt_requires_matching_state():
    with pytest.raises(ContractError):
        MemoryCorruption(0, new_c=1).corrupt(3)
    assert MemoryCorruption(0, new_state=2).corrupt(3) == 2


def test_staircase_config_is_legitimate_for_a2():
    for delta in range(2, 8):
        assert A2.is_legitimate(staircase(delta), staircase_a2_config(delta))
