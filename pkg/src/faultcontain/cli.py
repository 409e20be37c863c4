"""Command line front-end.

Exit codes: 0 success, 1 invariant or acceptance violation, 2 usage or
configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from pathlib import Path

from . import experiments as ex
from . import markov
from .config import build_graph, graph_params, load_config
from .errors import (
    CapacityError, ConfigError, ContractError, DivergenceError, FaultContainError, ParameterError,
)
from .faults import (
    KEEP, BroadcastCorruption, MemoryCorruption, legitimate_config, memory_sweep_scenarios,
    staircase_a2_config, star_coloring, worst_case_scenarios,
)
from .graph import FAMILIES, GraphSpec, generate, independent_degree, star, write_edge_list
from .protocols import ColorState, Mis, get_protocol

OK, VIOLATION, USAGE = 0, 1, 2


def _write_csv(path, header, rows):
    buf = io.StringIO(newline="")
    buf.write("# format=1\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in row])
    if path in (None, "-"):
        sys.stdout.write(buf.getvalue())
    else:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            fh.write(buf.getvalue())


# ---------------------------------------------------------------- analyze

ANALYZE_COLUMNS = (
    "d", "E_chain", "E_closed_form", "Var_chain", "Var_bound",
    "E_memory_chain", "Var_memory_chain", "bound_memory",
)


def analyze_rows(d_max: int) -> list[tuple]:
    rows = []
    for d in range(1, d_max + 1):
        msg = markov.solve_absorbing(markov.message_chain(d))
        mem = markov.solve_absorbing(markov.memory_chain(d))
        rows.append((
            d, msg.expected_from(d), markov.harmonic_bound(d), msg.variance_from(d),
            markov.variance_formula(d), mem.expected_from("I"), mem.variance_from("I"),
            markov.containment_bound_memory(d),
        ))
    return rows


def cmd_analyze(args) -> int:
    if args.d_max < 1:
        raise ConfigError("--d-max", "must be >= 1")
    rows = analyze_rows(args.d_max)
    _write_csv(args.out, ANALYZE_COLUMNS, rows)
    bad = [r[0] for r in rows if r[3] > markov.variance_bound() or r[5] >= 5.0]
    if bad:
        print(f"bound violated for d = {bad}", file=sys.stderr)
        return VIOLATION
    return OK


# ---------------------------------------------------------------- simulate

def _start_config(cfg, g, protocol):
    sc = cfg.scenario
    if sc.start == "seeded":
        return legitimate_config(g, protocol, sc.start_seed, cfg.max_rounds)
    fam = cfg.graph.family
    if protocol.name == "acol" and fam == "star":
        return star_coloring(cfg.graph.params["d"])
    if protocol.name == "a2" and fam == "staircase":
        return staircase_a2_config(cfg.graph.params["delta"])
    raise ConfigError(
        "scenario.start",
        f"no canonical configuration for {protocol.name} on {fam}; use start = seeded",
    )


def _other_states(protocol, g, state):
    if protocol.name == "a1":
        return [Mis(1 - int(state))]
    return [k for k in range(g.max_degree + 1) if k != state]


def _coerce_state(protocol, value):
    if value == "keep":
        raise ConfigError("scenario.state", f"{protocol.name} scenarios need a state")
    if protocol.name == "a1":
        if value in ("IN", "OUT"):
            return Mis[value]
        if value in (0, 1):
            return Mis(value)
        raise ConfigError("scenario.state", f"a1 states are IN or OUT, got {value!r}")
    if not isinstance(value, int):
        raise ConfigError("scenario.state", f"expected a color, got {value!r}")
    return value


def build_scenarios(cfg, g, protocol, start):
    sc = cfg.scenario
    r = sc.injection_round
    nodes = range(g.n) if sc.nodes == "all" else sc.nodes
    for v in nodes:
        if not 0 <= v < g.n:
            raise ConfigError("scenario.nodes", f"node {v} not in graph of {g.n} nodes")
    if sc.family == "worst-case-broadcast":
        if protocol.name != "acol":
            raise ConfigError("scenario.family", "worst-case-broadcast needs protocol acol")
        return [worst_case_scenarios(g, start, v, r)["broadcast_true"] for v in nodes]
    if sc.family == "memory-sweep":
        if protocol.name == "acol":
            return [s for v in nodes for s in memory_sweep_scenarios(g, start, v, r)]
        return [
            MemoryCorruption(v, new_state=s, injection_round=r)
            for v in nodes for s in _other_states(protocol, g, start.states[v])
        ]
    if sc.family == "explicit":
        if not 0 <= sc.node < g.n:
            raise ConfigError("scenario.node", f"node {sc.node} not in graph of {g.n} nodes")
        if protocol.name == "acol":
            if sc.state != "keep":
                raise ConfigError("scenario.state", "acol scenarios use c and final")
            c = KEEP if sc.c == "keep" else sc.c
            final = KEEP if sc.final == "keep" else sc.final
            if sc.kind == "memory":
                return [MemoryCorruption(sc.node, new_c=c, new_final=final, injection_round=r)]
            if c is KEEP or final is KEEP:
                raise ConfigError("scenario.c", "broadcast payloads need both c and final")
            return [BroadcastCorruption(sc.node, ColorState(c, bool(final)), r)]
        state = _coerce_state(protocol, sc.state)
        if sc.kind == "memory":
            return [MemoryCorruption(sc.node, new_state=state, injection_round=r)]
        return [BroadcastCorruption(sc.node, state, r)]
    return [None]


def _contamination_cap(g, scenario):
    try:
        di = independent_degree(g, scenario.target)
    except CapacityError:
        return None
    return di + (1 if scenario.kind == "memory" else 0)


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    try:
        protocol = get_protocol(cfg.protocol)
    except ContractError as exc:
        raise ConfigError("experiment.protocol", str(exc)) from None
    g = build_graph(cfg)
    if cfg.scenario.family == "none":
        start, scenarios = None, [None]
    else:
        try:
            start = _start_config(cfg, g, protocol)
        except DivergenceError as exc:
            raise ConfigError("scenario.start_seed", str(exc)) from None
        if not protocol.is_legitimate(g, start):
            raise ConfigError("scenario.start", "start configuration is not legitimate")
        scenarios = build_scenarios(cfg, g, protocol, start)
    summaries = ex.run_scenarios(g, protocol, scenarios, cfg.trials, cfg.seed, start, cfg.max_rounds)

    cap = cfg.radius_cap if cfg.radius_cap is not None else protocol.radius_claim
    problems = []
    for sc, s in zip(scenarios, summaries):
        if s.divergences:
            problems.append(f"{s.scenario}: {s.divergences} diverged trials")
        if sc is None or not s["radius"].n:
            continue
        if cap is not None and s["radius"].max > cap:
            problems.append(f"{s.scenario}: radius {s['radius'].max} exceeds cap {cap}")
        if protocol.name == "acol":
            ccap = _contamination_cap(g, sc)
            if ccap is not None and s["contaminated"].max > ccap:
                problems.append(f"{s.scenario}: {s['contaminated'].max} nodes changed, cap {ccap}")

    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    if cfg.csv_name:
        ex.write_csv(summaries, out / cfg.csv_name)
    if cfg.json_name:
        ex.write_json(summaries, out / cfg.json_name)
    for s in summaries:
        m = s["rounds_to_legitimate"]
        print(f"{s.scenario}: trials={s.trials} mean_legit={m.mean:.4f} "
              f"max_radius={s['radius'].max} diverged={s.divergences}")
    for p in problems:
        print(f"violation: {p}", file=sys.stderr)
    return VIOLATION if problems else OK


# ---------------------------------------------------------------- compare

def _parse_range(text: str) -> range:
    try:
        a, b = text.split("..")
        lo, hi = int(a), int(b)
    except ValueError:
        raise ConfigError("--d-range", f"expected a..b, got {text!r}") from None
    if lo < 1 or hi < lo:
        raise ConfigError("--d-range", f"need 1 <= a <= b, got {text!r}")
    return range(lo, hi + 1)


def _z(value, target, se):
    if se == 0 or math.isnan(se):
        return 0.0 if value == target else math.copysign(math.inf, value - target)
    return (value - target) / se


COMPARE_COLUMNS = ("case", "d", "trials", "sim_mean", "sim_se", "predicted", "z_mean",
                   "sim_var", "sim_var_se", "predicted_var", "z_var")


def compare_rows(scenario: str, ds, trials: int, seed: int, instances: int = 10):
    """Side-by-side simulation versus analysis.

    For ``broadcast`` the prediction is the message chain (two-sided test);
    for the memory families it is the upper bound H_d/ln2 + 11/2 or 8.8
    (one-sided: only positive z counts as a violation).
    """
    from .protocols import ACOL

    rows = []
    if scenario == "broadcast":
        for d in ds:
            g, cfg = star(d), star_coloring(d)
            sc = worst_case_scenarios(g, cfg, 0)["broadcast_true"]
            m = ex.run_trials(g, ACOL, sc, trials, seed + d, cfg)["rounds_to_legal"]
            sol = markov.solve_absorbing(markov.message_chain(d))
            e, v = sol.expected_from(d), sol.variance_from(d)
            rows.append(("broadcast", d, m.n, m.mean, m.se, e, _z(m.mean, e, m.se),
                         m.variance, m.se_variance, v, _z(m.variance, v, m.se_variance)))
    elif scenario == "memory":
        for d in ds:
            g, cfg = star(d), star_coloring(d)
            w = worst_case_scenarios(g, cfg, 0)
            bound = markov.containment_bound_memory(d)
            for case in ("memory_c", "memory_both"):
                m = ex.run_trials(g, ACOL, w[case], trials, seed + d, cfg)["rounds_to_legitimate"]
                rows.append((case, d, m.n, m.mean, m.se, bound, _z(m.mean, bound, m.se),
                             m.variance, m.se_variance, "", ""))
    elif scenario == "unit-disc-memory":
        res = ex.unit_disc_memory_sweep(instances, trials, seed)
        for case, sums in res["summaries"].items():
            m = ex.pooled(sums, "rounds_to_legitimate")
            rows.append((case, max(res["delta_i"]), m.n, m.mean, m.se, 8.8, _z(m.mean, 8.8, m.se),
                         m.variance, m.se_variance, "", ""))
        allsum = [s for v in res["summaries"].values() for s in v]
        m = ex.pooled(allsum, "rounds_to_legitimate")
        rows.append(("pooled", max(res["delta_i"]), m.n, m.mean, m.se, 8.8,
                     _z(m.mean, 8.8, m.se), m.variance, m.se_variance, "", ""))
    else:
        raise ConfigError("--scenario", f"unknown family {scenario!r}")
    return rows


def cmd_compare(args) -> int:
    if args.trials < 2:
        raise ConfigError("--trials", "must be >= 2")
    ds = _parse_range(args.d_range)
    rows = compare_rows(args.scenario, ds, args.trials, args.seed, args.instances)
    _write_csv(args.out, COMPARE_COLUMNS, rows)
    two_sided = args.scenario == "broadcast"
    bad = []
    for r in rows:
        zs = [r[6]] + ([r[10]] if two_sided else [])
        if any((abs(z) if two_sided else z) > 3 for z in zs):
            bad.append(f"{r[0]} d={r[1]}")
    if bad:
        print("z-score beyond 3: " + ", ".join(bad), file=sys.stderr)
        return VIOLATION
    return OK


# ---------------------------------------------------------------- graphgen

def cmd_graphgen(args) -> int:
    if args.family not in FAMILIES:
        raise ConfigError("--family", f"expected one of {FAMILIES}")
    raw = {}
    for item in args.param:
        if "=" not in item:
            raise ConfigError("--param", f"expected key=value, got {item!r}")
        k, v = item.split("=", 1)
        raw[k.strip()] = v.strip()
    params = graph_params(raw, "--param")
    if args.family == "hub_over_h":
        h_family = raw.get("h_family")
        if h_family not in FAMILIES:
            raise ConfigError("--param", "hub_over_h needs h_family=<family>")
        params["h"] = GraphSpec(h_family, graph_params(raw, "--param", "h_"))
    try:
        g = generate(GraphSpec(args.family, params))
    except ParameterError as exc:
        raise ConfigError(f"--param {exc.field}", str(exc)) from None
    write_edge_list(g, args.out)
    print(f"n={g.n} edges={len(g.edges())} max_degree={g.max_degree}")
    return OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="faultcontain", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="chain expectations and closed-form bounds per d")
    a.add_argument("--d-max", type=int, required=True)
    a.add_argument("--out", default="-")
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("simulate", help="run an experiment file")
    s.add_argument("--config", required=True)
    s.set_defaults(func=cmd_simulate)

    c = sub.add_parser("compare", help="simulation versus analysis with z-scores")
    c.add_argument("--scenario", required=True, choices=("broadcast", "memory", "unit-disc-memory"))
    c.add_argument("--d-range", default="1..5")
    c.add_argument("--trials", type=int, required=True)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--instances", type=int, default=10)
    c.add_argument("--out", default="-")
    c.set_defaults(func=cmd_compare)

    gg = sub.add_parser("graphgen", help="write a generated graph as an edge list")
    gg.add_argument("--family", required=True)
    gg.add_argument("--param", action="append", default=[], metavar="KEY=VALUE")
    gg.add_argument("--out", required=True)
    gg.set_defaults(func=cmd_graphgen)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return USAGE
    except FaultContainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return VIOLATION


if __name__ == "__main__":
    sys.exit(main())
