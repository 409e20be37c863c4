"""Monte Carlo measurement of containment time and contamination radius.

Trial ``t`` of an experiment with master seed ``s`` draws all its randomness
from ``Streams(trial_key(s, t))``; summaries are therefore independent of
how trials are batched.  A_col trials run on the vectorised executor, the
other protocols on the scalar engine (both give identical results for A_col).
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

import numpy as np

from . import batch
from .engine import DEFAULT_MAX_ROUNDS, Configuration, random_config, run
from .errors import ContractError, DivergenceError
from .graph import Graph, gnp
from .protocols import ProtocolHandle
from .rng import Streams, derive, trial_key, trial_keys

METRICS = ("rounds_to_legal", "rounds_to_legitimate", "radius", "contaminated")


@dataclass(frozen=True)
class TrialResult:
    rounds_to_legal: int
    rounds_to_legitimate: int
    contaminated: frozenset
    radius: int


@dataclass(frozen=True)
class MetricSummary:
    """Sample statistics of one integer metric.

    ``se`` is the standard error of the mean; ``se_variance`` the standard
    error of the sample variance, from the fourth central moment.
    """

    n: int
    mean: float
    variance: float
    se: float
    se_variance: float
    min: int
    max: int
    histogram: dict

    def to_dict(self) -> dict:
        return {
            "n": self.n, "mean": self.mean, "variance": self.variance, "se": self.se,
            "se_variance": self.se_variance, "min": self.min, "max": self.max,
            "histogram": {str(k): v for k, v in sorted(self.histogram.items())},
        }


def summarize(values) -> MetricSummary:
    x = np.asarray(values, dtype=np.int64)
    n = int(x.size)
    if n == 0:
        return MetricSummary(0, math.nan, math.nan, math.nan, math.nan, 0, 0, {})
    vals, counts = np.unique(x, return_counts=True)
    hist = {int(v): int(c) for v, c in zip(vals, counts)}
    mean = math.fsum(float(v) * c for v, c in hist.items()) / n
    if n < 2:
        return MetricSummary(n, mean, 0.0, math.nan, math.nan, int(vals[0]), int(vals[-1]), hist)
    m2 = math.fsum((v - mean) ** 2 * c for v, c in hist.items()) / n
    m4 = math.fsum((v - mean) ** 4 * c for v, c in hist.items()) / n
    var = m2 * n / (n - 1)
    var_of_var = max(0.0, (m4 - (n - 3) / (n - 1) * var * var) / n)
    return MetricSummary(
        n, mean, var, math.sqrt(var / n), math.sqrt(var_of_var),
        int(vals[0]), int(vals[-1]), hist,
    )


@dataclass
class TrialSummary:
    protocol: str
    scenario: str
    master_seed: int
    trials: int
    divergences: int
    metrics: dict
    results: Optional[list] = field(default=None, repr=False)

    def __getitem__(self, name) -> MetricSummary:
        return self.metrics[name]

    def to_dict(self) -> dict:
        return {
            "format": 1,
            "protocol": self.protocol,
            "scenario": self.scenario,
            "master_seed": self.master_seed,
            "trials": self.trials,
            "divergences": self.divergences,
            "metrics": {k: m.to_dict() for k, m in self.metrics.items()},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    CSV_FIELDS = ("protocol", "scenario", "master_seed", "trials", "divergences") + tuple(
        f"{m}_{s}" for m in METRICS for s in ("mean", "variance", "se", "se_variance", "max")
    )

    def csv_row(self) -> dict:
        row = {
            "protocol": self.protocol, "scenario": self.scenario,
            "master_seed": self.master_seed, "trials": self.trials,
            "divergences": self.divergences,
        }
        for m in METRICS:
            s = self.metrics[m]
            for k in ("mean", "variance", "se", "se_variance", "max"):
                v = getattr(s, k)
                row[f"{m}_{k}"] = repr(float(v)) if isinstance(v, float) else v
        return row


def write_csv(summaries: Sequence[TrialSummary], path) -> None:
    buf = io.StringIO(newline="")
    buf.write("# format=1\n")
    w = csv.DictWriter(buf, fieldnames=TrialSummary.CSV_FIELDS, lineterminator="\n")
    w.writeheader()
    for s in summaries:
        w.writerow(s.csv_row())
    with open(path, "w", newline="") as fh:
        fh.write(buf.getvalue())


def write_json(summaries: Sequence[TrialSummary], path) -> None:
    doc = {"format": 1, "summaries": [s.to_dict() for s in summaries]}
    with open(path, "w", newline="\n") as fh:
        fh.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def measure_radius(contaminated, g: Graph, faulty_node: Optional[int]) -> int:
    """Largest hop distance from ``faulty_node`` to a contaminated node.

    ``contaminated`` is a node set or a trace (its contaminated set is used).
    Returns 0 for an empty set or when there is no faulty node.
    """
    if hasattr(contaminated, "contaminated"):
        contaminated = contaminated.contaminated()
    if faulty_node is None or not contaminated:
        return 0
    dist = g.distances_from(faulty_node)
    out = 0
    for v in contaminated:
        if dist[v] < 0:
            raise ContractError(f"contaminated node {v} is not connected to {faulty_node}")
        out = max(out, dist[v])
    return out


def _describe(scenario) -> str:
    if scenario is None:
        return "none"
    return scenario.describe() if hasattr(scenario, "describe") else repr(scenario)


def _summary(protocol, scenario, master_seed, legal, legit, radius, csize, div, results=None):
    return TrialSummary(
        protocol=protocol.name,
        scenario=_describe(scenario),
        master_seed=master_seed,
        trials=len(legal) + div,
        divergences=div,
        metrics={
            "rounds_to_legal": summarize(legal),
            "rounds_to_legitimate": summarize(legit),
            "radius": summarize(radius),
            "contaminated": summarize(csize),
        },
        results=results,
    )


def run_trials(
    g: Graph,
    protocol: ProtocolHandle,
    scenario,
    trials: int,
    master_seed: int,
    initial: Configuration | None = None,
    max_rounds: int = DEFAULT_MAX_ROUNDS,
    engine: str = "auto",
    keep_results: bool = False,
) -> TrialSummary:
    """Run ``trials`` seeded trials of one scenario and aggregate them.

    ``initial=None`` starts every trial from its own uniformly random
    configuration.  Diverged trials are excluded from the statistics and
    counted in ``divergences``.
    """
    if trials < 1:
        raise ContractError("trials must be >= 1")
    if engine not in ("auto", "batch", "scalar"):
        raise ContractError(f"unknown engine {engine!r}")
    use_batch = engine == "batch" or (engine == "auto" and protocol.name == "acol")
    if use_batch:
        if protocol.name != "acol":
            raise ContractError("the batch engine only runs acol")
        return _run_batch(g, protocol, [scenario], trials, master_seed, initial, max_rounds, keep_results)[0]
    faulty = None if scenario is None else scenario.target
    legal, legit, radius, csize, results = [], [], [], [], []
    div = 0
    for t in range(trials):
        rng = Streams(trial_key(master_seed, t))
        start = initial if initial is not None else random_config(g, protocol, rng)
        try:
            res = run(g, start, protocol, scenario, max_rounds=max_rounds, rng=rng)
        except DivergenceError:
            div += 1
            continue
        cont = frozenset(res.trace.contaminated())
        rad = measure_radius(cont, g, faulty)
        legal.append(res.rounds_to_legal)
        legit.append(res.rounds_to_legitimate)
        radius.append(rad)
        csize.append(len(cont))
        if keep_results:
            results.append(TrialResult(res.rounds_to_legal, res.rounds_to_legitimate, cont, rad))
    return _summary(protocol, scenario, master_seed, legal, legit, radius, csize, div,
                    results if keep_results else None)


def _run_batch(g, protocol, scenarios, trials, master_seed, initial, max_rounds, keep_results,
               seeds=None):
    s_count = len(scenarios)
    seeds = [master_seed] * s_count if seeds is None else list(seeds)
    keys = np.concatenate([trial_keys(s, np.arange(trials)) for s in seeds])
    fa = batch.FaultArrays.from_scenarios([sc for sc in scenarios for _ in range(trials)])
    if initial is None:
        c0, f0 = batch.random_states(g, keys)
    else:
        c0, f0 = batch.encode(initial)
    res = batch.run_batch(g, c0, f0, keys, fa, max_rounds=max_rounds)
    out = []
    for i, sc in enumerate(scenarios):
        sl = slice(i * trials, (i + 1) * trials)
        ok = ~res.diverged[sl]
        cont = res.contaminated[sl][ok]
        if sc is None:
            radius = np.zeros(cont.shape[0], dtype=np.int64)
        else:
            dist = np.array(g.distances_from(sc.target), dtype=np.int64)
            if (cont & (dist < 0)[None, :]).any():
                raise ContractError("contamination reached a disconnected node")
            radius = np.where(cont, dist[None, :], 0).max(axis=1, initial=0)
        results = None
        if keep_results:
            results = [
                TrialResult(int(a), int(b), frozenset(np.flatnonzero(m).tolist()), int(r))
                for a, b, m, r in zip(res.rounds_to_legal[sl][ok], res.rounds_to_legitimate[sl][ok],
                                      cont, radius)
            ]
        out.append(_summary(
            protocol, sc, seeds[i], res.rounds_to_legal[sl][ok], res.rounds_to_legitimate[sl][ok],
            radius, cont.sum(axis=1), int((~ok).sum()), results,
        ))
    return out


def run_scenarios(
    g: Graph,
    protocol: ProtocolHandle,
    scenarios: Sequence,
    trials: int,
    master_seed: int,
    initial: Configuration | None = None,
    max_rounds: int = DEFAULT_MAX_ROUNDS,
    keep_results: bool = False,
) -> list[TrialSummary]:
    """One summary per scenario; scenario ``i`` uses seed ``derive(master_seed, i)``.

    A_col scenarios are executed together in one vectorised batch.
    """
    seeds = [derive(master_seed, i) for i in range(len(scenarios))]
    if protocol.name == "acol" and scenarios:
        return _run_batch(g, protocol, list(scenarios), trials, master_seed, initial,
                          max_rounds, keep_results, seeds=seeds)
    return [
        run_trials(g, protocol, sc, trials, s, initial, max_rounds, keep_results=keep_results)
        for sc, s in zip(scenarios, seeds)
    ]


@dataclass(frozen=True)
class ProfileRow:
    n: int
    trials: int
    mean: float
    p95: float
    max: int
    divergences: int


def stabilization_profile(
    protocol: ProtocolHandle,
    sizes: Sequence[int],
    trials: int,
    master_seed: int,
    avg_degree: float = 8.0,
    max_rounds: Any = None,
) -> list[ProfileRow]:
    """Rounds to legitimacy from random states on gnp(n, avg_degree/n).

    One graph is drawn per size; ``max_rounds`` defaults to the engine default.
    """
    if list(sizes) != sorted(sizes):
        raise ContractError("sizes must be ascending")
    rows = []
    for i, n in enumerate(sizes):
        g = gnp(n, min(1.0, avg_degree / n), derive(master_seed, 0x67, i) & 0xFFFFFFFF)
        cap = max_rounds if max_rounds is not None else DEFAULT_MAX_ROUNDS
        s = run_trials(g, protocol, None, trials, derive(master_seed, n), max_rounds=cap)
        legit = s["rounds_to_legitimate"]
        values = np.repeat(np.array(list(legit.histogram), dtype=float),
                           list(legit.histogram.values()))
        rows.append(ProfileRow(
            n, trials, legit.mean,
            float(np.percentile(values, 95)) if values.size else math.nan,
            legit.max, s.divergences,
        ))
    return rows


def fit_log2(rows: Sequence[ProfileRow]) -> tuple[float, float]:
    """Least-squares ``mean ~ c * log2(n)``; returns (c, relative residual).

    The relative residual is ``||mean - c log2 n|| / ||mean||``.
    """
    x = np.array([math.log2(r.n) for r in rows])
    y = np.array([r.mean for r in rows])
    c = float(x @ y / (x @ x))
    resid = float(np.linalg.norm(y - c * x) / np.linalg.norm(y))
    return c, resid


def pooled(summaries: Sequence[TrialSummary], metric: str) -> MetricSummary:
    """Summary of ``metric`` over the union of all trials of ``summaries``."""
    hist: dict[int, int] = {}
    for s in summaries:
        for v, c in s[metric].histogram.items():
            hist[v] = hist.get(v, 0) + c
    values = np.repeat(np.array(list(hist), dtype=np.int64), list(hist.values()))
    return summarize(values)


UNIT_DISC_CASES = ("memory_c", "memory_both", "memory_bot")


def unit_disc_memory_sweep(
    instances: int = 10,
    trials: int = 20,
    master_seed: int = 0,
    n: int = 200,
    radius: float = 0.08,
    max_rounds: int = DEFAULT_MAX_ROUNDS,
) -> dict:
    """Memory corruptions of every node of seeded unit disc graphs.

    For each instance a legitimate A_col configuration is reached from random
    states; then every node ``v`` gets three corruptions: its color set to the
    worst conflict color (final kept), the same with final cleared, and its
    color erased.  Returns per-instance Delta_i and the summaries per case.
    """
    from .faults import MemoryCorruption, legitimate_config, worst_case_scenarios
    from .graph import max_independent_degree, unit_disc
    from .protocols import ACOL

    out = {"delta_i": [], "summaries": {k: [] for k in UNIT_DISC_CASES}}
    for i in range(instances):
        g, _ = unit_disc(n, radius, derive(master_seed, 0x7564, i) & 0xFFFFFFFF)
        out["delta_i"].append(max_independent_degree(g))
        cfg = legitimate_config(g, ACOL, derive(master_seed, 0x6C, i), max_rounds)
        scen = []
        for v in range(g.n):
            w = worst_case_scenarios(g, cfg, v)
            scen += [w["memory_c"], w["memory_both"], MemoryCorruption(v, new_c=None)]
        sums = run_scenarios(g, ACOL, scen, trials, derive(master_seed, 0x73, i), cfg, max_rounds)
        for j, s in enumerate(sums):
            out["summaries"][UNIT_DISC_CASES[j % 3]].append(s)
    return out
