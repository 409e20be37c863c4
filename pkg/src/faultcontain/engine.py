"""Synchronous round executor.

In round ``r`` every node broadcasts one payload derived from its state at
the start of the round, then all nodes apply the protocol's transition to
their inbox simultaneously.  ``cfg_r`` denotes the configuration at the start
of round ``r``.

Recovery clock
--------------
Containment times are counted from the first configuration that carries the
fault: the corrupted configuration ``cfg_{r_f}`` for a memory fault, and
``cfg_{r_f+1}`` (the configuration right after the corrupted broadcast was
delivered) for a message fault.  Without a fault the clock starts at the
initial configuration.  ``rounds_to_legal`` is the number of rounds from the
clock start until the configuration is a legal coloring (or, for A1, an MIS);
``rounds_to_legitimate`` likewise for the legitimacy predicate.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, NamedTuple, Optional

from .errors import ContractError, DivergenceError
from .graph import Graph
from .protocols import ColorState, Mis, ProtocolHandle
from .rng import INIT_ROUND, Streams

DEFAULT_MAX_ROUNDS = 10_000


@dataclass(frozen=True)
class Configuration:
    states: tuple
    round: int = 0

    def __len__(self):
        return len(self.states)


@dataclass(frozen=True)
class RoundRecord:
    round: int
    messages: tuple  # payload delivered from each sender
    changed: tuple[int, ...]
    config: Configuration  # after the round


@dataclass
class RoundTrace:
    initial: Configuration
    records: list[RoundRecord] = field(default_factory=list)
    fault: Any = None
    faulty_config: Optional[Configuration] = None
    clock_start: int = 0

    def configs(self) -> list[Configuration]:
        """``cfg_r`` for every visited round, with the memory fault applied."""
        out = [self.initial]
        for rec in self.records:
            out.append(rec.config)
        if self.faulty_config is not None:
            out[self.faulty_config.round - self.initial.round] = self.faulty_config
        return out

    def contaminated(self) -> set[int]:
        """Nodes that changed state in the injection round or later."""
        first = self.fault.injection_round if self.fault is not None else self.initial.round
        nodes: set[int] = set()
        for rec in self.records:
            if rec.round >= first:
                nodes.update(rec.changed)
        return nodes


class RunResult(NamedTuple):
    rounds_to_legal: int
    rounds_to_legitimate: int
    trace: RoundTrace


def _check_config(g: Graph, cfg: Configuration, protocol: ProtocolHandle) -> None:
    if len(cfg.states) != g.n:
        raise ContractError(f"configuration has {len(cfg.states)} states for {g.n} nodes")
    for v, s in enumerate(cfg.states):
        if not isinstance(s, protocol.state_type):
            raise ContractError(
                f"node {v}: {protocol.name} expects {protocol.state_type.__name__}, "
                f"got {type(s).__name__}"
            )


def step(g: Graph, cfg: Configuration, protocol: ProtocolHandle, fault=None, rng: Streams = None):
    """Execute one synchronous round.

    ``fault`` is an optional in-flight broadcast corruption: every neighbor of
    ``fault.sender`` receives ``fault.payload`` in place of the real message.
    The sender's own state is not touched.
    """
    _check_config(g, cfg, protocol)
    if rng is None:
        raise ContractError("step() needs an rng")
    states = cfg.states
    r = cfg.round
    payloads = [protocol.message(s) for s in states]
    if fault is not None:
        if getattr(fault, "kind", None) != "broadcast":
            raise ContractError("step() only accepts broadcast corruptions")
        payloads[fault.sender] = fault.payload
    delta = g.max_degree
    transition = protocol.transition
    new = []
    for v, nbrs in enumerate(g.adjacency):
        inbox = [payloads[w] for w in nbrs]
        new.append(transition(states[v], inbox, len(nbrs), delta, rng.node(v, r)))
    changed = tuple(v for v in range(g.n) if new[v] != states[v])
    nxt = Configuration(tuple(new), r + 1)
    return nxt, RoundRecord(r, tuple(payloads), changed, nxt)


def run(
    g: Graph,
    cfg: Configuration,
    protocol: ProtocolHandle,
    scenario=None,
    max_rounds: int = DEFAULT_MAX_ROUNDS,
    rng: Streams = None,
) -> RunResult:
    """Run until the legitimacy predicate holds on the recovery clock.

    Raises :class:`DivergenceError` (carrying the trace) when ``max_rounds``
    rounds pass without reaching legitimacy.
    """
    if max_rounds < 1:
        raise ContractError("max_rounds must be >= 1")
    if rng is None:
        raise ContractError("run() needs an rng")
    _check_config(g, cfg, protocol)
    kind = getattr(scenario, "kind", None)
    if scenario is not None:
        r_f = scenario.injection_round
        if r_f < cfg.round:
            raise ContractError(f"injection round {r_f} precedes start round {cfg.round}")
        clock_start = r_f if kind == "memory" else r_f + 1
    else:
        r_f = None
        clock_start = cfg.round
    trace = RoundTrace(initial=cfg, fault=scenario, clock_start=clock_start)
    legal_at = None
    cur = cfg
    while True:
        r = cur.round
        if kind == "memory" and r == r_f:
            states = list(cur.states)
            states[scenario.node] = scenario.corrupt(states[scenario.node])
            cur = Configuration(tuple(states), r)
            trace.faulty_config = cur
        if r >= clock_start:
            if legal_at is None and protocol.is_legal(g, cur):
                legal_at = r - clock_start
            if protocol.is_legitimate(g, cur):
                return RunResult(legal_at, r - clock_start, trace)
        if r - cfg.round >= max_rounds:
            raise DivergenceError(
                f"{protocol.name}: not legitimate after {max_rounds} rounds", trace
            )
        fault = scenario if kind == "broadcast" and r == r_f else None
        cur, rec = step(g, cur, protocol, fault, rng)
        trace.records.append(rec)


def random_config(g: Graph, protocol: ProtocolHandle, rng: Streams) -> Configuration:
    """Uniformly random initial states, drawn from the reserved init round."""
    return Configuration(tuple(
        protocol.random_state(g, v, rng.node(v, INIT_ROUND)) for v in range(g.n)
    ))


def encode_state(s):
    if isinstance(s, ColorState):
        return [s.c, s.final]
    if isinstance(s, Mis):
        return s.name
    return s


def write_trace_jsonl(trace: RoundTrace, path: str | Path, verbose: bool = False) -> None:
    """One JSON object per line: a header, then one line per executed round."""
    lines = [json.dumps({
        "format": 1,
        "n": len(trace.initial.states),
        "start_round": trace.initial.round,
        "clock_start": trace.clock_start,
        **({"initial": [encode_state(s) for s in trace.initial.states]} if verbose else {}),
    })]
    for rec in trace.records:
        row = {"round": rec.round, "changed": list(rec.changed)}
        if verbose:
            row["states"] = [encode_state(s) for s in rec.config.states]
        lines.append(json.dumps(row))
    Path(path).write_text("\n".join(lines) + "\n", newline="\n")
