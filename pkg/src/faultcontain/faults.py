"""Single-fault (1-faulty) scenarios built on legitimate configurations.

Two fault classes exist.  A memory corruption overwrites one node's state at
a round boundary, before that round's broadcasts.  A broadcast corruption
replaces the payload of one node's broadcast in one round; all neighbors of
the sender receive the corrupted payload and the sender's state is untouched.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Optional

from .engine import DEFAULT_MAX_ROUNDS, Configuration, random_config, run
from .errors import ContractError
from .graph import Graph
from .protocols import ColorState, ProtocolHandle
from .rng import Streams, derive


class _Keep:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "KEEP"


#: Sentinel: leave this field of the state as it is.
KEEP = _Keep()


@dataclass(frozen=True)
class MemoryCorruption:
    """Overwrite the state of ``node`` at the start of ``injection_round``.

    For A_col set ``new_c`` and/or ``new_final``; for the other protocols set
    ``new_state``.
    """

    node: int
    new_c: Any = KEEP
    new_final: Any = KEEP
    new_state: Any = KEEP
    injection_round: int = 0

    kind = "memory"

    def corrupt(self, state):
        if self.new_state is not KEEP:
            return self.new_state
        if not isinstance(state, ColorState):
            raise ContractError("new_c/new_final only apply to A_col states")
        c = state.c if self.new_c is KEEP else self.new_c
        final = state.final if self.new_final is KEEP else bool(self.new_final)
        return ColorState(c, final)

    @property
    def target(self) -> int:
        return self.node

    def describe(self) -> str:
        parts = [f"memory v={self.node}"]
        if self.new_state is not KEEP:
            parts.append(f"state={self.new_state!r}")
        if self.new_c is not KEEP:
            parts.append(f"c={'bot' if self.new_c is None else self.new_c}")
        if self.new_final is not KEEP:
            parts.append(f"final={str(bool(self.new_final)).lower()}")
        return " ".join(parts)


@dataclass(frozen=True)
class BroadcastCorruption:
    """Replace the broadcast of ``sender`` in ``injection_round`` by ``payload``."""

    sender: int
    payload: Any
    injection_round: int = 0

    kind = "broadcast"

    @property
    def target(self) -> int:
        return self.sender

    def describe(self) -> str:
        if isinstance(self.payload, tuple) and len(self.payload) == 2:
            c, f = self.payload
            return f"broadcast v={self.sender} c={'bot' if c is None else c} final={str(bool(f)).lower()}"
        return f"broadcast v={self.sender} payload={self.payload!r}"


@dataclass(frozen=True)
class ConflictSet:
    node: int
    color: Optional[int]
    members: frozenset

    def __len__(self):
        return len(self.members)


def _colors(cfg) -> list:
    states = getattr(cfg, "states", cfg)
    return [s.c if isinstance(s, ColorState) else s for s in states]


def n_conf(g: Graph, cfg, v: int, c_f) -> ConflictSet:
    """Neighbors of ``v`` whose color equals ``c_f``.

    Raises :class:`ContractError` if two members are adjacent, which can only
    happen when ``cfg`` is not a legal coloring.
    """
    colors = _colors(cfg)
    members = [w for w in g.neighbors(v) if c_f is not None and colors[w] == c_f]
    for i, a in enumerate(members):
        for b in members[i + 1:]:
            if g.has_edge(a, b):
                raise ContractError(f"conflict set of {v} holds adjacent nodes {a}, {b}")
    return ConflictSet(v, c_f, frozenset(members))


def worst_conflict_color(g: Graph, cfg, v: int) -> int:
    """Color maximizing |N_conf(v)|; ties go to the smallest color."""
    colors = _colors(cfg)
    counts: dict[int, int] = {}
    for w in g.neighbors(v):
        if colors[w] is not None:
            counts[colors[w]] = counts.get(colors[w], 0) + 1
    if not counts:
        return 0
    best = max(counts.values())
    return min(c for c, k in counts.items() if k == best)


def worst_case_scenarios(g: Graph, cfg, v: int, injection_round: int = 0) -> dict:
    """The A_col fault cases for node ``v``, keyed by a short name.

    ``broadcast_true`` and ``memory_c`` use the worst conflict color.
    """
    c_f = worst_conflict_color(g, cfg, v)
    r = injection_round
    return {
        "broadcast_true": BroadcastCorruption(v, ColorState(c_f, True), r),
        "broadcast_false": BroadcastCorruption(v, ColorState(c_f, False), r),
        "memory_c": MemoryCorruption(v, new_c=c_f, injection_round=r),
        "memory_final": MemoryCorruption(v, new_final=False, injection_round=r),
        "memory_both": MemoryCorruption(v, new_c=c_f, new_final=False, injection_round=r),
    }


def memory_sweep_scenarios(g: Graph, cfg, v: int, injection_round: int = 0) -> list:
    """Every A_col memory corruption of ``v`` over colors {bot, 0..deg(v)+1}.

    Each color is paired with final kept and final cleared; the single no-op
    corruption is left out.
    """
    current = getattr(cfg, "states", cfg)[v]
    out = []
    for c in [None, *range(g.degree(v) + 2)]:
        for final in (KEEP, False):
            if c == current.c and (final is KEEP or final == current.final):
                continue
            out.append(MemoryCorruption(v, new_c=c, new_final=final, injection_round=injection_round))
    return out


def legitimate_config(
    g: Graph, protocol: ProtocolHandle, seed: int, max_rounds: int = DEFAULT_MAX_ROUNDS
) -> Configuration:
    """Run ``protocol`` from seeded random states until it is legitimate."""
    rng = Streams(derive(seed, 0x6C65))
    res = run(g, random_config(g, protocol, rng), protocol, max_rounds=max_rounds, rng=rng)
    final = res.trace.records[-1].config if res.trace.records else res.trace.initial
    return Configuration(final.states, 0)


def star_coloring(d: int) -> Configuration:
    """Legitimate A_col state of star(d): center 1, leaves 0, all final."""
    if d < 1:
        raise ContractError("star coloring needs d >= 1")
    return Configuration((ColorState(1, True),) + (ColorState(0, True),) * d)


def staircase_a2_config(delta: int) -> Configuration:
    """Legitimate A2 state of staircase(delta).

    Backbone node p_i holds delta - i; the private clique of p_i holds the
    colors delta-i+2..delta.  Every node already holds its max-rule color.
    """
    colors = [delta - i for i in range(delta + 1)]
    for i in range(2, delta + 1):
        colors.extend(range(delta - i + 2, delta + 1))
    return Configuration(tuple(colors))
