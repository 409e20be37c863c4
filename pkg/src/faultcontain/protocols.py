"""The four synchronous algorithms as pluggable transition functions.

``acol`` is the message-passing (Delta+1)-coloring algorithm whose nodes keep
a color (or ``None`` for "no color") and a ``final`` flag.  ``a1`` (maximal
independent set), ``a2`` and ``a3`` (coloring) are shared-memory algorithms;
they run on the same engine by broadcasting their full state every round.

Transition functions share one signature::

    transition(state, inbox, degree, delta, rng) -> state

where ``inbox`` lists the payloads of the node's neighbors in ascending id
order, ``degree`` is the node's degree, ``delta`` the graph's max degree and
``rng`` the node's :class:`~faultcontain.rng.NodeRng` for this round.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from typing import Any, Callable, NamedTuple, Optional, Sequence

from .errors import ContractError
from .graph import Graph

#: The "no color" value of A_col.
BOTTOM = None


class ColorState(NamedTuple):
    c: Optional[int]
    final: bool


class Mis(IntEnum):
    OUT = 0
    IN = 1


def _states(cfg) -> Sequence:
    return getattr(cfg, "states", cfg)


def random_color(degree: int, tabu, rng) -> Optional[int]:
    """Return ``None`` w.p. 1/2, else a uniform color of {0..degree} minus tabu.

    Slot 0 of ``rng`` is the coin, slot 1 the color index.
    """
    avail = [k for k in range(degree + 1) if k not in tabu]
    if not avail:
        raise ContractError(f"tabu {sorted(tabu)} covers every color in 0..{degree}")
    if rng.bit():
        return BOTTOM
    return avail[rng.below(len(avail))]


def acol_transition(state: ColorState, inbox, degree: int, delta: int = 0, rng=None) -> ColorState:
    occupied = set()
    tabu = set()
    for c_w, final_w in inbox:
        if c_w is not None:
            occupied.add(c_w)
            if final_w:
                tabu.add(c_w)
    c, final = state
    if c is None or c > degree:
        final = False
    elif final:
        if c in tabu:
            final = False
    elif c not in occupied:
        final = True
    if not final:
        c = random_color(degree, tabu, rng)
    return ColorState(c, final)


def a1_transition(state: Mis, inbox, degree: int = 0, delta: int = 0, rng=None) -> Mis:
    if state == Mis.IN and any(w == Mis.IN for w in inbox):
        return Mis.OUT
    if state == Mis.OUT and all(w == Mis.OUT for w in inbox):
        if rng.bit():
            return Mis.IN
    return state


def _max_free(inbox, delta: int) -> int:
    used = set(inbox)
    return max(k for k in range(delta + 1) if k not in used)


def a2_transition(state: int, inbox, degree: int = 0, delta: int = 0, rng=None) -> int:
    target = _max_free(inbox, delta)
    if state != target and rng.bit():
        return target
    return state


def a3_transition(state: int, inbox, degree: int = 0, delta: int = 0, rng=None) -> int:
    if any(w == state for w in inbox):
        if rng.bit():
            used = set(inbox)
            free = [k for k in range(delta + 1) if k not in used]
            return free[rng.below(len(free))]
    return state


# ---------------------------------------------------------------- predicates

def is_legal_coloring(g: Graph, cfg) -> bool:
    """Every node holds a color <= its degree and adjacent colors differ."""
    states = _states(cfg)
    colors = [s.c if isinstance(s, ColorState) else s for s in states]
    for v, c in enumerate(colors):
        if c is None or c < 0 or c > g.degree(v):
            return False
    return all(colors[u] != colors[w] for u, w in g.edges())


def is_legitimate_acol(g: Graph, cfg) -> bool:
    return is_legal_coloring(g, cfg) and all(s.final for s in _states(cfg))


def is_mis(g: Graph, cfg) -> bool:
    states = _states(cfg)
    for v in range(g.n):
        in_nbrs = any(states[w] == Mis.IN for w in g.neighbors(v))
        if states[v] == Mis.IN and in_nbrs:
            return False
        if states[v] == Mis.OUT and not in_nbrs:
            return False
    return True


def is_proper_coloring(g: Graph, cfg) -> bool:
    """Adjacent colors differ and all colors lie in {0..Delta} (A2/A3 legality)."""
    states = _states(cfg)
    delta = g.max_degree
    if any(not isinstance(c, int) or not 0 <= c <= delta for c in states):
        return False
    return all(states[u] != states[w] for u, w in g.edges())


def is_legitimate_a2(g: Graph, cfg) -> bool:
    """Proper coloring in which every node already holds its max-rule color."""
    states = _states(cfg)
    if not is_proper_coloring(g, states):
        return False
    delta = g.max_degree
    return all(
        states[v] == _max_free([states[w] for w in g.neighbors(v)], delta)
        for v in range(g.n)
    )


# ---------------------------------------------------------------- handles

def _acol_random_state(g: Graph, v: int, rng) -> ColorState:
    k = rng.below(g.max_degree + 2)
    return ColorState(None if k == 0 else k - 1, bool(rng.bit()))


def _a1_random_state(g: Graph, v: int, rng) -> Mis:
    return Mis(rng.bit())


def _color_random_state(g: Graph, v: int, rng) -> int:
    return rng.below(g.max_degree + 1)


def _identity(state):
    return state


@dataclass(frozen=True)
class ProtocolHandle:
    """Everything the engine and the harness need to run one algorithm.

    ``radius_claim`` is the proven contamination radius, or ``None`` when the
    radius is only bounded by Delta (A2).
    """

    name: str
    state_type: type
    transition: Callable[..., Any]
    message: Callable[[Any], Any]
    is_legal: Callable[[Graph, Any], bool]
    is_legitimate: Callable[[Graph, Any], bool]
    radius_claim: Optional[int]
    random_state: Callable[[Graph, int, Any], Any]


ACOL = ProtocolHandle(
    name="acol",
    state_type=ColorState,
    transition=acol_transition,
    message=_identity,  # (c, final) is exactly the broadcast payload
    is_legal=is_legal_coloring,
    is_legitimate=is_legitimate_acol,
    radius_claim=1,
    random_state=_acol_random_state,
)

A1 = ProtocolHandle("a1", Mis, a1_transition, _identity, is_mis, is_mis, 2, _a1_random_state)
A2 = ProtocolHandle(
    "a2", int, a2_transition, _identity, is_proper_coloring, is_legitimate_a2, None,
    _color_random_state,
)
A3 = ProtocolHandle(
    "a3", int, a3_transition, _identity, is_proper_coloring, is_proper_coloring, 1,
    _color_random_state,
)

PROTOCOLS = {p.name: p for p in (A1, A2, A3, ACOL)}


def get_protocol(name: str) -> ProtocolHandle:
    try:
        return PROTOCOLS[name]
    except KeyError:
        raise ContractError(
            f"unknown protocol {name!r}; expected one of {sorted(PROTOCOLS)}"
        ) from None
