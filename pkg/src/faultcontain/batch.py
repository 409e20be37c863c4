"""Vectorised A_col executor running many independent trials at once.

Each row of the state arrays is one trial with its own key, initial
configuration and (optional) single fault.  Random draws come from the same
counter-based streams as the scalar engine, so row ``t`` reproduces
``engine.run`` with ``Streams(keys[t])`` exactly, including the recovery
clock and the divergence cutoff.

Colors are stored as int64 with ``-1`` for "no color".  Only colors in
``0..Delta`` can ever matter for a membership test (a node only looks up
colors ``<= degree``), so occupied/tabu sets are boolean ``K = Delta + 1``
wide and larger colors are dropped from them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .engine import DEFAULT_MAX_ROUNDS
from .graph import Graph
from .rng import INIT_ROUND, below, coin, derive_array

NO_FAULT, MEMORY, BROADCAST = 0, 1, 2
KEEP = -2  # fault field left unchanged
BOT = -1

# upper bound on rows * n * K booleans held per chunk
_CELL_BUDGET = 1 << 24


@dataclass
class FaultArrays:
    """Per-row single fault description (all arrays of length T).

    ``kind`` is NO_FAULT, MEMORY or BROADCAST.  ``c`` is a color, BOT or KEEP
    and ``final`` is 0, 1 or KEEP; for broadcasts neither may be KEEP.
    """

    kind: np.ndarray
    node: np.ndarray
    c: np.ndarray
    final: np.ndarray
    round: np.ndarray

    @classmethod
    def none(cls, t: int) -> "FaultArrays":
        z = np.zeros(t, dtype=np.int64)
        return cls(z.copy(), z.copy(), np.full(t, KEEP), np.full(t, KEEP), z.copy())

    @classmethod
    def from_scenarios(cls, scenarios) -> "FaultArrays":
        out = cls.none(len(scenarios))
        for i, s in enumerate(scenarios):
            if s is None:
                continue
            out.round[i] = s.injection_round
            if s.kind == "memory":
                from .faults import KEEP as SKEEP

                if s.new_state is not SKEEP:
                    c, f = s.new_state
                    out.c[i] = BOT if c is None else c
                    out.final[i] = int(f)
                else:
                    out.c[i] = KEEP if s.new_c is SKEEP else (BOT if s.new_c is None else s.new_c)
                    out.final[i] = KEEP if s.new_final is SKEEP else int(bool(s.new_final))
                out.kind[i] = MEMORY
                out.node[i] = s.node
            else:
                c, f = s.payload
                out.kind[i] = BROADCAST
                out.node[i] = s.sender
                out.c[i] = BOT if c is None else c
                out.final[i] = int(bool(f))
        return out

    def take(self, idx) -> "FaultArrays":
        return FaultArrays(*(a[idx] for a in (self.kind, self.node, self.c, self.final, self.round)))


@dataclass
class BatchResult:
    rounds_to_legal: np.ndarray  # -1 where never reached
    rounds_to_legitimate: np.ndarray  # -1 where diverged
    contaminated: np.ndarray  # bool [T, n]
    diverged: np.ndarray  # bool [T]


def encode(cfg) -> tuple[np.ndarray, np.ndarray]:
    """ColorState configuration to (colors, finals) arrays."""
    states = getattr(cfg, "states", cfg)
    c = np.array([BOT if s.c is None else s.c for s in states], dtype=np.int64)
    f = np.array([bool(s.final) for s in states], dtype=bool)
    return c, f


def random_states(g: Graph, keys: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Random A_col states per row, identical to ``engine.random_config``."""
    v = np.arange(g.n, dtype=np.int64)[None, :]
    k = keys[:, None]
    h0 = derive_array(k, v, np.int64(INIT_ROUND), np.int64(0))
    h1 = derive_array(k, v, np.int64(INIT_ROUND), np.int64(1))
    c = below(h0, g.max_degree + 2) - 1
    return c.astype(np.int64), coin(h1)


class _Topology:
    def __init__(self, g: Graph):
        self.n = g.n
        self.K = g.max_degree + 1
        indptr, indices = g.csr
        self.deg = np.diff(indptr)
        self.src = np.repeat(np.arange(g.n, dtype=np.int64), self.deg)
        self.dst = indices
        e = np.array(g.edges(), dtype=np.int64).reshape(-1, 2)
        self.eu, self.ev = e[:, 0], e[:, 1]
        self.color_range = np.arange(self.K, dtype=np.int64)


def _legal(top: _Topology, c: np.ndarray) -> np.ndarray:
    ok = ((c >= 0) & (c <= top.deg[None, :])).all(axis=1)
    if top.eu.size:
        ok &= (c[:, top.eu] != c[:, top.ev]).all(axis=1)
    return ok


def _step(top: _Topology, c, f, pc, pf, keys, r):
    """One A_col round for m rows; returns new (c, f)."""
    m, n, K = c.shape[0], top.n, top.K
    occupied = np.zeros((m, n, K), dtype=bool)
    tabu = np.zeros((m, n, K), dtype=bool)
    nc = pc[:, top.dst]
    nf = pf[:, top.dst]
    valid = (nc >= 0) & (nc < K)
    rows, e = np.nonzero(valid)
    occupied[rows, top.src[e], nc[rows, e]] = True
    sel = nf[rows, e]
    tabu[rows[sel], top.src[e[sel]], nc[rows[sel], e[sel]]] = True

    deg = top.deg[None, :]
    bad = (c < 0) | (c > deg)
    ci = np.clip(c, 0, K - 1)[..., None]
    in_tabu = np.take_along_axis(tabu, ci, axis=2)[..., 0]
    in_occ = np.take_along_axis(occupied, ci, axis=2)[..., 0]
    final = f.copy()
    final[bad] = False
    good = ~bad
    final[good & f & in_tabu] = False
    final[good & ~f & ~in_occ] = True

    new_c = c.copy()
    ri, vi = np.nonzero(~final)
    if ri.size:
        k = keys[ri]
        h0 = derive_array(k, vi, np.int64(r), np.int64(0))
        h1 = derive_array(k, vi, np.int64(r), np.int64(1))
        drawn = np.full(ri.size, BOT, dtype=np.int64)
        colored = ~coin(h0)
        if colored.any():
            rr, vv = ri[colored], vi[colored]
            avail = (~tabu[rr, vv]) & (top.color_range[None, :] <= top.deg[vv][:, None])
            idx = below(h1[colored], avail.sum(axis=1))
            drawn[colored] = np.argmax(np.cumsum(avail, axis=1) > idx[:, None], axis=1)
        new_c[ri, vi] = drawn
    return new_c, final


def run_batch(
    g: Graph,
    c0: np.ndarray,
    f0: np.ndarray,
    keys: np.ndarray,
    faults: FaultArrays | None = None,
    max_rounds: int = DEFAULT_MAX_ROUNDS,
    start_round: int = 0,
) -> BatchResult:
    """Run every row to legitimacy (or divergence) on the recovery clock."""
    t = keys.shape[0]
    if faults is None:
        faults = FaultArrays.none(t)
    c0 = np.broadcast_to(c0, (t, g.n))
    f0 = np.broadcast_to(f0, (t, g.n))
    top = _Topology(g)
    chunk = max(1, _CELL_BUDGET // max(1, g.n * top.K))
    legal = np.full(t, -1, dtype=np.int64)
    legit = np.full(t, -1, dtype=np.int64)
    contaminated = np.zeros((t, g.n), dtype=bool)
    diverged = np.zeros(t, dtype=bool)
    for lo in range(0, t, chunk):
        sl = slice(lo, min(t, lo + chunk))
        _run_chunk(
            top, np.array(c0[sl]), np.array(f0[sl]), keys[sl].astype(np.uint64),
            faults.take(sl), max_rounds, start_round,
            legal[sl], legit[sl], contaminated[sl], diverged[sl],
        )
    return BatchResult(legal, legit, contaminated, diverged)


def _run_chunk(top, c, f, keys, fa, max_rounds, start, legal, legit, contaminated, diverged):
    m = c.shape[0]
    clock = np.where(
        fa.kind == MEMORY, fa.round, np.where(fa.kind == BROADCAST, fa.round + 1, start)
    )
    contam_from = np.where(fa.kind == NO_FAULT, start, fa.round)
    active = np.arange(m)
    r = start
    while active.size:
        mem = active[(fa.kind[active] == MEMORY) & (fa.round[active] == r)]
        if mem.size:
            nodes = fa.node[mem]
            setc = fa.c[mem] != KEEP
            c[mem[setc], nodes[setc]] = fa.c[mem[setc]]
            setf = fa.final[mem] != KEEP
            f[mem[setf], nodes[setf]] = fa.final[mem[setf]].astype(bool)

        on = active[clock[active] <= r]
        if on.size:
            ok = _legal(top, c[on])
            first = on[ok & (legal[on] < 0)]
            legal[first] = r - clock[first]
            done = on[ok & f[on].all(axis=1)]
            legit[done] = r - clock[done]
            active = np.setdiff1d(active, done, assume_unique=True)
        if r - start >= max_rounds and active.size:
            diverged[active] = True
            break
        if not active.size:
            break

        pc = c[active]
        pf = f[active]
        cc, ff = pc.copy(), pf.copy()
        bc = np.nonzero((fa.kind[active] == BROADCAST) & (fa.round[active] == r))[0]
        if bc.size:
            rows = active[bc]
            pc[bc, fa.node[rows]] = fa.c[rows]
            pf[bc, fa.node[rows]] = fa.final[rows].astype(bool)
        nc, nf = _step(top, cc, ff, pc, pf, keys[active], r)
        changed = (nc != cc) | (nf != ff)
        track = contam_from[active] <= r
        contaminated[active[track]] |= changed[track]
        c[active] = nc
        f[active] = nf
        r += 1
