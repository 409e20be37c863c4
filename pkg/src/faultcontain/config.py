"""Experiment configuration files (INI syntax, read with configparser).

Grammar::

    [experiment]
    format = 1                  ; required, must be 1
    protocol = acol             ; a1 | a2 | a3 | acol
    trials = 1000
    seed = 42                   ; required, no wall-clock seeding
    max_rounds = 10000          ; optional

    [graph]
    family = star               ; star | path | complete | gnp | unit_disc | hub_over_h | staircase
    d = 5                       ; family parameters (n, p, radius, seed, delta, ...)
    ; hub_over_h takes the embedded graph as h_family = ..., h_<param> = ...

    [scenario]
    family = worst-case-broadcast   ; worst-case-broadcast | memory-sweep | explicit | none
    nodes = 0                   ; node list or "all" (scenario families)
    start = canonical           ; canonical | seeded
    start_seed = 1              ; seed of the legitimate start when start = seeded
    ; explicit scenarios:
    kind = memory               ; memory | broadcast
    node = 0
    c = 3                       ; color, "bot" or "keep"
    final = false               ; true | false | keep
    state = 4                   ; whole new state for a1/a2/a3 (IN/OUT or a color)
    injection_round = 0

    [output]
    dir = results               ; overridden by $FAULTCONTAIN_OUTPUT_DIR
    csv = summary.csv
    json = summary.json

    [checks]
    radius_cap = 1              ; defaults to the protocol's proven radius

Every error raises :class:`ConfigError` naming the offending ``section.key``.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .errors import ConfigError, ParameterError
from .graph import FAMILIES, GraphSpec
from .protocols import PROTOCOLS

OUTPUT_DIR_ENV = "FAULTCONTAIN_OUTPUT_DIR"
SCENARIO_FAMILIES = ("worst-case-broadcast", "memory-sweep", "explicit", "none")

_INT_PARAMS = {"d", "n", "seed", "delta"}
_FLOAT_PARAMS = {"p", "radius"}


@dataclass
class ScenarioConfig:
    family: str = "none"
    nodes: object = (0,)  # tuple of ints or "all"
    start: str = "canonical"
    start_seed: int = 0
    kind: Optional[str] = None
    node: int = 0
    c: object = "keep"
    final: object = "keep"
    state: object = "keep"
    injection_round: int = 0


@dataclass
class ExperimentConfig:
    protocol: str
    trials: int
    seed: int
    graph: GraphSpec
    scenario: ScenarioConfig
    max_rounds: int = 10_000
    output_dir: Path = Path(".")
    csv_name: Optional[str] = "summary.csv"
    json_name: Optional[str] = "summary.json"
    radius_cap: Optional[int] = None
    extra: dict = field(default_factory=dict)


def _get_int(sec, section, key, default=None, minimum=None):
    raw = sec.get(key)
    if raw is None:
        if default is None:
            raise ConfigError(f"{section}.{key}", "missing")
        return default
    try:
        value = int(raw, 0)
    except ValueError:
        raise ConfigError(f"{section}.{key}", f"expected an integer, got {raw!r}") from None
    if minimum is not None and value < minimum:
        raise ConfigError(f"{section}.{key}", f"must be >= {minimum}, got {value}")
    return value


def graph_params(items: dict, section: str, prefix: str = "") -> dict:
    params = {}
    for key, raw in items.items():
        if not key.startswith(prefix) or key == prefix + "family":
            continue
        name = key[len(prefix):]
        if prefix == "" and name.startswith("h_"):
            continue
        try:
            if name in _INT_PARAMS:
                params[name] = int(raw, 0)
            elif name in _FLOAT_PARAMS:
                params[name] = float(raw)
            else:
                raise ConfigError(f"{section}.{key}", "unknown graph parameter")
        except ValueError:
            raise ConfigError(f"{section}.{key}", f"cannot parse {raw!r}") from None
    return params


def _parse_graph(cp) -> GraphSpec:
    if not cp.has_section("graph"):
        raise ConfigError("graph", "missing section")
    sec = dict(cp["graph"])
    family = sec.get("family")
    if family not in FAMILIES:
        raise ConfigError("graph.family", f"expected one of {FAMILIES}, got {family!r}")
    params = graph_params(sec, "graph")
    if family == "hub_over_h":
        h_family = sec.get("h_family")
        if h_family not in FAMILIES or h_family == "hub_over_h":
            raise ConfigError("graph.h_family", f"invalid embedded family {h_family!r}")
        params["h"] = GraphSpec(h_family, graph_params(sec, "graph", "h_"))
    return GraphSpec(family, params)


def _parse_value(raw: str, key: str, allow_bool=False):
    low = raw.strip().lower()
    if low == "keep":
        return "keep"
    if low in ("bot", "none", "bottom"):
        return None
    if allow_bool and low in ("true", "false"):
        return low == "true"
    if low in ("in", "out"):
        return low.upper()
    try:
        return int(low, 0)
    except ValueError:
        raise ConfigError(f"scenario.{key}", f"cannot parse {raw!r}") from None


def _parse_scenario(cp) -> ScenarioConfig:
    if not cp.has_section("scenario"):
        return ScenarioConfig()
    sec = cp["scenario"]
    sc = ScenarioConfig()
    sc.family = sec.get("family", "none").strip()
    if sc.family not in SCENARIO_FAMILIES:
        raise ConfigError("scenario.family", f"expected one of {SCENARIO_FAMILIES}, got {sc.family!r}")
    nodes = sec.get("nodes", "0").strip()
    if nodes == "all":
        sc.nodes = "all"
    else:
        try:
            sc.nodes = tuple(int(x) for x in nodes.split(",") if x.strip())
        except ValueError:
            raise ConfigError("scenario.nodes", f"expected 'all' or a comma list, got {nodes!r}") from None
    sc.start = sec.get("start", "canonical").strip()
    if sc.start not in ("canonical", "seeded"):
        raise ConfigError("scenario.start", f"expected canonical or seeded, got {sc.start!r}")
    sc.start_seed = _get_int(sec, "scenario", "start_seed", 0, 0)
    sc.injection_round = _get_int(sec, "scenario", "injection_round", 0, 0)
    if sc.family == "explicit":
        sc.kind = sec.get("kind")
        if sc.kind not in ("memory", "broadcast"):
            raise ConfigError("scenario.kind", f"expected memory or broadcast, got {sc.kind!r}")
        sc.node = _get_int(sec, "scenario", "node", None, 0)
        sc.c = _parse_value(sec.get("c", "keep"), "c")
        sc.final = _parse_value(sec.get("final", "keep"), "final", allow_bool=True)
        sc.state = _parse_value(sec.get("state", "keep"), "state")
    return sc


def load_config(path) -> ExperimentConfig:
    """Parse and validate an experiment file."""
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except OSError as exc:
        raise ConfigError("path", f"cannot read {path}: {exc.strerror}") from None
    except configparser.Error as exc:
        raise ConfigError("syntax", str(exc).splitlines()[0]) from None
    if not cp.has_section("experiment"):
        raise ConfigError("experiment", "missing section")
    ex = cp["experiment"]
    if ex.get("format") != "1":
        raise ConfigError("experiment.format", f"expected 1, got {ex.get('format')!r}")
    protocol = ex.get("protocol")
    if protocol not in PROTOCOLS:
        raise ConfigError("experiment.protocol", f"unknown protocol {protocol!r}; expected one of {sorted(PROTOCOLS)}")
    cfg = ExperimentConfig(
        protocol=protocol,
        trials=_get_int(ex, "experiment", "trials", None, 1),
        seed=_get_int(ex, "experiment", "seed", None, 0),
        graph=_parse_graph(cp),
        scenario=_parse_scenario(cp),
        max_rounds=_get_int(ex, "experiment", "max_rounds", 10_000, 1),
    )
    if cp.has_section("output"):
        out = cp["output"]
        cfg.output_dir = Path(out.get("dir", "."))
        cfg.csv_name = out.get("csv", "summary.csv") or None
        cfg.json_name = out.get("json", "summary.json") or None
    env = os.environ.get(OUTPUT_DIR_ENV)
    if env:
        cfg.output_dir = Path(env)
    if cp.has_section("checks") and "radius_cap" in cp["checks"]:
        cfg.radius_cap = _get_int(cp["checks"], "checks", "radius_cap", None, 0)
    return cfg


def build_graph(cfg: ExperimentConfig):
    from .graph import generate

    try:
        return generate(cfg.graph)
    except ParameterError as exc:
        raise ConfigError(f"graph.{exc.field}", str(exc)) from None
