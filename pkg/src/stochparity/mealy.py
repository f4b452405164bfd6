"""Finite-memory strategies represented as Mealy machines.

A strategy for one player is a finite set of memory states, an initial
memory, an update function on (memory, vertex) pairs, and an action
function giving the chosen successor at each (memory, vertex) pair the
player controls. The machine reads every vertex of the play, including
the opponent's and Random's: being at vertex v with memory m means v has
not been read yet, so the move taken at v is action(m, v) and the memory
afterwards is update(m, v). A memoryless strategy is the special case of
a single memory state.

Strategy files are JSON::

    {
      "player": "max",
      "memory_states": ["m0", "m1"],
      "initial": "m0",
      "update": [{"mem": "m0", "vertex": "s", "next": "m1"}, ...],
      "action": [{"mem": "m0", "vertex": "s", "move": "t"}, ...]
    }

with memory states sorted and update/action rows sorted by (mem, vertex).
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, replace
from typing import Iterator, Mapping, Sequence, Union

from .errors import GameFormatError, IllegalPlayError, StrategyError
from .game import GameGraph, Owner, PlayPrefix, _decode, _require_keys


@dataclass(frozen=True, eq=True)
class MealyStrategy:
    player: Owner
    memory_states: tuple[str, ...]
    initial: str
    update: Mapping[tuple[str, str], str]
    action: Mapping[tuple[str, str], str]

    def step(self, mem: str, vertex: str) -> str:
        """Memory after reading `vertex` in memory `mem`."""
        try:
            return self.update[(mem, vertex)]
        except KeyError:
            raise StrategyError(
                f"update not defined for memory {mem!r} at vertex {vertex!r}"
            ) from None

    def move(self, mem: str, vertex: str) -> str:
        """Successor chosen at `vertex` in memory `mem`."""
        try:
            return self.action[(mem, vertex)]
        except KeyError:
            raise StrategyError(
                f"no action for memory {mem!r} at vertex {vertex!r}"
            ) from None

    def read(self, prefix: Sequence[str]) -> str:
        """Memory reached from the initial state after reading a full prefix."""
        mem = self.initial
        for v in prefix:
            mem = self.step(mem, v)
        return mem


def validate_strategy(g: GameGraph, s: MealyStrategy) -> list[str]:
    """Check that a strategy is well formed and fits the game.

    The update function must be total on memory x vertices with targets
    in the memory set; the action function must be defined exactly on
    memory x (vertices owned by the player) and every move must follow
    an existing edge.
    """
    out: list[str] = []
    if s.player not in (Owner.MAX, Owner.MIN):
        out.append(f"player must be max or min, got {s.player!r}")
    mems = set(s.memory_states)
    if not mems:
        out.append("no memory states")
    if len(mems) != len(s.memory_states):
        out.append("duplicate memory states")
    if s.initial not in mems:
        out.append(f"initial memory {s.initial!r} not among memory states")

    owned = set(g.owned_by(s.player)) if s.player in (Owner.MAX, Owner.MIN) else set()
    vids = set(g.vertex_ids)
    for m in s.memory_states:
        for v in g.vertex_ids:
            if (m, v) not in s.update:
                out.append(f"update missing for memory {m!r} at vertex {v!r}")
    for (m, v), nxt in s.update.items():
        if m not in mems:
            out.append(f"update row uses unknown memory {m!r}")
        if v not in vids:
            out.append(f"update row uses unknown vertex {v!r}")
        if nxt not in mems:
            out.append(f"update target {nxt!r} is not a memory state")
    for m in s.memory_states:
        for v in sorted(owned):
            if (m, v) not in s.action:
                out.append(f"action missing for memory {m!r} at vertex {v!r}")
    for (m, v), w in s.action.items():
        if m not in mems:
            out.append(f"action row uses unknown memory {m!r}")
        if v not in owned:
            out.append(f"action row at vertex {v!r} not owned by {s.player.value}")
        elif not g.has_edge(v, w):
            out.append(f"action ({m!r}, {v!r}) -> {w!r} is not an edge")
    return out


def memoryless(g: GameGraph, player: Owner, moves: Mapping[str, str]) -> MealyStrategy:
    """Single-memory strategy playing moves[v] at each vertex the player owns."""
    owned = g.owned_by(player)
    missing = [v for v in owned if v not in moves]
    if missing:
        raise StrategyError(f"no move given for owned vertices {missing}")
    mem = "m0"
    update = {(mem, v): mem for v in g.vertex_ids}
    action = {(mem, v): moves[v] for v in owned}
    return MealyStrategy(player, (mem,), mem, update, action)


def count_memoryless(g: GameGraph, player: Owner) -> int:
    n = 1
    for v in g.owned_by(player):
        n *= len(g.successors[v])
    return n


def enumerate_memoryless(g: GameGraph, player: Owner) -> Iterator[MealyStrategy]:
    """All memoryless strategies for a player, in lexicographic move order.

    Owned vertices are taken in id order and successor choices in id
    order, so the first strategy yielded plays the smallest successor
    everywhere.
    """
    owned = g.owned_by(player)
    pools = [g.successors[v] for v in owned]
    for choice in itertools.product(*pools):
        yield memoryless(g, player, dict(zip(owned, choice)))


def shift_strategy(sigma: MealyStrategy, prefix: PlayPrefix) -> MealyStrategy:
    """The strategy sigma plays after a prefix has already happened.

    Shifting keeps the machine and moves the initial memory to the state
    reached by reading the whole prefix. Shifting by the empty prefix is
    the identity; shifting a memoryless strategy never changes behavior.
    """
    try:
        mem = sigma.read(prefix)
    except StrategyError as exc:
        raise IllegalPlayError(f"prefix not readable by the machine: {exc}") from exc
    return replace(sigma, initial=mem)


def stubborn_strategy(
    g: GameGraph,
    good: Mapping[str, str],
    bad: Mapping[str, str],
    pivot: str,
    k: int,
) -> MealyStrategy:
    """Play `good` until the pivot vertex is visited for the k-th time, then `bad`.

    Memory states m0..m(k-1) count prior pivot visits, saturating at
    k-1; the switch happens on the k-th arrival at the pivot, so k = 1
    plays `bad` from the start. The two move maps are for Max-owned
    vertices.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if pivot not in g.by_id:
        raise StrategyError(f"pivot {pivot!r} is not a vertex")
    mems = tuple(f"m{i}" for i in range(k))
    update = {}
    action = {}
    owned = g.owned_by(Owner.MAX)
    for i, m in enumerate(mems):
        for v in g.vertex_ids:
            bump = min(i + 1, k - 1) if v == pivot else i
            update[(m, v)] = mems[bump]
        for v in owned:
            moves = bad if i == k - 1 else good
            try:
                action[(m, v)] = moves[v]
            except KeyError:
                raise StrategyError(f"no move given for owned vertex {v!r}") from None
    return MealyStrategy(Owner.MAX, mems, mems[0], update, action)


# ---------------------------------------------------------------------------
# file format


def parse_strategy(text: Union[bytes, str]) -> MealyStrategy:
    """Parse a strategy file; fit against a concrete game is checked separately."""
    obj = _decode(text, "strategy file")
    keys = {"player", "memory_states", "initial", "update", "action"}
    _require_keys(obj, keys, keys, "strategy file")
    if obj["player"] not in ("max", "min"):
        raise GameFormatError("strategy file: player must be max or min")
    player = Owner(obj["player"])
    mems = obj["memory_states"]
    if (
        not isinstance(mems, list)
        or not mems
        or not all(isinstance(m, str) and m for m in mems)
    ):
        raise GameFormatError("strategy file: memory_states must be nonempty strings")
    if len(set(mems)) != len(mems):
        raise GameFormatError("strategy file: duplicate memory states")
    initial = obj["initial"]
    if initial not in mems:
        raise GameFormatError("strategy file: initial memory not in memory_states")

    def rows(name: str, value_key: str) -> dict[tuple[str, str], str]:
        table: dict[tuple[str, str], str] = {}
        if not isinstance(obj[name], list):
            raise GameFormatError(f"strategy file: {name} must be an array")
        for i, item in enumerate(obj[name]):
            where = f"{name}[{i}]"
            if not isinstance(item, dict):
                raise GameFormatError(f"{where}: expected an object")
            _require_keys(item, {"mem", "vertex", value_key}, {"mem", "vertex", value_key}, where)
            m, v, target = item["mem"], item["vertex"], item[value_key]
            if not all(isinstance(x, str) for x in (m, v, target)):
                raise GameFormatError(f"{where}: fields must be strings")
            if m not in mems:
                raise GameFormatError(f"{where}: unknown memory {m!r}")
            if (m, v) in table:
                raise GameFormatError(f"{where}: duplicate row for ({m!r}, {v!r})")
            table[(m, v)] = target
        return table

    update = rows("update", "next")
    for (m, v), nxt in update.items():
        if nxt not in mems:
            raise GameFormatError(f"strategy file: update target {nxt!r} unknown")
    action = rows("action", "move")
    return MealyStrategy(player, tuple(sorted(mems)), initial, update, action)


def serialize_strategy(s: MealyStrategy) -> str:
    """Render a strategy in the canonical file format."""
    obj = {
        "player": s.player.value,
        "memory_states": sorted(s.memory_states),
        "initial": s.initial,
        "update": [
            {"mem": m, "vertex": v, "next": s.update[(m, v)]}
            for m, v in sorted(s.update)
        ],
        "action": [
            {"mem": m, "vertex": v, "move": s.action[(m, v)]}
            for m, v in sorted(s.action)
        ],
    }
    return json.dumps(obj, indent=2) + "\n"
