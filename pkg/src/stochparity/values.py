"""Exact game values, local value equations, and superfluous-edge pruning.

Values are computed by dual enumeration: for every pair of memoryless
strategies the induced chain is solved exactly, then lower (max of row
minima) and upper (min of column maxima) envelopes are compared. Both
players have memoryless optimal strategies in these games, so the two
envelopes must coincide; any mismatch is reported as an implementation
bug rather than silently resolved.

The resulting value map satisfies the local equations (max over
successors at Max vertices, min at Min vertices, the weighted average
at Random vertices). Controlled edges that lose value (a Max edge into
a strictly smaller value, a Min edge into a strictly larger one) are
never used by optimal play and can be removed; after this pruning every
controlled edge preserves the value exactly, a shape called consistent
here. Consistency is what makes the per-step value sequence of a play a
martingale, which the deviation analysis in `resets` builds on.

Solution files are JSON::

    {
      "values": {"s": "7/8", ...},
      "sigma_star": {...strategy...},
      "tau_star": {...strategy...},
      "consistent": false,
      "m": "1/2"
    }

with "m" the smallest strictly positive value, rendered as "inf" when
every vertex has value zero.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .chains import chain_win_probability
from .errors import (
    CapExceededError,
    DeterminacyError,
    GameFormatError,
    StaleValuesError,
)
from .game import (
    GameGraph,
    Owner,
    format_rational,
    parse_rational,
    _decode,
    _require_keys,
)
from .mealy import (
    MealyStrategy,
    count_memoryless,
    enumerate_memoryless,
    parse_strategy,
    serialize_strategy,
)

ValueMap = dict[str, Fraction]


@dataclass
class Solution:
    """Solver output: exact values plus optimal memoryless witnesses."""

    values: ValueMap
    sigma_star: MealyStrategy
    tau_star: MealyStrategy
    consistent: bool
    m: Union[Fraction, float]
    lower_enum: Union[ValueMap, None] = None
    upper_enum: Union[ValueMap, None] = None


def check_value_equations(g: GameGraph, vals: ValueMap) -> list[str]:
    """Local value equation violations; empty means vals is a fixed point."""
    out: list[str] = []
    for v in g.vertex_ids:
        if v not in vals:
            out.append(f"no value for vertex {v!r}")
    if out:
        return out
    for v in g.vertex_ids:
        owner = g.owner(v)
        if owner is Owner.MAX:
            expect = max(vals[w] for w in g.successors[v])
        elif owner is Owner.MIN:
            expect = min(vals[w] for w in g.successors[v])
        else:
            expect = sum((p * vals[w] for w, p in g.distribution[v]), Fraction(0))
        if vals[v] != expect:
            out.append(
                f"value equation fails at {v!r}: stored {vals[v]}, "
                f"successors give {expect}"
            )
    return out


def min_positive_value(vals: ValueMap) -> Union[Fraction, float]:
    """Smallest strictly positive value, or math.inf when all values are zero."""
    positive = [x for x in vals.values() if x > 0]
    return min(positive) if positive else math.inf


def is_consistent(g: GameGraph, vals: ValueMap) -> bool:
    """True iff every controlled edge preserves the value exactly."""
    for e in g.edges:
        if g.owner(e.src) is not Owner.RANDOM and vals[e.dst] != vals[e.src]:
            return False
    return True


def prune_superfluous(g: GameGraph, vals: ValueMap) -> GameGraph:
    """Remove controlled edges that strictly lose value for their owner.

    A Max edge into a strictly smaller value or a Min edge into a
    strictly larger one is never part of optimal play; dropping them
    all preserves every vertex value and leaves a game in which every
    remaining controlled edge is value-preserving. The value map is
    re-checked against the game first so stale values cannot silently
    produce a wrong pruning.
    """
    violations = check_value_equations(g, vals)
    if violations:
        raise StaleValuesError("; ".join(violations))
    kept = []
    for e in g.edges:
        owner = g.owner(e.src)
        if owner is Owner.MAX and vals[e.dst] < vals[e.src]:
            continue
        if owner is Owner.MIN and vals[e.dst] > vals[e.src]:
            continue
        kept.append(e)
    pruned = GameGraph(g.name, g.vertices, tuple(kept))
    # the owner's equation is attained by some successor, so none can go bare
    assert all(pruned.successors[v] for v in pruned.vertex_ids)
    return pruned


def solve_game(g: GameGraph, cap: int = 2**20) -> Solution:
    """Exact values and optimal memoryless strategies for both players.

    Enumerates all memoryless strategy pairs (capped), solves each
    induced chain exactly, and takes the max-of-minima envelope for Max
    and the min-of-maxima envelope for Min. The two envelopes agreeing
    at every vertex is the determinacy check; the returned witnesses
    are the enumeration-first strategies achieving their envelope at
    every vertex simultaneously, which makes them the lexicographically
    smallest optimal move choices.
    """
    n_pairs = count_memoryless(g, Owner.MAX) * count_memoryless(g, Owner.MIN)
    if n_pairs > cap:
        raise CapExceededError(n_pairs, cap, "strategy pair enumeration")

    sigmas = list(enumerate_memoryless(g, Owner.MAX))
    taus = list(enumerate_memoryless(g, Owner.MIN))
    vertices = g.vertex_ids

    row_min: list[ValueMap] = []
    col_max: list[ValueMap] = [dict() for _ in taus]
    for sigma in sigmas:
        mins: ValueMap | None = None
        for j, tau in enumerate(taus):
            p = chain_win_probability(g, sigma, tau, vertices)
            if mins is None:
                mins = dict(p)
            else:
                mins = {v: min(mins[v], p[v]) for v in vertices}
            cm = col_max[j]
            for v in vertices:
                if v not in cm or p[v] > cm[v]:
                    cm[v] = p[v]
        assert mins is not None
        row_min.append(mins)

    lower = {v: max(r[v] for r in row_min) for v in vertices}
    upper = {v: min(c[v] for c in col_max) for v in vertices}
    if lower != upper:
        raise DeterminacyError(
            "lower and upper enumerations disagree; this is a bug: "
            + ", ".join(
                f"{v}: {lower[v]} vs {upper[v]}" for v in vertices if lower[v] != upper[v]
            )
        )

    sigma_star = next(
        (s for s, r in zip(sigmas, row_min) if r == lower), None
    )
    tau_star = next((t for t, c in zip(taus, col_max) if c == upper), None)
    if sigma_star is None or tau_star is None:
        raise DeterminacyError("no uniformly optimal memoryless strategy; this is a bug")

    return Solution(
        values=lower,
        sigma_star=sigma_star,
        tau_star=tau_star,
        consistent=is_consistent(g, lower),
        m=min_positive_value(lower),
        lower_enum=lower,
        upper_enum=upper,
    )


# ---------------------------------------------------------------------------
# file format


def serialize_solution(sol: Solution) -> str:
    obj = {
        "values": {v: format_rational(x) for v, x in sorted(sol.values.items())},
        "sigma_star": json.loads(serialize_strategy(sol.sigma_star)),
        "tau_star": json.loads(serialize_strategy(sol.tau_star)),
        "consistent": sol.consistent,
        "m": "inf" if sol.m == math.inf else format_rational(sol.m),
    }
    return json.dumps(obj, indent=2) + "\n"


def parse_solution(text: Union[bytes, str]) -> Solution:
    obj = _decode(text, "solution file")
    keys = {"values", "sigma_star", "tau_star", "consistent", "m"}
    _require_keys(obj, keys, keys, "solution file")
    if not isinstance(obj["values"], dict):
        raise GameFormatError("solution file: values must be an object")
    values = {
        v: parse_rational(x, f"values[{v!r}]") for v, x in obj["values"].items()
    }
    if not isinstance(obj["consistent"], bool):
        raise GameFormatError("solution file: consistent must be a boolean")
    m: Union[Fraction, float]
    if obj["m"] == "inf":
        m = math.inf
    else:
        m = parse_rational(obj["m"], "m")
    return Solution(
        values=values,
        sigma_star=parse_strategy(json.dumps(obj["sigma_star"])),
        tau_star=parse_strategy(json.dumps(obj["tau_star"])),
        consistent=obj["consistent"],
        m=m,
    )
