"""Product chains, recurrent-class analysis, and one-sided optimization.

Fixing a Max strategy and a Min strategy turns a game into a finite
Markov chain over (vertex, max memory, min memory) states. A play ends
up in one of the chain's closed recurrent classes (bottom SCCs) with
probability one, and visits exactly the vertices of that class
infinitely often, so the parity condition is decided by the least
priority inside the class. Win probabilities are therefore exact:
classify each bottom SCC, then solve the absorption system with
rational arithmetic.

Fixing only one player's strategy leaves a finite MDP over (vertex,
memory) pairs. Parity MDPs admit optimal policies that are memoryless
on the product, so the free player's best value is found by exhaustive
enumeration of product policies; the enumeration is capped and the cap
reported when exceeded.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Callable, Hashable, Iterable, Sequence

from .errors import CapExceededError, DeterminacyError, IllegalPlayError, StrategyError
from .game import GameGraph, Owner
from .linalg import solve_linear
from .mealy import MealyStrategy

# (vertex, max memory, min memory)
State = tuple[str, str, str]


class Outcome(Enum):
    WIN = "win"
    LOSE = "lose"
    TRUNCATED = "truncated"


@dataclass
class ProductChain:
    """Finite Markov chain induced by a game and a strategy pair.

    Only states reachable from the requested start vertices are
    materialized. `label` carries each state's vertex priority and
    `start` maps every requested start vertex to its product state.
    """

    states: tuple[State, ...]
    transitions: dict[State, tuple[tuple[State, Fraction], ...]]
    label: dict[State, int]
    start: dict[str, State]
    _bsccs: list[frozenset[State]] | None = field(default=None, repr=False)

    def bsccs(self) -> list[frozenset[State]]:
        if self._bsccs is None:
            self._bsccs = _bottom_sccs(
                self.states, lambda s: [t for t, _ in self.transitions[s]]
            )
        return self._bsccs


def _tarjan_sccs(
    nodes: Sequence[Hashable], succ: Callable[[Hashable], Iterable[Hashable]]
) -> list[list[Hashable]]:
    """Strongly connected components, iterative to spare the recursion limit."""
    index: dict = {}
    low: dict = {}
    onstack: set = set()
    stack: list = []
    comps: list[list] = []
    counter = itertools.count()

    for root in nodes:
        if root in index:
            continue
        index[root] = low[root] = next(counter)
        stack.append(root)
        onstack.add(root)
        work = [(root, iter(succ(root)))]
        while work:
            node, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = next(counter)
                    stack.append(w)
                    onstack.add(w)
                    work.append((w, iter(succ(w))))
                    advanced = True
                    break
                if w in onstack:
                    low[node] = min(low[node], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                comp = []
                while True:
                    w = stack.pop()
                    onstack.discard(w)
                    comp.append(w)
                    if w == node:
                        break
                comps.append(comp)
    return comps


def _bottom_sccs(nodes, succ) -> list[frozenset]:
    out = []
    for comp in _tarjan_sccs(nodes, succ):
        members = frozenset(comp)
        if all(w in members for s in comp for w in succ(s)):
            out.append(members)
    out.sort(key=lambda c: tuple(sorted(c)))
    return out


def product_chain(
    g: GameGraph,
    sigma: MealyStrategy,
    tau: MealyStrategy,
    start_vertices: Iterable[str],
) -> ProductChain:
    """Build the chain induced by a Max and a Min strategy.

    Both machines read every vertex. Controlled moves follow the owning
    strategy's action as given; the construction only requires action
    targets to be vertices of the game, so machines whose actions
    reference edges absent from `g` (for instance edges removed by
    pruning) still induce a well-defined chain.
    """
    if sigma.player is not Owner.MAX:
        raise StrategyError("sigma must be a Max strategy")
    if tau.player is not Owner.MIN:
        raise StrategyError("tau must be a Min strategy")
    starts = sorted(set(start_vertices))
    for v in starts:
        if v not in g.by_id:
            raise IllegalPlayError(f"start vertex {v!r} is not in the game")

    def expand(s: State) -> tuple[tuple[State, Fraction], ...]:
        v, mx, mn = s
        mx2, mn2 = sigma.step(mx, v), tau.step(mn, v)
        owner = g.owner(v)
        if owner is Owner.RANDOM:
            rows = [(w, p) for w, p in g.distribution[v]]
        elif owner is Owner.MAX:
            rows = [(sigma.move(mx, v), Fraction(1))]
        else:
            rows = [(tau.move(mn, v), Fraction(1))]
        for w, _ in rows:
            if w not in g.by_id:
                raise StrategyError(f"strategy moves to unknown vertex {w!r}")
        return tuple(((w, mx2, mn2), p) for w, p in rows)

    start = {v: (v, sigma.initial, tau.initial) for v in starts}
    states: list[State] = []
    transitions: dict[State, tuple[tuple[State, Fraction], ...]] = {}
    label: dict[State, int] = {}
    queue = [start[v] for v in starts]
    seen = set(queue)
    while queue:
        s = queue.pop(0)
        states.append(s)
        label[s] = g.priority(s[0])
        transitions[s] = expand(s)
        for t, _ in transitions[s]:
            if t not in seen:
                seen.add(t)
                queue.append(t)
    return ProductChain(tuple(states), transitions, label, start)


def bsccs(chain: ProductChain) -> list[frozenset[State]]:
    """Closed recurrent classes (bottom SCCs), in a deterministic order."""
    return chain.bsccs()


def classify_bscc(chain: ProductChain, component: Iterable[State]) -> Outcome:
    """Win iff the least priority inside the class is even."""
    members = frozenset(component)
    if members not in set(chain.bsccs()):
        raise ValueError("not a closed recurrent class of this chain")
    return Outcome.WIN if min(chain.label[s] for s in members) % 2 == 0 else Outcome.LOSE


def _absorption(
    states: Sequence[Hashable],
    transitions: dict,
    target: frozenset,
) -> dict:
    """P(reach target) for every state; target must be closed."""
    preds: dict = {s: [] for s in states}
    for s in states:
        for t, p in transitions[s]:
            if p != 0:
                preds[t].append(s)
    reach = set(target)
    queue = list(target)
    while queue:
        s = queue.pop()
        for r in preds[s]:
            if r not in reach:
                reach.add(r)
                queue.append(r)

    unknown = [s for s in states if s in reach and s not in target]
    pos = {s: i for i, s in enumerate(unknown)}
    n = len(unknown)
    matrix = [[Fraction(0)] * n for _ in range(n)]
    rhs = [Fraction(0)] * n
    for s in unknown:
        i = pos[s]
        matrix[i][i] += 1
        for t, p in transitions[s]:
            if t in target:
                rhs[i] += p
            elif t in pos:
                matrix[i][pos[t]] -= p
    solved = solve_linear(matrix, rhs) if n else []

    out: dict = {}
    for s in states:
        if s in target:
            out[s] = Fraction(1)
        elif s in pos:
            out[s] = solved[pos[s]]
        else:
            out[s] = Fraction(0)
    return out


def absorption_probabilities(
    chain: ProductChain, target: Iterable[State]
) -> dict[State, Fraction]:
    """Exact probability of reaching `target` from every state.

    The target must be a union of the chain's closed recurrent classes;
    everything that cannot reach it gets probability zero and the
    remaining states are solved as one rational linear system.
    """
    wanted = frozenset(target)
    covered: set[State] = set()
    for c in chain.bsccs():
        if c <= wanted:
            covered |= c
    if covered != wanted:
        raise ValueError("target is not a union of closed recurrent classes")
    return _absorption(chain.states, chain.transitions, wanted)


def _chain_values(states, transitions, label) -> dict:
    """Win probability of every state of an arbitrary finite chain."""
    bottoms = _bottom_sccs(states, lambda s: [t for t, _ in transitions[s]])
    winning: set = set()
    for c in bottoms:
        if min(label[s] for s in c) % 2 == 0:
            winning |= c
    return _absorption(states, transitions, frozenset(winning))


def chain_win_probability(
    g: GameGraph,
    sigma: MealyStrategy,
    tau: MealyStrategy,
    start_vertices: Iterable[str],
) -> dict[str, Fraction]:
    """Exact Max win probability from each start vertex under (sigma, tau)."""
    chain = product_chain(g, sigma, tau, start_vertices)
    values = _chain_values(chain.states, chain.transitions, chain.label)
    return {v: values[s] for v, s in chain.start.items()}


class _ProductMdp:
    """The one-player decision process left when one strategy is fixed."""

    def __init__(self, g: GameGraph, fixed: MealyStrategy, free_player: Owner):
        if free_player not in (Owner.MAX, Owner.MIN):
            raise StrategyError("free player must be max or min")
        if fixed.player is free_player:
            raise StrategyError("fixed strategy belongs to the free player")
        mems = sorted(fixed.memory_states)
        self.states = [(v, m) for v in g.vertex_ids for m in mems]
        self.label = {(v, m): g.priority(v) for v, m in self.states}
        self.fixed = fixed
        self.prefer = max if free_player is Owner.MAX else min

        self.base: dict[tuple[str, str], tuple] = {}
        self.choice_states: list[tuple[str, str]] = []
        for v, m in self.states:
            owner = g.owner(v)
            m2 = fixed.step(m, v)
            if owner is free_player:
                self.choice_states.append((v, m))
            elif owner is Owner.RANDOM:
                self.base[(v, m)] = tuple(((w, m2), p) for w, p in g.distribution[v])
            else:
                w = fixed.move(m, v)
                if w not in g.by_id:
                    raise StrategyError(f"strategy moves to unknown vertex {w!r}")
                self.base[(v, m)] = (((w, m2), Fraction(1)),)
        self.pools = [g.successors[v] for v, _ in self.choice_states]

    def check_cap(self, cap: int) -> None:
        count = math.prod(len(p) for p in self.pools)
        if count > cap:
            raise CapExceededError(count, cap, "policy enumeration")

    def values_of(self, choice: tuple[str, ...]) -> dict:
        trans = dict(self.base)
        for (v, m), w in zip(self.choice_states, choice):
            trans[(v, m)] = (((w, self.fixed.step(m, v)), Fraction(1)),)
        return _chain_values(self.states, trans, self.label)

    def envelope(self) -> dict[tuple[str, str], Fraction]:
        best = None
        for choice in itertools.product(*self.pools):
            vals = self.values_of(choice)
            if best is None:
                best = vals
            else:
                best = {s: self.prefer(best[s], vals[s]) for s in best}
        assert best is not None
        return best


def mdp_table(
    g: GameGraph,
    fixed: MealyStrategy,
    free_player: Owner,
    cap: int = 2**20,
) -> dict[tuple[str, str], Fraction]:
    """Like mdp_value but returns only the per-pair optimum (faster)."""
    mdp = _ProductMdp(g, fixed, free_player)
    mdp.check_cap(cap)
    return mdp.envelope()


def mdp_value(
    g: GameGraph,
    fixed: MealyStrategy,
    free_player: Owner,
    cap: int = 2**20,
) -> tuple[dict[tuple[str, str], Fraction], MealyStrategy]:
    """Optimal value against `fixed` at every (vertex, memory) pair.

    One strategy is fixed; the other player picks any strategy. Their
    best achievable win probability is attained by a policy that is
    memoryless on the (vertex, memory) product, so all such policies
    are enumerated: maximized for a free Max, minimized for a free Min.
    Returns the per-pair optimum together with one policy attaining it
    at every pair simultaneously, folded back into a Mealy strategy
    that reuses the fixed machine's memory structure. Enumeration order
    is lexicographic in (vertex, memory) and successor ids, so the
    witness is the first optimal policy in that order.
    """
    mdp = _ProductMdp(g, fixed, free_player)
    mdp.check_cap(cap)
    best = mdp.envelope()

    witness_choice = None
    for choice in itertools.product(*mdp.pools):
        if mdp.values_of(choice) == best:
            witness_choice = choice
            break
    if witness_choice is None:
        raise DeterminacyError(
            "no single product policy is optimal at every state; this is a bug"
        )

    action = {(m, v): w for (v, m), w in zip(mdp.choice_states, witness_choice)}
    witness = MealyStrategy(
        free_player,
        fixed.memory_states,
        fixed.initial,
        dict(fixed.update),
        action,
    )
    return best, witness
