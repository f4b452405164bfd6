"""The nine headline guarantees, one test and one printed verdict line each.

Run with `pytest tests/test_acceptance.py -v -s` to see the verdict lines
as they pass; without -s they still print on failure. Everything except
the sampling agreement in criterion 9 is exact rational arithmetic with
zero tolerance.
"""

from __future__ import annotations

import itertools
import random as stdrandom
import time
from contextlib import contextmanager
from dataclasses import replace
from fractions import Fraction

import pytest

from stochparity import (
    Owner,
    check_value_equations,
    deviation_bound,
    deviation_probability,
    dual_game,
    enumerate_memoryless,
    estimate_value,
    is_consistent,
    lower_value,
    memoryless,
    optimality_gap,
    product_chain,
    prune_superfluous,
    quality_table,
    random_game,
    reset_transform,
    shift_strategy,
    solve_game,
    stubborn_strategy,
    upper_value,
    validate_strategy,
)
from stochparity import fixtures as fx

PAIR_CAP = 2**10


@contextmanager
def criterion(num: int, slug: str):
    try:
        yield
    except BaseException:
        print(f"ACCEPTANCE criterion-{num} {slug}: FAIL")
        raise
    print(f"ACCEPTANCE criterion-{num} {slug}: PASS")


def corpus_games():
    games = [fx.g1(), fx.g2(), fx.g3()]
    for seed in range(1, 201):
        games.append(
            random_game(
                seed,
                2 + seed % 5,
                seed % 3,
                1 + seed % 3,
                Fraction(seed % 4, 6),
            )
        )
    return games


@pytest.fixture(scope="module")
def corpus():
    out = []
    for g in corpus_games():
        sol = solve_game(g)
        out.append((g, sol, prune_superfluous(g, sol.values)))
    return out


def g1_stubborn():
    g1 = fx.g1()
    return stubborn_strategy(
        g1,
        good={"a": "w", "w": "w", "l": "l"},
        bad={"a": "l", "w": "w", "l": "l"},
        pivot="a",
        k=2,
    )


@pytest.fixture(scope="module")
def repaired():
    """Reset transforms of every bundled near-optimal strategy.

    Entries are (consistent game, values, reset) and include a Min-player
    case encoded through the priority-shifted complement, where the same
    machine repairs the complementary objective.
    """
    entries = []

    g1, g2, g3 = fx.g1(), fx.g2(), fx.g3()
    sol1, sol2, sol3 = solve_game(g1), solve_game(g2), solve_game(g3)
    g1p = prune_superfluous(g1, sol1.values)
    g3p = prune_superfluous(g3, sol3.values)

    retry = memoryless(g3, Owner.MAX, {"s": "t", "w": "w", "l": "l"})
    cases = [
        (g1p, sol1, [sol1.sigma_star, g1_stubborn()]),
        (g2, sol2, [fx.trivial_max(g2)]),
        (g3p, sol3, [fx.sigma3(), fx.stubborn3(3), retry, sol3.sigma_star]),
    ]

    # shifting every priority up by two preserves the objective, and on
    # that copy the original Min player's repair runs as a Max repair
    dh = dual_game(dual_game(g3))
    sol_dh = solve_game(dh)
    assert sol_dh.values == sol3.values
    cases.append((prune_superfluous(dh, sol_dh.values), sol_dh, [fx.sigma3()]))

    for game, sol, sigmas in cases:
        for sigma in sigmas:
            gap = optimality_gap(game, sigma, sol.values)
            assert gap <= sol.m / 4, "bundled strategy is not m/4-optimal"
            rs = reset_transform(game, sigma, sol.values, sol.m)
            entries.append((game, sol.values, rs))
    return entries


def test_criterion_1_value_equations(corpus):
    with criterion(1, "local-value-equations"):
        for g, sol, _ in corpus:
            assert check_value_equations(g, sol.values) == []


def test_criterion_2_dual_enumeration(corpus):
    with criterion(2, "dual-enumeration-agreement"):
        for g, sol, _ in corpus:
            assert sol.lower_enum is not None and sol.upper_enum is not None
            assert sol.lower_enum == sol.upper_enum


def test_criterion_3_prune_and_resolve(corpus):
    with criterion(3, "prune-preserves-values"):
        for g, sol, pruned in corpus:
            assert solve_game(pruned).values == sol.values
            assert is_consistent(pruned, sol.values)


def test_criterion_4_one_step_martingale(corpus):
    with criterion(4, "one-step-martingale"):
        checked = 0
        for g, sol, pruned in corpus:
            for game in (g, pruned):
                if not is_consistent(game, sol.values):
                    continue
                pairs = itertools.islice(
                    itertools.product(
                        enumerate_memoryless(game, Owner.MAX),
                        enumerate_memoryless(game, Owner.MIN),
                    ),
                    PAIR_CAP,
                )
                for sigma, tau in pairs:
                    chain = product_chain(game, sigma, tau, game.vertex_ids)
                    for s in chain.states:
                        mean = sum(
                            (p * sol.values[t[0]] for t, p in chain.transitions[s]),
                            Fraction(0),
                        )
                        assert mean == sol.values[s[0]], (game.name, s)
                    checked += 1
        assert checked > 200


def test_criterion_5_deviation_bound():
    with criterion(5, "deviation-probability-bound"):
        g1, g2, g3 = fx.g1(), fx.g2(), fx.g3()
        sol1, sol2, sol3 = solve_game(g1), solve_game(g2), solve_game(g3)
        sigma3 = fx.sigma3()
        tau3 = fx.trivial_min(g3)

        # headline numbers: three tries at the coin, best counterplay
        eps = optimality_gap(g3, sigma3, sol3.values)
        assert eps == Fraction(1, 8) and sol3.m == 1
        p = deviation_probability(g3, sigma3, tau3, sol3.values, sol3.m, "s")
        assert p == Fraction(1, 4)
        assert deviation_bound(eps, sol3.m) == Fraction(3, 4)
        assert p <= Fraction(3, 4)

        h = dual_game(g3)
        sol_h = solve_game(h)
        retry = memoryless(g3, Owner.MAX, {"s": "t", "w": "w", "l": "l"})
        to_w = memoryless(g1, Owner.MAX, {"a": "w", "w": "w", "l": "l"})
        triples = [
            (g1, sol1, [to_w, sol1.sigma_star]),
            (g2, sol2, [fx.trivial_max(g2)]),
            (g3, sol3, [sigma3, fx.stubborn3(3), retry, sol3.sigma_star]),
            (h, sol_h, [fx.trivial_max(h)]),
        ]
        for g, sol, sigmas in triples:
            for sigma in sigmas:
                gap = optimality_gap(g, sigma, sol.values)
                assert gap <= sol.m / 4
                bound = deviation_bound(gap, sol.m)
                for tau in enumerate_memoryless(g, Owner.MIN):
                    for v in g.vertex_ids:
                        dp = deviation_probability(
                            g, sigma, tau, sol.values, sol.m, v
                        )
                        assert dp <= bound, (g.name, v, dp, bound)


def test_criterion_6_reset_optimality(repaired):
    with criterion(6, "reset-strategies-optimal"):
        g3 = fx.g3()
        sol3 = solve_game(g3)
        g3p = prune_superfluous(g3, sol3.values)
        rs3 = reset_transform(g3p, fx.sigma3(), sol3.values, sol3.m)
        lo = lower_value(g3p, rs3.strategy)
        assert lo["s"] == 1 and lo == sol3.values

        for game, values, rs in repaired:
            assert lower_value(game, rs.strategy) == values

        # Min side read back in the complement game: the repaired machine,
        # relabeled, caps Max at the original values
        h = dual_game(g3)
        sol_h = solve_game(h)
        hp = prune_superfluous(h, sol_h.values)
        dh_entry = repaired[-1]
        tau_repaired = replace(dh_entry[2].strategy, player=Owner.MIN)
        assert validate_strategy(hp, tau_repaired) == []
        assert upper_value(hp, tau_repaired) == sol_h.values


def test_criterion_7_resets_settle(repaired):
    with criterion(7, "no-recurrent-resets"):
        for game, _, rs in repaired:
            for tau in enumerate_memoryless(game, Owner.MIN):
                chain = product_chain(game, rs.strategy, tau, game.vertex_ids)
                for comp in chain.bsccs():
                    for s in comp:
                        assert (s[0], s[1]) not in rs.reset_pairs, (game.name, s)


def test_criterion_8_shift_matches_quality():
    with criterion(8, "shifted-guarantees-match-quality"):
        g1, g2, g3 = fx.g1(), fx.g2(), fx.g3()
        cases = [
            (g1, g1_stubborn()),
            (g2, fx.trivial_max(g2)),
            (g3, fx.sigma3()),
        ]
        rng = stdrandom.Random(2024)
        for g, sigma in cases:
            table = quality_table(g, sigma)
            for _ in range(100):
                walk = [rng.choice(g.vertex_ids)]
                for _ in range(rng.randrange(0, 8)):
                    walk.append(rng.choice(g.successors[walk[-1]]))
                prefix = tuple(walk)
                shifted = shift_strategy(sigma, prefix)
                mem = sigma.read(prefix)
                assert shifted.initial == mem
                lo = lower_value(g, shifted)
                assert lo == {v: table[(v, mem)] for v in g.vertex_ids}


def test_criterion_9_simulation_agreement():
    with criterion(9, "simulation-within-three-stderr"):
        g2, g3 = fx.g2(), fx.g3()
        sigma3 = fx.sigma3()
        jobs = [
            (g2, fx.trivial_max(g2), fx.trivial_min(g2), "r", Fraction(1, 2)),
            (g3, sigma3, fx.trivial_min(g3), "s", Fraction(7, 8)),
        ]
        t0 = time.monotonic()
        for g, sigma, tau, start, exact in jobs:
            assert lower_value(g, sigma)[start] == exact
            hits = 0
            for seed in range(1, 101):
                res = estimate_value(g, sigma, tau, start, 10_000, seed)
                if abs(res.estimate - exact) <= 3 * res.stderr:
                    hits += 1
            assert hits >= 99, (g.name, hits)
        elapsed = time.monotonic() - t0
        assert elapsed <= 30, f"sampling took {elapsed:.1f}s"
