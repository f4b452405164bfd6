"""Command line front end.

Commands map one-to-one onto the library: solve, check, prune, verify,
quality, lower-value, deviation-prob, reset, simulate, gen. Machine
output goes to stdout, diagnostics to stderr. Exit codes: 0 pass,
1 check failure, 2 input error, 3 cap exceeded, 4 precondition
violated (inconsistent game or infinite threshold). Every command is
deterministic given identical files, flags, and seeds.
"""

from __future__ import annotations

import argparse
import itertools
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .chains import product_chain
from .errors import (
    CapExceededError,
    DeterminacyError,
    GameFormatError,
    GameValidationError,
    IllegalPlayError,
    InconsistentGameError,
    InvalidThresholdError,
    SimulationError,
    StaleValuesError,
    StrategyError,
)
from .game import (
    GameGraph,
    Owner,
    format_rational,
    parse_game,
    parse_rational,
    random_game,
    serialize_game,
)
from .mealy import (
    MealyStrategy,
    enumerate_memoryless,
    parse_strategy,
    serialize_strategy,
    stubborn_strategy,
    validate_strategy,
)
from .resets import (
    deviation_bound,
    deviation_probability,
    lower_value,
    optimality_gap,
    quality_table,
    reset_transform,
)
from .simulate import estimate_value, simulate_deviations, _stderr
from .values import (
    Solution,
    check_value_equations,
    is_consistent,
    min_positive_value,
    parse_solution,
    prune_superfluous,
    serialize_solution,
    solve_game,
)

_PAIRS_CAP = 2**10  # martingale spot checks per game


def _load_game(path: str) -> GameGraph:
    return parse_game(Path(path).read_bytes())


def _load_strategy(path: str, g: GameGraph, player: Owner | None = None) -> MealyStrategy:
    s = parse_strategy(Path(path).read_bytes())
    if player is not None and s.player is not player:
        raise StrategyError(f"{path}: expected a {player.value} strategy")
    bad = validate_strategy(g, s)
    if bad:
        raise StrategyError(f"{path}: " + "; ".join(bad))
    return s


def _fmt(x: Fraction, decimal: bool) -> str:
    if decimal:
        return f"{format_rational(x)} ({float(x):g})"
    return format_rational(x)


def cmd_solve(args) -> int:
    g = _load_game(args.game)
    sol = solve_game(g, cap=args.cap)
    for v in g.vertex_ids:
        print(f"{v}={_fmt(sol.values[v], args.decimal)}")
    print(f"consistent={'true' if sol.consistent else 'false'}")
    print(f"m={'inf' if sol.m == math.inf else format_rational(sol.m)}")
    if args.out:
        Path(args.out).write_text(serialize_solution(sol))
    return 0


def cmd_check(args) -> int:
    g = _load_game(args.game)
    sol = parse_solution(Path(args.solution).read_bytes())
    failures = []

    violations = check_value_equations(g, sol.values)
    _report("value-equations", not violations, "; ".join(violations), failures)

    consistent = is_consistent(g, sol.values) if not violations else None
    _report(
        "consistent-flag",
        violations == [] and consistent == sol.consistent,
        f"file says {sol.consistent}, values give {consistent}",
        failures,
    )
    m = min_positive_value(sol.values)
    _report("m-field", sol.m == m, f"file says {sol.m}, values give {m}", failures)

    bad = validate_strategy(g, sol.sigma_star) + validate_strategy(g, sol.tau_star)
    _report("witness-strategies", not bad, "; ".join(bad), failures)
    return 1 if failures else 0


def cmd_prune(args) -> int:
    g = _load_game(args.game)
    sol = solve_game(g, cap=args.cap)
    pruned = prune_superfluous(g, sol.values)
    removed = sorted(set(g.edges) - set(pruned.edges), key=lambda e: (e.src, e.dst))
    text = serialize_game(pruned)
    if args.out:
        Path(args.out).write_text(text)
        for e in removed:
            print(f"removed {e.src}->{e.dst}")
        print(f"kept {len(pruned.edges)} of {len(g.edges)} edges")
    else:
        for e in removed:
            print(f"removed {e.src}->{e.dst}", file=sys.stderr)
        sys.stdout.write(text)
    return 0


def _report(name: str, ok: bool, detail: str, failures: list) -> None:
    if ok:
        print(f"PASS {name}")
    else:
        print(f"FAIL {name}: {detail}")
        failures.append(name)


def _verify_candidates(
    g: GameGraph, pruned: GameGraph, sol: Solution, cap: int
) -> list[MealyStrategy]:
    """sigma_star plus stubborn one-edge deviations that stay (m/4)-optimal."""
    out = [sol.sigma_star]
    if sol.m == math.inf:
        return out
    moves = {v: sol.sigma_star.move("m0", v) for v in g.owned_by(Owner.MAX)}
    budget = 8
    for pivot in g.owned_by(Owner.MAX):
        for alt in g.successors[pivot]:
            if alt == moves[pivot]:
                continue
            bad = dict(moves)
            bad[pivot] = alt
            for k in (2, 3):
                if budget == 0:
                    return out
                cand = stubborn_strategy(g, moves, bad, pivot, k)
                if optimality_gap(pruned, cand, sol.values, cap) <= sol.m / 4:
                    out.append(cand)
                    budget -= 1
    return out


def cmd_verify(args) -> int:
    g = _load_game(args.game)
    failures: list = []

    sol = solve_game(g, cap=args.cap)
    _report(
        "value-equations",
        not check_value_equations(g, sol.values),
        "solver values break the local equations",
        failures,
    )
    _report(
        "determinacy",
        sol.lower_enum == sol.upper_enum,
        "lower and upper enumerations disagree",
        failures,
    )

    pruned = prune_superfluous(g, sol.values)
    resolved = solve_game(pruned, cap=args.cap)
    _report(
        "prune-preserves-values",
        resolved.values == sol.values,
        "pruned game solves to different values",
        failures,
    )
    _report(
        "pruned-consistent",
        is_consistent(pruned, sol.values),
        "pruned game still has value-changing controlled edges",
        failures,
    )

    ok = True
    detail = ""
    pairs = itertools.islice(
        itertools.product(
            enumerate_memoryless(pruned, Owner.MAX),
            enumerate_memoryless(pruned, Owner.MIN),
        ),
        _PAIRS_CAP,
    )
    for sigma, tau in pairs:
        chain = product_chain(pruned, sigma, tau, pruned.vertex_ids)
        for s in chain.states:
            mean = sum(
                (p * sol.values[t[0]] for t, p in chain.transitions[s]), Fraction(0)
            )
            if mean != sol.values[s[0]]:
                ok = False
                detail = f"state {s} steps from {sol.values[s[0]]} to mean {mean}"
                break
        if not ok:
            break
    _report("one-step-martingale", ok, detail, failures)

    if sol.m == math.inf:
        print("PASS deviation-bound (vacuous: all values zero)")
        print("PASS reset-optimality (vacuous: all values zero)")
        print("PASS resets-settle (vacuous: all values zero)")
        return 1 if failures else 0

    candidates = _verify_candidates(g, pruned, sol, args.cap)
    taus = list(itertools.islice(enumerate_memoryless(pruned, Owner.MIN), 2**12))

    ok = True
    detail = ""
    for sigma in candidates:
        eps = optimality_gap(pruned, sigma, sol.values, args.cap)
        bound = deviation_bound(eps, sol.m)
        for tau in taus:
            for v in pruned.vertex_ids:
                p = deviation_probability(
                    pruned, sigma, tau, sol.values, sol.m, v, args.cap
                )
                if p > bound:
                    ok = False
                    detail = f"from {v}: deviation probability {p} exceeds {bound}"
                    break
            if not ok:
                break
        if not ok:
            break
    _report("deviation-bound", ok, detail, failures)

    ok = True
    settled = True
    detail = sdetail = ""
    for sigma in candidates:
        try:
            rs = reset_transform(pruned, sigma, sol.values, sol.m, args.cap)
        except StrategyError:
            # the base strategy plays a pruned edge from a pair that does
            # not reset; such machines are outside the transform's domain
            continue
        lo = lower_value(pruned, rs.strategy, args.cap)
        if lo != sol.values:
            ok = False
            detail = f"reset strategy guarantees {lo}, values are {sol.values}"
        for tau in taus:
            chain = product_chain(pruned, rs.strategy, tau, pruned.vertex_ids)
            for c in chain.bsccs():
                if any((s[0], s[1]) in rs.reset_pairs for s in c):
                    settled = False
                    sdetail = "a recurrent class still triggers resets"
    _report("reset-optimality", ok, detail, failures)
    _report("resets-settle", settled, sdetail, failures)

    return 1 if failures else 0


def cmd_quality(args) -> int:
    g = _load_game(args.game)
    sigma = _load_strategy(args.strategy, g, Owner.MAX)
    table = quality_table(g, sigma, cap=args.cap)
    for (v, mem) in sorted(table):
        print(f"{v},{mem}={_fmt(table[(v, mem)], args.decimal)}")
    return 0


def cmd_lower_value(args) -> int:
    g = _load_game(args.game)
    sigma = _load_strategy(args.strategy, g, Owner.MAX)
    lo = lower_value(g, sigma, cap=args.cap)
    for v in g.vertex_ids:
        print(f"{v}={_fmt(lo[v], args.decimal)}")
    return 0


def cmd_deviation_prob(args) -> int:
    g = _load_game(args.game)
    sigma = _load_strategy(args.strategy, g, Owner.MAX)
    tau = _load_strategy(args.tau, g, Owner.MIN)
    sol = solve_game(g, cap=args.cap)
    eps = optimality_gap(g, sigma, sol.values, args.cap)
    p = deviation_probability(g, sigma, tau, sol.values, sol.m, args.start, args.cap)
    bound = deviation_bound(eps, sol.m)
    print(f"epsilon={_fmt(eps, args.decimal)}")
    print(f"m={format_rational(sol.m)}")
    print(f"bound={_fmt(bound, args.decimal)}")
    print(f"deviation-prob={_fmt(p, args.decimal)}")
    return 0


def cmd_reset(args) -> int:
    g = _load_game(args.game)
    sigma = _load_strategy(args.strategy, g, Owner.MAX)
    sol = solve_game(g, cap=args.cap)
    if sol.m == math.inf:
        raise InvalidThresholdError("m = inf: every value is zero, nothing to repair")
    pruned = prune_superfluous(g, sol.values)
    rs = reset_transform(pruned, sigma, sol.values, sol.m, args.cap)
    before = lower_value(g, sigma, cap=args.cap)
    after = lower_value(g, rs.strategy, cap=args.cap)
    for v in g.vertex_ids:
        print(
            f"{v}={_fmt(before[v], args.decimal)} -> {_fmt(after[v], args.decimal)}"
            f" value={_fmt(sol.values[v], args.decimal)}"
        )
    if rs.reset_pairs:
        print(
            "reset-pairs="
            + " ".join(f"{v},{mem}" for v, mem in sorted(rs.reset_pairs))
        )
    else:
        print("reset-pairs=none")
    if args.out:
        Path(args.out).write_text(serialize_strategy(rs.strategy))
    return 0


def cmd_simulate(args) -> int:
    g = _load_game(args.game)
    sigma = _load_strategy(args.strategy, g, Owner.MAX)
    tau = _load_strategy(args.tau, g, Owner.MIN)
    if args.deviations:
        sol = solve_game(g, cap=args.cap)
        stats = simulate_deviations(
            g,
            sigma,
            tau,
            sol.values,
            sol.m,
            args.start,
            args.samples,
            args.seed,
            horizon=args.horizon,
            workers=args.workers,
        )
        estimate, stderr = stats.empirical_p, _stderr(stats.empirical_p, stats.n)
        truncated = stats.truncated
        histogram = {str(k): v for k, v in stats.histogram.items()}
    else:
        res = estimate_value(
            g,
            sigma,
            tau,
            args.start,
            args.samples,
            args.seed,
            horizon=args.horizon,
            workers=args.workers,
        )
        estimate, stderr, truncated = res.estimate, res.stderr, res.truncated
        histogram = {}
    out = {
        "estimate": format_rational(estimate),
        "stderr": format_rational(stderr),
        "n": args.samples,
        "truncated_count": truncated,
        "histogram": histogram,
    }
    print(json.dumps(out, indent=2))
    return 0


def cmd_gen(args) -> int:
    g = random_game(
        args.seed,
        args.vertices,
        args.max_priority,
        args.max_out_degree,
        parse_rational(args.random_fraction, "--random-fraction"),
    )
    text = serialize_game(g)
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="stochparity",
        description="Exact analysis of finite stochastic parity games.",
    )
    top.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = top.add_subparsers(dest="command", required=True)

    def add(name, func, help_, **kw):
        p = sub.add_parser(name, help=help_, **kw)
        p.set_defaults(func=func)
        p.add_argument("--cap", type=int, default=2**20, help="enumeration cap")
        return p

    p = add("solve", cmd_solve, "compute exact values and optimal strategies")
    p.add_argument("game")
    p.add_argument("--out", help="write a solution file here")
    p.add_argument("--decimal", action="store_true", help="append decimal renderings")

    p = add("check", cmd_check, "re-run the value equations on a solution file")
    p.add_argument("game")
    p.add_argument("solution")

    p = add("prune", cmd_prune, "remove value-losing controlled edges")
    p.add_argument("game")
    p.add_argument("--out", help="write the pruned game here")

    p = add("verify", cmd_verify, "run the full invariant suite on a game")
    p.add_argument("game")

    p = add("quality", cmd_quality, "per (vertex, memory) guarantee of a strategy")
    p.add_argument("game")
    p.add_argument("strategy")
    p.add_argument("--decimal", action="store_true")

    p = add("lower-value", cmd_lower_value, "per-vertex guarantee of a Max strategy")
    p.add_argument("game")
    p.add_argument("strategy")
    p.add_argument("--decimal", action="store_true")

    p = add(
        "deviation-prob",
        cmd_deviation_prob,
        "exact probability that best play pushes a strategy off its guarantee",
    )
    p.add_argument("game")
    p.add_argument("strategy")
    p.add_argument("tau")
    p.add_argument("--start", required=True)
    p.add_argument("--decimal", action="store_true")

    p = add("reset", cmd_reset, "repair a near-optimal strategy by memory resets")
    p.add_argument("game")
    p.add_argument("strategy")
    p.add_argument("--out", help="write the repaired strategy here")
    p.add_argument("--decimal", action="store_true")

    p = add("simulate", cmd_simulate, "Monte Carlo estimates from sampled plays")
    p.add_argument("game")
    p.add_argument("strategy")
    p.add_argument("tau")
    p.add_argument("--start", required=True)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--horizon", type=int, default=10_000)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument(
        "--deviations",
        action="store_true",
        help="report deviation frequency and first-deviation histogram instead",
    )

    p = add("gen", cmd_gen, "generate a pseudorandom game")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--vertices", type=int, default=5)
    p.add_argument("--max-priority", type=int, default=2)
    p.add_argument("--max-out-degree", type=int, default=2)
    p.add_argument("--random-fraction", default="1/3")
    p.add_argument("--out", help="write the game here")
    return top


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (
        GameFormatError,
        GameValidationError,
        StrategyError,
        IllegalPlayError,
        StaleValuesError,
        OSError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CapExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (InconsistentGameError, InvalidThresholdError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except (DeterminacyError, SimulationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
