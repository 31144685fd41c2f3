"""Command-line front end: reproducible verification suites and the game
value table.

Every command echoes its seed, serializes numbers at full double precision in
JSON (CSV output applies 3-decimal display rounding only), and uses exit
codes 0 = pass, 1 = verification failure, 2 = usage error, 3 = solver
non-convergence.  XORLAB_THREADS caps sweep workers.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from decimal import ROUND_HALF_UP, Decimal

import numpy as np

from . import __version__, encodings, games, protocols, sdp, sequential


def round3(value: float) -> str:
    """Three decimals, half away from zero (0.5625 -> '0.563', not '0.562')."""
    return str(Decimal(repr(float(value))).quantize(Decimal("0.001"), rounding=ROUND_HALF_UP))

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_SOLVER = 3


def _threads() -> int | None:
    raw = os.environ.get("XORLAB_THREADS")
    if not raw:
        return None
    try:
        return max(1, int(raw))
    except ValueError:
        return None


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def cmd_verify_sandwich(args) -> int:
    dims = [int(d) for d in str(args.dims).split(",") if d]
    if any(d < 2 for d in dims):
        print("error: dims must all be >= 2", file=sys.stderr)
        return EXIT_USAGE
    records, summary = sequential.sweep_sandwich(
        dims, args.samples, args.seed, workers=_threads()
    )
    if args.format == "pretty":
        lines = [
            f"sandwich sweep: seed={summary['seed']} dims={summary['dims']} "
            f"accepted={summary['accepted']} (rate {summary['acceptance_rate']:.3f}) "
            f"violations={summary['violations']}"
        ]
        _emit("\n".join(lines), args.out)
    else:
        lines = [json.dumps(r) for r in records]
        lines.append(json.dumps({"summary": summary}))
        _emit("\n".join(lines), args.out)
    return EXIT_PASS if summary["violations"] == 0 else EXIT_FAIL


def _seesaw_budget(n: int, restarts: int) -> tuple[int, int]:
    # Rounds and restarts shrink with n: the per-round cost grows as 8^n.
    if n <= 2:
        return restarts, 40
    if n == 3:
        return max(2, restarts // 4), 20
    if n == 4:
        return max(1, restarts // 10), 10
    return max(1, restarts // 20), 6


def cmd_table(args) -> int:
    n_max = args.n_max
    if n_max < 1:
        print("error: --n-max must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    if n_max > 5:
        print(f"warning: n_max={n_max} may take a long time", file=sys.stderr)
    rng = np.random.default_rng(args.seed)
    columns = list(range(1, n_max + 1))
    rows: dict[str, list[str]] = {
        "lower_bound": [],
        "seesaw": [],
        "npa1": [],
        "our_bound": [],
        "conjectured": [],
    }
    solver_failed = False
    for n in columns:
        game = games.make_chsh_n(n)
        guess = games.evaluate(game, games.guessing_strategy_chsh_n(n))
        rows["lower_bound"].append(round3(guess))
        restarts, iters = _seesaw_budget(n, args.seesaw_restarts)
        _, ss_val = games.seesaw(
            game, 2 ** n, restarts=restarts, iters=iters, rng=rng.spawn(1)[0]
        )
        rows["seesaw"].append(round3(ss_val))
        try:
            npa, sol = sdp.npa1_value(
                game, tol=args.tol, max_iter=args.npa_max_iter, full_output=True
            )
            cell = round3(npa)
            if sol.status != "optimal":
                cell += "*"  # best iterate, not converged to tolerance
                solver_failed = True
        except sdp.SolverError:
            cell = "fail"
            solver_failed = True
        rows["npa1"].append(cell)
        rows["our_bound"].append(round3(games.upper_bound_chsh_n(n)))
        rows["conjectured"].append(round3(games.conjectured_value_chsh_n(n)))

    lines = ["value," + ",".join(f"n={n}" for n in columns)]
    for name in ("lower_bound", "conjectured", "npa1", "our_bound", "seesaw"):
        lines.append(name + "," + ",".join(rows[name]))
    lines.append(f"# seed={args.seed}")
    _emit("\n".join(lines), args.out)
    return EXIT_SOLVER if solver_failed else EXIT_PASS


def _load_encoding(spec: str) -> encodings.XorEncoding:
    if spec == "bbbw":
        return encodings.canonical_bbbw_encoding()
    with open(spec) as fh:
        return encodings.XorEncoding.from_json(json.load(fh))


def cmd_ot_demo(args) -> int:
    enc = _load_encoding(args.encoding)
    ot = protocols.ot_from_encoding(enc)
    report = {
        "seed": args.seed,
        "n": ot.n,
        "mode": ot.mode,
        "masking": ot.masking,
        "honest_p": ot.honest_p,
        "honest_abort": 1.0 - ot.honest_p,
        "output_distribution_uniform": _uniform_gap(ot) <= 1e-9,
    }
    _emit(json.dumps(report, indent=2), args.out)
    return EXIT_PASS


def _uniform_gap(ot) -> float:
    dist = protocols.output_distribution(ot)
    m = 1 << ot.n
    return max(abs(p - 1.0 / (m * m)) for p in dist.values())


def cmd_ot_cheats(args) -> int:
    enc = _load_encoding(args.encoding)
    ot = protocols.ot_from_encoding(enc)
    cheats = protocols.ot_cheat_probs(ot)
    report = {
        "seed": args.seed,
        "honest_p": ot.honest_p,
        "a_ot": cheats.a_ot,
        "b_ot": cheats.b_ot,
        "b_pair": cheats.b_pair,
        "kitaev_product": cheats.kitaev_product,
        "theorem2_ok": cheats.theorem2_ok,
    }
    _emit(json.dumps(report, indent=2), args.out)
    return EXIT_PASS if cheats.theorem2_ok else EXIT_FAIL


def cmd_ot_bound(args) -> int:
    report = protocols.ot_tradeoff_bound(args.mode)
    report["seed"] = args.seed
    _emit(json.dumps(report, indent=2), args.out)
    return EXIT_PASS


def cmd_ot_ceiling(args) -> int:
    value = protocols.secure_ot_ceiling(args.n, args.mode)
    _emit(json.dumps({"seed": args.seed, "n": args.n, "mode": args.mode, "ceiling": value}, indent=2), args.out)
    return EXIT_PASS


def cmd_cf_demo(args) -> int:
    enc = encodings.canonical_bbbw_encoding()
    ot = protocols.ot_from_encoding(enc)
    cf = protocols.coinflip_from_ot(ot)
    report = {
        "seed": args.seed,
        "honest_abort": cf.honest_abort,
        "a_cf": cf.a_cf,
        "b_cf_ceiling": cf.b_cf,
        "kitaev_ok": cf.kitaev_ok,
    }
    _emit(json.dumps(report, indent=2), args.out)
    return EXIT_PASS if cf.kitaev_ok else EXIT_FAIL


def cmd_ot_suite(args) -> int:
    """Every oblivious-transfer check in one JSON report."""
    checks: dict[str, bool] = {}
    enc = encodings.canonical_bbbw_encoding()
    ot = protocols.ot_from_encoding(enc)
    cheats = protocols.ot_cheat_probs(ot)
    cf = protocols.coinflip_from_ot(ot)
    cos2 = math.cos(math.pi / 8.0) ** 2
    bit = protocols.ot_tradeoff_bound("bit")
    string = protocols.ot_tradeoff_bound("string")

    checks["honest_p_is_cos2_pi8"] = abs(ot.honest_p - cos2) <= 1e-9
    checks["alice_learns_index_half"] = cheats.a_ot == 0.5
    checks["xor_hidden"] = abs(cheats.b_ot - 0.5) <= 1e-8
    checks["theorem2"] = cheats.theorem2_ok
    checks["kitaev"] = cf.kitaev_ok
    checks["bit_bound_599"] = abs(bit["bound"] - 0.599) <= 5e-4
    checks["string_bound_5852"] = abs(string["bound"] - 0.5852) <= 5e-4
    ceilings = {
        n: {
            "string": protocols.secure_ot_ceiling(n, "string"),
            "tensor": protocols.secure_ot_ceiling(n, "tensor"),
        }
        for n in range(1, 6)
    }
    checks["ceiling_n1_optimal"] = abs(ceilings[1]["string"] - cos2) <= 1e-12
    checks["tensor_ceiling_power"] = all(
        ceilings[n]["tensor"] == cos2 ** n for n in range(1, 6)
    )

    report = {
        "seed": args.seed,
        "honest_p": ot.honest_p,
        "cheats": {
            "a_ot": cheats.a_ot,
            "b_ot": cheats.b_ot,
            "b_pair": cheats.b_pair,
        },
        "coin_flip": {"a_cf": cf.a_cf, "b_cf_ceiling": cf.b_cf, "honest_abort": cf.honest_abort},
        "tradeoff_bounds": {"bit": bit, "string": string},
        "ceilings": ceilings,
        "checks": checks,
        "failed": sorted(k for k, v in checks.items() if not v),
    }
    _emit(json.dumps(report, indent=2), args.out)
    return EXIT_PASS if not report["failed"] else EXIT_FAIL


def cmd_all(args) -> int:
    """Chain every suite; first failing exit code wins."""
    rc_sweep = cmd_verify_sandwich(
        argparse.Namespace(
            dims=args.dims, samples=args.samples, seed=args.seed, format="pretty", out=None
        )
    )
    rc_table = cmd_table(
        argparse.Namespace(
            n_max=args.n_max,
            seesaw_restarts=args.seesaw_restarts,
            seed=args.seed,
            tol=args.tol,
            npa_max_iter=args.npa_max_iter,
            out=None,
        )
    )
    rc_ot = cmd_ot_suite(argparse.Namespace(seed=args.seed, out=None))
    for rc in (rc_sweep, rc_table, rc_ot):
        if rc != EXIT_PASS:
            return rc
    return EXIT_PASS


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="xorlab",
        description="Verification suites for XOR-hiding encodings, CHSH-family games, and OT bounds.",
    )
    parser.add_argument("--version", action="version", version=f"xorlab {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=20260810, help="RNG seed, echoed in output")
    common.add_argument("--tol", type=float, default=1e-6, help="solver tolerance")
    common.add_argument("--out", type=str, default=None, help="write output to this path")
    common.add_argument(
        "--format", choices=("json", "csv", "pretty"), default="json", help="output format"
    )

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify-sandwich", parents=[common], help="Haar sweep of the sequential-measurement bounds")
    p.add_argument("--dims", type=str, default="2,4,8", help="comma-separated dimensions")
    p.add_argument("--samples", type=int, default=1000, help="accepted samples per dimension")
    p.set_defaults(func=cmd_verify_sandwich)

    p = sub.add_parser("table", parents=[common], help="game value comparison table (CSV)")
    p.add_argument("--n-max", type=int, default=3, dest="n_max")
    p.add_argument("--seesaw-restarts", type=int, default=20, dest="seesaw_restarts")
    p.add_argument("--npa-max-iter", type=int, default=50_000, dest="npa_max_iter")
    p.set_defaults(func=cmd_table)

    ot = sub.add_parser("ot", help="oblivious-transfer commands")
    ot_sub = ot.add_subparsers(dest="ot_command", required=True)

    p = ot_sub.add_parser("demo", parents=[common], help="build an OT and report honest behaviour")
    p.add_argument("--encoding", type=str, default="bbbw", help="'bbbw' or a JSON encoding file")
    p.set_defaults(func=cmd_ot_demo)

    p = ot_sub.add_parser("cheats", parents=[common], help="cheat probabilities of an OT")
    p.add_argument("--encoding", type=str, default="bbbw")
    p.set_defaults(func=cmd_ot_cheats)

    p = ot_sub.add_parser("bound", parents=[common], help="minimax cheat bound for perfect OT")
    p.add_argument("--mode", choices=("bit", "string"), default="bit")
    p.set_defaults(func=cmd_ot_bound)

    p = ot_sub.add_parser("ceiling", parents=[common], help="correctness ceiling of secure OT")
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--mode", choices=("string", "tensor"), default="string")
    p.set_defaults(func=cmd_ot_ceiling)

    p = ot_sub.add_parser("suite", parents=[common], help="all OT checks at once")
    p.set_defaults(func=cmd_ot_suite)

    cf = sub.add_parser("cf", help="coin-flipping commands")
    cf_sub = cf.add_subparsers(dest="cf_command", required=True)
    p = cf_sub.add_parser("demo", parents=[common], help="coin flipping from the optimal bit OT")
    p.set_defaults(func=cmd_cf_demo)

    p = sub.add_parser("all", parents=[common], help="chain every suite (CI entry point)")
    p.add_argument("--dims", type=str, default="2,4")
    p.add_argument("--samples", type=int, default=500)
    p.add_argument("--n-max", type=int, default=2, dest="n_max")
    p.add_argument("--seesaw-restarts", type=int, default=10, dest="seesaw_restarts")
    p.add_argument("--npa-max-iter", type=int, default=50_000, dest="npa_max_iter")
    p.set_defaults(func=cmd_all)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except sdp.SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
