"""Command line entry point ``hde``.

Exit status: 0 on success or the expected outcome, 1 when a verification
fails, 2 on usage errors (bad flags, unreadable or malformed input files,
unknown example names). Agent ids in files and output are 1-based.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from . import axioms as axiom_lab
from . import experiments, reductions, scenarios
from .deviations import Stability
from .dynamics import (
    CertificationError,
    Converged,
    FirstPolicy,
    RandomPolicy,
    ScriptError,
    SearchLimitExceeded,
    StepLimit,
    run,
    shortest_sequence,
)
from .game import game_from_json, game_to_json, partition_from_json, partition_to_json
from .perception import PerceptionModel, UnsupportedCombination

PROG = "hde"


class UsageError(Exception):
    pass


# --- input helpers ------------------------------------------------------


def _read_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read file {path!r}: {exc.strerror or exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"malformed JSON in {path!r}: {exc.msg} at line {exc.lineno} column {exc.colno}") from None


def _load_game(path: str):
    obj = _read_json(path)
    try:
        return game_from_json(obj)
    except (ValueError, TypeError) as exc:
        raise UsageError(f"invalid game in {path!r}: {exc}") from None


def _load_partition(path: str | None, n: int):
    if path is None:
        return None
    obj = _read_json(path)
    try:
        return partition_from_json(obj, n)
    except (ValueError, TypeError) as exc:
        raise UsageError(f"invalid partition in {path!r}: {exc}") from None


def _fraction(text: str) -> Fraction:
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None
    if value <= 0:
        raise argparse.ArgumentTypeError("coefficient must be positive")
    return value


def _kind(text: str) -> Stability:
    try:
        return Stability.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _model(args) -> PerceptionModel:
    try:
        return PerceptionModel(args.model, args.coefficient)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _scenario(name: str):
    try:
        return scenarios.builtin(name)
    except scenarios.UnknownScenario as exc:
        raise UsageError(str(exc)) from None


def _default_seed() -> int:
    raw = os.environ.get("HDE_SEED")
    if raw is None or raw == "":
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"HDE_SEED must be an integer, got {raw!r}") from None


def _write(path: str, text: str):
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise UsageError(f"cannot write file {path!r}: {exc.strerror or exc}") from None


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True)


def _fmt_partition(partition) -> str:
    return " ".join("{" + ",".join(str(a) for a in c) + "}" for c in partition_to_json(partition))


# --- subcommands --------------------------------------------------------


def cmd_run(args, out):
    game = _load_game(args.game)
    initial = _load_partition(args.initial, game.n)
    model = _model(args)
    policy = FirstPolicy() if args.policy == "first" else RandomPolicy(args.seed)
    try:
        trace = run(game, initial, args.stability, model, policy, args.max_steps, args.size_cap,
                    args.ir, args.strict_ir)
    except UnsupportedCombination as exc:
        raise UsageError(str(exc)) from None
    lines = trace.to_jsonl()
    if args.trace:
        _write(args.trace, lines)
    if args.json:
        out.write(lines)
        return 0
    state = trace.final_state
    out.write(f"outcome: {trace.outcome.name} after {trace.steps} steps\n")
    out.write(f"partition: {_fmt_partition(state.partition)}\n")
    return 0


def _certificate_summary(name, cert) -> str:
    moved = sorted({v for row in cert.pair_deltas for v in row})
    return (f"{name}: certified cycle, warmup {cert.t0} steps, period {cert.p} steps, "
            f"per-period deltas in {moved}, margins {'stationary' if cert.stationary else 'non-decreasing'}\n")


def _verify_one(name: str, cycles: int | None):
    sc = _scenario(name)
    if sc.expected == "cycle":
        try:
            cert = sc.certify()
        except (CertificationError, ScriptError) as exc:
            return False, {"example": name, "expected": "cycle", "ok": False, "error": str(exc)}, \
                f"{name}: certification FAILED: {exc}\n"
        data = {"example": name, "expected": "cycle", "ok": True, "certificate": cert.to_json()}
        text = _certificate_summary(name, cert)
        if cycles:
            try:
                trace = sc.replay(cycles)
            except ScriptError as exc:
                data.update(ok=False, error=str(exc))
                return False, data, text + f"{name}: replay of {cycles} periods FAILED: {exc}\n"
            data["replayed_steps"] = trace.steps
            text += f"{name}: replayed {cycles} periods, {trace.steps} steps all valid\n"
        return True, data, text
    trace = sc.replay()
    got = "converges" if isinstance(trace.outcome, Converged) else (
        "diverges" if isinstance(trace.outcome, StepLimit) else trace.outcome.name)
    ok = got == sc.expected
    data = {"example": name, "expected": sc.expected, "ok": ok, "outcome": trace.outcome_json()}
    text = (f"{name}: expected {sc.expected}, observed {trace.outcome.name} after {trace.steps} steps"
            f"{'' if ok else ' (MISMATCH)'}\n")
    return ok, data, text


def cmd_verify(args, out):
    names = scenarios.NAMES if args.example == "all" else (args.example,)
    for name in names:
        _scenario(name)
    results = [_verify_one(name, args.cycles) for name in names]
    if args.json:
        payload = results[0][1] if len(results) == 1 else [r[1] for r in results]
        out.write(_dumps(payload) + "\n")
    else:
        for _, _, text in results:
            out.write(text)
    return 0 if all(ok for ok, _, _ in results) else 1


def cmd_generate(args, out):
    family = None
    if args.family:
        raw = _read_json(args.family)
        try:
            family = [[x - 1 for x in s] for s in raw]
        except TypeError:
            raise UsageError(f"invalid family in {args.family!r}: expected a list of 3-element lists") from None
    try:
        instance = reductions.build_rx3c(args.t, family)
    except reductions.InvalidInstance as exc:
        raise UsageError(f"invalid RX3C instance: {exc}") from None
    try:
        output = reductions.reduce(instance, args.target, args.variant)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    doc = game_to_json(output.game)
    doc.update({
        "k": output.k,
        "target": output.target,
        "variant": output.variant,
        "stability": [k.value.lower() for k in output.kinds],
        "model": output.model.to_json(),
        "roles": {name: idx + 1 for name, idx in sorted(output.roles.items(), key=lambda kv: kv[1])},
        "family": [[x + 1 for x in s] for s in instance.family],
    })
    _write(args.out, _dumps(doc) + "\n")
    summary = {"agents": output.game.n, "k": output.k, "out": args.out}
    if args.witness:
        if args.cover:
            try:
                cover = [int(c) - 1 for c in args.cover.split(",")]
            except ValueError:
                raise UsageError(f"--cover expects comma-separated set numbers, got {args.cover!r}") from None
        else:
            cover = reductions.find_exact_cover(instance)
            if cover is None:
                raise UsageError("instance has no exact cover, so no witness exists")
        try:
            script = reductions.witness(output, cover)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        _write(args.witness, _dumps({"cover": [c + 1 for c in sorted(cover)],
                                     "script": [d.to_json() for d in script]}) + "\n")
        summary["witness"] = args.witness
    if args.json:
        out.write(_dumps(summary) + "\n")
    else:
        out.write(f"wrote {output.game.n}-agent game to {args.out}\nk={output.k}\n")
        if args.witness:
            out.write(f"wrote witness script to {args.witness}\n")
    return 0


def cmd_search(args, out):
    game = _load_game(args.game)
    initial = _load_partition(args.initial, game.n)
    model = _model(args)
    try:
        script = shortest_sequence(game, initial, args.stability, model, args.bound, args.ir, args.size_cap,
                                   args.strict_ir, args.max_states)
    except SearchLimitExceeded as exc:
        print(f"{PROG}: search aborted: {exc}", file=sys.stderr)
        return 1
    if args.json:
        out.write(_dumps({"found": script is not None,
                          "script": None if script is None else [d.to_json() for d in script]}) + "\n")
    elif script is None:
        out.write(f"no converging sequence of length <= {args.bound}\n")
    else:
        out.write(f"shortest converging sequence: {len(script)} steps\n")
        for d in script:
            out.write(_dumps(d.to_json()) + "\n")
    return 0


def cmd_axioms(args, out):
    cafs = ("AS", "MF") if args.caf == "all" else (args.caf.upper(),)
    names = axiom_lab.AXIOMS if args.axiom == "all" else (args.axiom,)
    try:
        verdicts = [axiom_lab.check_axiom(c, a, args.budget, args.seed, args.max_n) for c in cafs for a in names]
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.json:
        payload = [v.to_json() for v in verdicts]
        out.write(_dumps(payload[0] if len(payload) == 1 else payload) + "\n")
    else:
        for v in verdicts:
            out.write(v.summary() + "\n")
            if v.found:
                out.write("  " + _dumps(v.counterexample.to_json()) + "\n")
    return 0


_CONFIG_KEYS = {f for f in experiments.ExperimentConfig.__dataclass_fields__}


def cmd_experiment(args, out):
    fields = {}
    if args.config:
        raw = _read_json(args.config)
        if not isinstance(raw, dict):
            raise UsageError(f"invalid config in {args.config!r}: expected a JSON object")
        unknown = sorted(set(raw) - _CONFIG_KEYS)
        if unknown:
            raise UsageError(f"invalid config in {args.config!r}: unknown keys {unknown}")
        fields.update(raw)
    for key in _CONFIG_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            fields[key] = value
    if "coefficient" in fields:
        try:
            fields["coefficient"] = Fraction(str(fields["coefficient"]))
        except (ValueError, ZeroDivisionError):
            raise UsageError(f"bad coefficient {fields['coefficient']!r}") from None
    fields.setdefault("seed", _default_seed())
    try:
        config = experiments.ExperimentConfig(**fields)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid experiment configuration: {exc}") from None
    rows = experiments.run_batch(config, args.jobs)
    csv_text = experiments.rows_to_csv(config, rows)
    if args.out:
        _write(args.out, csv_text)
    agg = experiments.aggregate_rows(rows)
    if args.json:
        means = {k: None if v is None else float(v) for k, v in agg.means.items()}
        out.write(_dumps({"games": agg.games, "timeouts": agg.timeouts,
                          "mean_steps": None if agg.mean_steps is None else float(agg.mean_steps),
                          "means": means}) + "\n")
    elif args.out:
        steps = "n/a" if agg.mean_steps is None else f"{float(agg.mean_steps):.2f}"
        out.write(f"{agg.games} games, {agg.timeouts} timeouts, mean steps {steps}; wrote {args.out}\n")
    else:
        out.write(csv_text)
    return 0


def cmd_export(args, out):
    sc = _scenario(args.example)
    doc = sc.to_json()
    text = json.dumps(doc, sort_keys=True, indent=1) + "\n"
    if args.out:
        _write(args.out, text)
        if not args.json:
            out.write(f"wrote {args.example} to {args.out}\n")
    else:
        out.write(text)
    return 0


# --- parser -------------------------------------------------------------


def _dynamics_flags(p):
    p.add_argument("--game", required=True, help="game JSON file")
    p.add_argument("--stability", type=_kind, default=Stability.NS, help="ns, is, cns, cs or scs (default: ns)")
    p.add_argument("--model", default="none",
                   help="none, resent, appreciation, both or deviator-resent (default: none)")
    p.add_argument("--coefficient", type=_fraction, default=Fraction(1), help="update size, e.g. 1 or 1/2 (default: 1)")
    p.add_argument("--ir", action="store_true", help="only individually rational deviations (default: off)")
    p.add_argument("--strict-ir", action="store_true",
                   help="single agents join existing coalitions only with a positive value (default: off)")
    p.add_argument("--initial", help="initial partition JSON file, 1-based (default: singletons)")
    p.add_argument("--size-cap", type=int, default=None, help="largest deviating group for cs/scs (default: none)")


def build_parser(seed: int = 0) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=PROG, description="Dynamics of coalition formation with "
                                     "history-dependent utilities.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("run", help="run a dynamics on a game file")
    _dynamics_flags(p)
    p.add_argument("--seed", type=int, default=seed, help="seed of the random policy (default: env HDE_SEED or 0)")
    p.add_argument("--policy", choices=("random", "first"), default="random", help="deviation selection (default: random)")
    p.add_argument("--max-steps", type=int, default=100000, help="step limit (default: 100000)")
    p.add_argument("--trace", help="also write the JSON-lines trace to this file")
    p.add_argument("--json", action="store_true", help="print the JSON-lines trace")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("verify", help="replay and certify a built-in example")
    p.add_argument("--example", required=True, help=f"example name or 'all': {', '.join(scenarios.NAMES)}")
    p.add_argument("--cycles", type=int, default=None, help="additionally replay this many periods")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("generate", help="build a reduction game")
    p.add_argument("what", choices=("rx3c",), help="instance kind")
    p.add_argument("--t", type=int, default=1, help="instance size parameter (default: 1)")
    p.add_argument("--target", default="ns_is", help="ns_is, cns or cs (default: ns_is)")
    p.add_argument("--variant", choices=reductions.VARIANTS, default="resentful", help="perception variant (default: resentful)")
    p.add_argument("--family", help="JSON list of 3t triples over elements 1..3t (default: built-in family)")
    p.add_argument("--out", required=True, help="output game JSON file")
    p.add_argument("--witness", help="write the cover and its witness script to this JSON file")
    p.add_argument("--cover", help="comma-separated set numbers to use for the witness (default: searched)")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("search", help="breadth-first search for a shortest converging sequence")
    _dynamics_flags(p)
    p.add_argument("--bound", type=int, required=True, help="maximum sequence length")
    p.add_argument("--max-states", type=int, default=200_000, help="abort after this many distinct states (default: 200000)")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("axioms", help="search for axiom counterexamples")
    p.add_argument("--caf", default="all", help="AS, MF or all (default: all)")
    p.add_argument("--axiom", default="all", help=f"{', '.join(axiom_lab.AXIOMS)} or all (default: all)")
    p.add_argument("--budget", type=int, default=10_000, help="samples per axiom (default: 10000)")
    p.add_argument("--seed", type=int, default=seed, help="sampler seed (default: env HDE_SEED or 0)")
    p.add_argument("--max-n", type=int, default=6, help="largest sampled agent count (default: 6)")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(func=cmd_axioms)

    p = sub.add_parser("experiment", help="batch of random games under NS dynamics")
    p.add_argument("--config", help="JSON object with any of the flags below (flags take precedence)")
    p.add_argument("--n", type=int, default=None, help="agents per game (default: 20)")
    p.add_argument("--games", type=int, default=None, help="number of games (default: 20)")
    p.add_argument("--utilities", choices=("uniform", "gaussian"), default=None, help="(default: uniform)")
    p.add_argument("--sigma", type=float, default=None, help="gaussian standard deviation (default: 10)")
    p.add_argument("--model", default=None, help="perception model (default: resent)")
    p.add_argument("--coefficient", default=None, help="update size (default: 1)")
    p.add_argument("--seed", type=int, default=None, help="batch seed (default: env HDE_SEED or 0)")
    p.add_argument("--max-steps", dest="max_steps", type=int, default=None, help="step limit (default: 100000)")
    p.add_argument("--caf", choices=("AS", "MF"), default=None, help="aggregation (default: AS)")
    p.add_argument("--ir", dest="ir_only", action="store_const", const=True, default=None,
                   help="individually rational NS deviations only (default: off)")
    p.add_argument("--engine", choices=("fast", "exact"), default=None, help="(default: fast)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes (default: 1)")
    p.add_argument("--out", help="CSV output file (default: print CSV)")
    p.add_argument("--json", action="store_true", help="print aggregate statistics as JSON")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("export", help="write a built-in example as JSON")
    p.add_argument("--example", required=True, help=f"one of: {', '.join(scenarios.NAMES)}")
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--json", action="store_true", help="suppress the human summary")
    p.set_defaults(func=cmd_export)
    return parser


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    try:
        seed = _default_seed()
        parser = build_parser(seed)
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:
            return int(exc.code or 0)
        return args.func(args, out)
    except UsageError as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
