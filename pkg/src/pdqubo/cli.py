"""Command-line entry point: ``pdqubo <subcommand> ...``.

Exit status: 0 success, 1 parse/domain errors (or a failed oracle check),
2 size-cap errors, 3 embedding failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import tempfile
from fractions import Fraction

from .diagrams import read_diagram
from .embed import chain_stats, chimera, embed_qubo, find_embedding, format_edge_list, format_embedding
from .errors import PdQuboError, SizeError
from .model import ENUMERATION_CAP, argmin_exhaustive, logical_graph
from .oracle import brute_force_distance, format_matching, hungarian_distance
from .qubo_io import format_decimal, format_qubo, read_qubo
from .sampler import (
    Schedule,
    anneal,
    default_reverse_schedule,
    default_schedule,
    exact_sampleset,
    format_histogram,
    format_samples,
    histogram,
    reverse_anneal,
)
from .wgraph import build_wasserstein_graph, compile_qubo, decode_matching, format_edge_map

log = logging.getLogger("pdqubo")

EXIT_OK, EXIT_DOMAIN, EXIT_SIZE, EXIT_EMBED = 0, 1, 2, 3
DEFAULT_SEED = 0


class UsageError(PdQuboError):
    """Bad flag combination or unusable path."""


class _Parser(argparse.ArgumentParser):
    # malformed flags are parse errors (exit 1); exit 2 is reserved for size caps
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_DOMAIN, f"{self.prog}: error: {message}\n")


def _exponent(text: str):
    if text.lower() in ("inf", "infinity"):
        return math.inf
    try:
        value = Fraction(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    return int(value) if value.denominator == 1 else value


def _decimal(text: str) -> Fraction:
    try:
        return Fraction(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a decimal: {text!r}") from None


def _bitstring(text: str) -> tuple[int, ...]:
    if not text or set(text) - {"0", "1"}:
        raise argparse.ArgumentTypeError(f"expected a string of 0/1, got {text!r}")
    return tuple(int(c) for c in text)


def write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        write_atomic(path, text)


def _check_inputs(*paths):
    for flag, path in paths:
        if path is not None and not os.path.isfile(path):
            raise UsageError(f"{flag}: no such file {path!r}")


def _check_outputs(*paths):
    for flag, path in paths:
        if path is None:
            continue
        directory = os.path.dirname(os.path.abspath(path))
        if not os.path.isdir(directory):
            raise UsageError(f"{flag}: directory of {path!r} does not exist")


def _seed(args) -> int:
    if args.seed is None:
        log.info("no --seed given; using %d", DEFAULT_SEED)
        return DEFAULT_SEED
    return args.seed


def _schedule(args, model, initial_required: bool):
    if args.schedule == "forward":
        base = default_schedule(model, args.sweeps)
        return Schedule(
            "forward",
            base.beta_start if args.beta_start is None else args.beta_start,
            base.beta_end if args.beta_end is None else args.beta_end,
            args.sweeps,
        )
    if initial_required and args.initial is None:
        raise UsageError("--schedule reverse needs --initial BITSTRING")
    base = default_reverse_schedule(model, args.sweeps, args.pause if args.pause is not None else 100)
    return Schedule(
        "reverse",
        base.beta_start if args.beta_start is None else args.beta_start,
        base.beta_end if args.beta_end is None else args.beta_end,
        args.sweeps,
        beta_mid=base.beta_mid if args.beta_mid is None else args.beta_mid,
        pause_sweeps=base.pause_sweeps,
    )


def _sample(args, model, seed):
    schedule = _schedule(args, model, initial_required=True)
    if schedule.kind == "forward":
        return anneal(model, schedule, args.reads, seed)
    return reverse_anneal(model, args.initial, schedule, args.reads, seed)


def _load_pair(args):
    _check_inputs(("X", args.X), ("Y", args.Y))
    return read_diagram(args.X), read_diagram(args.Y)


def cmd_pd2qubo(args) -> int:
    X, Y = _load_pair(args)
    map_path = args.map
    if map_path is None and args.output is not None:
        map_path = args.output + ".map"
    _check_outputs(("--output", args.output), ("--map", map_path))
    W = build_wasserstein_graph(X, Y, args.p, args.q)
    compiled = compile_qubo(W, args.gamma)
    header = f"wasserstein qubo m={W.m} n={W.n} p={args.p} q={args.q} gamma={format_decimal(compiled.gamma)}"
    _emit(format_qubo(compiled.model, header), args.output)
    if map_path is not None:
        write_atomic(map_path, format_edge_map(compiled))
    log.info("%d variables", compiled.model.num_vars)
    return EXIT_OK


def _summary(cost, distance, n_vars, method, violations, extra=None):
    out = {
        "cost": float(cost),
        "distance": float(distance),
        "n_vars": n_vars,
        "method": method,
        "constraint_violations": violations,
    }
    out.update(extra or {})
    return out


def _print_summary(summary: dict, as_json: bool):
    if as_json:
        print(json.dumps(summary))
        return
    for key, value in summary.items():
        print(f"{key} {value!r}" if isinstance(value, float) else f"{key} {value}")


def cmd_wasserstein(args) -> int:
    X, Y = _load_pair(args)
    if args.exact and args.anneal:
        raise UsageError("--exact and --anneal are mutually exclusive")
    W = build_wasserstein_graph(X, Y, args.p, args.q)
    compiled = compile_qubo(W, args.gamma)
    model = compiled.model
    exact = args.exact or (not args.anneal and model.num_vars <= ENUMERATION_CAP)
    if exact:
        if model.num_vars > ENUMERATION_CAP:
            raise SizeError(f"--exact: {model.num_vars} variables exceeds the enumeration cap of {ENUMERATION_CAP}")
        state, _ = argmin_exhaustive(model)
        method = "exhaustive"
    else:
        samples = _sample(args, model, _seed(args))
        state = samples.first.state
        method = "anneal" if args.schedule == "forward" else "reverse_anneal"
    matching = decode_matching(state, compiled, W)
    cost = matching.cost
    distance = float(cost) ** (1.0 / float(args.p))
    extra = {}
    status = EXIT_OK
    if args.check_oracle:
        ref = hungarian_distance(X, Y, args.p, args.q)
        agree = matching.valid and abs(float(cost) - float(ref.cost)) <= 1e-9
        extra = {"oracle_cost": float(ref.cost), "oracle_distance": ref.distance, "oracle_agrees": agree}
        if not agree:
            log.error("oracle check failed: QUBO cost %s, oracle cost %s", float(cost), float(ref.cost))
            status = EXIT_DOMAIN
    _print_summary(_summary(cost, distance, model.num_vars, method, matching.constraint_violations, extra), args.json)
    return status


def cmd_oracle(args) -> int:
    X, Y = _load_pair(args)
    solver = brute_force_distance if args.method == "brute" else hungarian_distance
    res = solver(X, Y, args.p, args.q)
    n_vars = len(X) * len(Y) + len(X) + len(Y)
    if args.json:
        summary = _summary(res.cost, res.distance, n_vars, args.method, 0)
        summary["matching"] = format_matching(res)
        print(json.dumps(summary))
        return EXIT_OK
    print(f"cost {float(res.cost)!r}")
    print(f"distance {res.distance!r}")
    for line in format_matching(res):
        print(line)
    return EXIT_OK


def cmd_solve(args) -> int:
    _check_inputs(("MODEL", args.model))
    _check_outputs(("--output", args.output), ("--histogram", args.histogram))
    model = read_qubo(args.model)
    if args.exact:
        samples = exact_sampleset(model)
    else:
        if args.initial is not None and len(args.initial) != model.num_vars:
            raise UsageError(f"--initial has {len(args.initial)} bits, model has {model.num_vars} variables")
        samples = _sample(args, model, _seed(args))
    _emit(format_samples(samples), args.output)
    if args.histogram is not None:
        write_atomic(args.histogram, format_histogram(histogram(samples)))
    return EXIT_OK


def cmd_embed(args) -> int:
    _check_inputs(("--qubo", args.qubo))
    _check_outputs(("--output", args.output), ("--emit-embedded-qubo", args.emit_embedded_qubo))
    model = read_qubo(args.qubo)
    hardware = chimera(args.rows, args.cols, args.shore)
    graph = logical_graph(model)
    if graph.num_nodes == 0:
        raise UsageError(f"--qubo: {args.qubo!r} has no variables to embed")
    emb = find_embedding(graph, hardware, _seed(args), tries=args.tries)
    if emb is None:
        log.error("no embedding found into C(%d,%d,%d) after %d tries; the problem may still be embeddable",
                  args.rows, args.cols, args.shore, args.tries)
        return EXIT_EMBED
    longest, mean, total = chain_stats(emb)
    stats = f"max_chain {longest} mean_chain {mean!r} total_qubits {total}\n"
    if args.output is None:
        sys.stdout.write(format_embedding(emb) + "\n" + stats)
    else:
        write_atomic(args.output, format_embedding(emb) + "\n")
        sys.stdout.write(stats)
    if args.emit_embedded_qubo is not None:
        embedded = embed_qubo(model, emb, hardware)
        header = f"embedded into chimera {args.rows}x{args.cols}x{args.shore}"
        write_atomic(args.emit_embedded_qubo, format_qubo(embedded, header))
    return EXIT_OK


def cmd_gen_chimera(args) -> int:
    _check_outputs(("--output", args.output))
    _emit(format_edge_list(chimera(args.rows, args.cols, args.shore)), args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--p", type=_exponent, default=2, help="matching exponent (default 2)")
    common.add_argument("--q", type=_exponent, default=2, help="ground-norm exponent, may be 'inf' (default 2)")
    common.add_argument("--gamma", type=_decimal, default=None, help="penalty weight (default 1.125 * max weight)")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--quiet", action="store_true")
    common.add_argument("--json", action="store_true", help="print one JSON summary object")

    sampling = _Parser(add_help=False)
    sampling.add_argument("--reads", type=int, default=1000)
    sampling.add_argument("--sweeps", type=int, default=1000)
    sampling.add_argument("--beta-start", type=float, default=None)
    sampling.add_argument("--beta-end", type=float, default=None)
    sampling.add_argument("--schedule", choices=("forward", "reverse"), default="forward")
    sampling.add_argument("--initial", type=_bitstring, default=None, help="start state for reverse annealing")
    sampling.add_argument("--beta-mid", type=float, default=None)
    sampling.add_argument("--pause", type=int, default=None, help="sweeps held at beta-mid")

    parser = _Parser(prog="pdqubo", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pd2qubo", parents=[common], help="compile two diagrams into a QUBO")
    p.add_argument("X")
    p.add_argument("Y")
    p.add_argument("-o", "--output")
    p.add_argument("--map", help="edge map file (default OUTPUT.map when --output is given)")
    p.set_defaults(func=cmd_pd2qubo)

    p = sub.add_parser("wasserstein", parents=[common, sampling], help="distance via the QUBO path")
    p.add_argument("X")
    p.add_argument("Y")
    p.add_argument("--exact", action="store_true", help="exhaustive minimization (error above the cap)")
    p.add_argument("--anneal", action="store_true", help="force simulated annealing")
    p.add_argument("--check-oracle", action="store_true")
    p.set_defaults(func=cmd_wasserstein)

    p = sub.add_parser("oracle", parents=[common], help="exact distance by matching")
    p.add_argument("X")
    p.add_argument("Y")
    p.add_argument("--method", choices=("hungarian", "brute"), default="hungarian")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("solve", parents=[common, sampling], help="sample a QUBO file")
    p.add_argument("model")
    p.add_argument("--exact", action="store_true")
    p.add_argument("-o", "--output")
    p.add_argument("--histogram", help="write energy,occurrences CSV here")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("embed", parents=[common], help="minor-embed a QUBO into Chimera")
    p.add_argument("--qubo", required=True)
    p.add_argument("--rows", type=int, default=16)
    p.add_argument("--cols", type=int, default=16)
    p.add_argument("--shore", type=int, default=4)
    p.add_argument("--tries", type=int, default=10)
    p.add_argument("-o", "--output")
    p.add_argument("--emit-embedded-qubo")
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("gen-chimera", parents=[common], help="print a Chimera edge list")
    p.add_argument("--rows", type=int, required=True)
    p.add_argument("--cols", type=int, required=True)
    p.add_argument("--shore", type=int, required=True)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_gen_chimera)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING if args.quiet else logging.INFO,
        format="pdqubo: %(message)s",
        stream=sys.stderr,
        force=True,
    )
    try:
        return args.func(args)
    except PdQuboError as exc:
        log.error("%s: %s", args.command, exc)
        return exc.exit_code
    except OSError as exc:
        log.error("%s: %s", args.command, exc)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
