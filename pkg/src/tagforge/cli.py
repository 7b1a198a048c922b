"""Command-line interface: ``tagforge <subcommand> ...``.

Exit status: 0 success, 1 divergence or invariant failure, 2 usage or input error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional

from tagforge.compiler import compile_cyclic, gen_parity_tester, parity_input, parity_verdict
from tagforge.cyclic import CyclicTagSystem, crun, parse_ctag
from tagforge.harness import CompilerBug, EncodingRejected, InvariantFailure, bench, family_inputs, lockstep_verify
from tagforge.tag import ParseError, parse_2tag, parse_word, run

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _read(path: Optional[str], what: str) -> str:
    if not path:
        raise UsageError(f"missing {what} file")
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {what} {path!r}: {exc.strerror}") from None


def _program_path(args) -> Optional[str]:
    return args.program or args.program_file


def _load_ctag(args) -> CyclicTagSystem:
    return parse_ctag(_read(_program_path(args), "program"))


def _write(path: str, text: str) -> None:
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise UsageError(f"cannot write {path!r}: {exc.strerror}") from None


def cmd_run_2tag(args) -> int:
    ts = parse_2tag(_read(_program_path(args), "program"))
    word = parse_word(args.input or "")
    res = run(ts, word, max_steps=args.steps, trace=args.trace, verbose=args.trace)
    if res.trace:
        for entry in res.trace:
            print(f"{entry.step}\t{entry.read}\t{' '.join(map(str, entry.word))}")
    print(f"halt: {res.halt.value}")
    print(f"steps: {res.steps}")
    if res.cycle_entry is not None:
        print(f"cycle: entry {res.cycle_entry} period {res.cycle_period}")
    print(f"word: {' '.join(map(str, res.word))}")
    return EXIT_OK


def cmd_run_cyclic(args) -> int:
    prog = _load_ctag(args)
    if args.input is None or any(ch not in "01" for ch in args.input):
        raise UsageError("--input must be a binary word")
    res = crun(prog, args.input, args.steps)
    for i, cfg in enumerate(res.configs):
        print(f"{i}\t{cfg.marker}\t{cfg.dataword or '-'}")
    print(f"halt: {res.halt}")
    return EXIT_OK


def cmd_compile(args) -> int:
    path = _program_path(args)
    compiled = compile_cyclic(_load_ctag(args))
    out = args.output or (str(Path(path).with_suffix(".2tag")))
    _write(out, compiled.render())
    _write(out + ".json", compiled.metadata_json())
    print(f"wrote {out} ({len(compiled.system.rules)} rules, alphabet {len(compiled.system.alphabet)} = {compiled.p} x {compiled.q})")
    return EXIT_OK


def cmd_verify(args) -> int:
    prog = _load_ctag(args)
    if not args.input:
        raise UsageError("--input is required")
    try:
        report = lockstep_verify(prog, args.input, args.steps)
    except EncodingRejected as exc:
        raise UsageError(str(exc)) from None
    dump = report.checkpoints_jsonl()
    if args.dump_checkpoints:
        _write(args.dump_checkpoints, dump)
    else:
        sys.stdout.write(dump)
    if args.trace:
        for r in report.records:
            print(f"step {r.step}: ({r.decoded_marker}, {r.decoded_dataword or '-'}) counter {r.counter} after {r.tag_steps} 2-tag steps", file=sys.stderr)
    print(json.dumps(report.summary(), sort_keys=True), file=sys.stderr)
    return EXIT_OK if report.equivalent else EXIT_FAIL


def cmd_bench(args) -> int:
    lengths = [int(x) for x in args.lengths.split(",") if x]
    prog, inputs = family_inputs(args.family, args.seed, lengths)
    if _program_path(args):
        prog = _load_ctag(args)
    profile = bench(prog, inputs, args.steps, args.repetitions)
    summary = profile.summary()
    summary.update(family=args.family, seed=args.seed, lengths=lengths, steps=args.steps)
    text = json.dumps(summary, indent=2, sort_keys=True) + "\n"
    if args.metrics:
        _write(args.metrics, profile.csv())
        _write(str(Path(args.metrics).with_suffix(".json")), text)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_parity_demo(args) -> int:
    ts = gen_parity_tester()
    failures = 0
    print("len\tlead\tsteps\texpected\tclass")
    for n in range(2, args.len + 1):
        for lead in "01":
            word = parity_input(lead + "0" * (n - 2))
            res = run(ts, word)
            want = n // 2 + 1
            cls = parity_verdict(res.word[0]) if len(res.word) == 1 else "?"
            ok = res.steps == want and cls == ("odd" if n % 2 else "even")
            failures += not ok
            print(f"{n}\t{lead}\t{res.steps}\t{want}\t{cls}{'' if ok else '  MISMATCH'}")
    return EXIT_OK if not failures else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tagforge", description="2-tag and cyclic tag tools")
    sub = ap.add_subparsers(dest="command", required=True)

    def with_program(p):
        p.add_argument("program_file", nargs="?", help="program file (alternative to --program)")
        p.add_argument("--program", help="program file")
        return p

    p = with_program(sub.add_parser("run-2tag", help="run a .2tag system"))
    p.add_argument("--input", help="initial word, whitespace-separated symbols")
    p.add_argument("--steps", type=int, default=None, help="step limit")
    p.add_argument("--trace", action="store_true", help="print every step")
    p.set_defaults(func=cmd_run_2tag)

    p = with_program(sub.add_parser("run-cyclic", help="run a .ctag program"))
    p.add_argument("--input", help="binary input word")
    p.add_argument("--steps", type=int, default=100)
    p.set_defaults(func=cmd_run_cyclic)

    p = with_program(sub.add_parser("compile", help="compile a .ctag program to .2tag plus JSON metadata"))
    p.add_argument("-o", "--output", help="output .2tag path (default: program path with .2tag suffix)")
    p.set_defaults(func=cmd_compile)

    p = with_program(sub.add_parser("verify", help="lockstep-check the compiled system against the cyclic run"))
    p.add_argument("--input", help="binary input word")
    p.add_argument("--steps", type=int, default=25, help="simulated cyclic steps")
    p.add_argument("--dump-checkpoints", metavar="PATH", help="write JSON Lines checkpoints here instead of stdout")
    p.add_argument("--trace", action="store_true", help="per-checkpoint summary on stderr")
    p.set_defaults(func=cmd_verify)

    p = with_program(sub.add_parser("bench", help="measure 2-tag steps per simulated step"))
    p.add_argument("--family", choices="abc", default="a", help="a: random inputs, b: all-one appendants, c: empty appendants")
    p.add_argument("--lengths", default="8,16,32,64,128")
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--repetitions", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--metrics", metavar="PATH", help="CSV output; a JSON summary is written beside it")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("parity-demo", help="timing table of the six-rule parity tester")
    p.add_argument("--len", type=int, default=64)
    p.set_defaults(func=cmd_parity_demo)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CompilerBug, InvariantFailure) as exc:
        print(f"failure: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
