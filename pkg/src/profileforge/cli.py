"""Command line front end tying the pipeline together.

Subcommands cover synthetic corpus generation, extraction into sequence
files with dedup and splits, replay with parameter overrides, validity and
prompt-score reports, reward/advantage evaluation, token file codecs and
the HTTP replay service.

Exit codes: 0 success, 1 usage, 2 geometric or DSL failure, 3 I/O.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .codec import (
    TOKEN_FILE_MAGIC,
    TokenSyntaxError,
    detokenize,
    read_token_file,
    tokenize,
    write_token_file,
)
from .extractor import profile_hausdorff
from .interpreter import replay, trace_to_json, validate_topology
from .metrics import REPORT_COLUMNS, score_row, summarize_rows, write_report_csv
from .model import (
    ConstructionSequence,
    SequenceError,
    list_parameters,
    sequence_from_json,
    sequence_to_json,
    validate_parameters,
)
from .policy_opt import (
    ESTIMATORS,
    GroupTooSmall,
    RewardConfig,
    SampleRecord,
    composite_reward,
    group_advantages,
    group_records,
    read_sample_records,
)
from .profile import profile_from_json, profile_to_json
from .svgout import profile_to_svg
from .synthesis import build_corpus, synth_corpus
from .validity import ValidityReport, check_profile

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_GEOMETRY = 2
EXIT_IO = 3

VALIDITY_COLUMNS = ("Syntactic validity", "No self-intersection", "No short edges")


class CliError(Exception):
    """Failure with a chosen process exit code."""

    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    """argparse maps usage problems to exit code 2; this contract wants 1."""

    def error(self, message):
        raise CliError(EXIT_USAGE, f"{self.prog}: {message}")


def load_sequence(path: str) -> ConstructionSequence:
    """Sequence file loader: .json documents or integer token files."""
    try:
        if path.endswith(".json"):
            with open(path) as fh:
                doc = json.load(fh)
            return sequence_from_json(doc)
        return detokenize(read_token_file(path))
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise CliError(EXIT_IO, f"{path}: not valid JSON: {exc}") from exc
    except TokenSyntaxError as exc:
        raise CliError(EXIT_GEOMETRY, f"{path}: token position {exc.position}: {exc.reason}") from exc
    except (SequenceError, ValueError) as exc:
        raise CliError(EXIT_IO, f"{path}: {exc}") from exc


def _token_ints(text: str) -> list[int]:
    """Token ids from inline record text, tolerating the token-file header."""
    parts = text.split()
    if parts and parts[0] == TOKEN_FILE_MAGIC:
        parts = parts[2:]
    try:
        return [int(p) for p in parts]
    except ValueError as exc:
        raise TokenSyntaxError(0, f"non-integer token: {exc}") from exc


def parse_overrides(pairs: list[str]) -> dict[int, float]:
    overrides: dict[int, float] = {}
    for pair in pairs:
        name, sep, value = pair.partition("=")
        try:
            if not sep:
                raise ValueError("missing '='")
            overrides[int(name)] = float(value)
        except ValueError as exc:
            raise CliError(EXIT_USAGE, f"bad --param {pair!r}: expected INDEX=VALUE ({exc})") from exc
    return overrides


# ---------------------------------------------------------------------------
# subcommands


def cmd_gen_corpus(args) -> int:
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        profiles = synth_corpus(args.n, args.seed)
        width = max(3, len(str(max(args.n - 1, 0))))
        for i, profile in enumerate(profiles):
            path = out / f"{i:0{width}d}.json"
            path.write_text(json.dumps(profile_to_json(profile)) + "\n")
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot write corpus: {exc}") from exc
    print(f"wrote {len(profiles)} profiles to {out}")
    return EXIT_OK


def _read_profile_dir(input_dir: str) -> tuple[list[str], list]:
    paths = sorted(Path(input_dir).glob("*.json"))
    stems, profiles = [], []
    for path in paths:
        try:
            profiles.append(profile_from_json(json.loads(path.read_text())))
        except (OSError, json.JSONDecodeError, ValueError, KeyError) as exc:
            raise CliError(EXIT_IO, f"{path}: not a profile file: {exc}") from exc
        stems.append(path.stem)
    return stems, profiles


def cmd_extract(args) -> int:
    if not os.path.isdir(args.input):
        raise CliError(EXIT_IO, f"input directory {args.input!r} does not exist")
    stems, profiles = _read_profile_dir(args.input)
    report = build_corpus(profiles, seed=args.seed, drop_prob=args.drop_prob)

    out = Path(args.output)
    seq_dir = out / "sequences"
    tok_dir = out / "tokens"
    try:
        seq_dir.mkdir(parents=True, exist_ok=True)
        tok_dir.mkdir(parents=True, exist_ok=True)
        for entry in report.entries:
            stem = stems[entry.index]
            seq = entry.result.sequence
            (seq_dir / f"{stem}.json").write_text(json.dumps(sequence_to_json(seq)) + "\n")
            write_token_file(tok_dir / f"{stem}.tokens", tokenize(seq))
        splits = {
            name: [stems[report.entries[j].index] for j in idxs]
            for name, idxs in report.splits.items()
        }
        (out / "splits.json").write_text(json.dumps(splits, indent=2) + "\n")
        summary = {
            "profiles": len(profiles),
            "complete": len(profiles) - len(report.failures),
            "kept": len(report.entries),
            "duplicates_dropped": report.duplicates_dropped,
            "failures": [{"profile": stems[i], "error": err} for i, err in report.failures],
            "splits": {name: len(ids) for name, ids in splits.items()},
        }
        (out / "report.json").write_text(json.dumps(summary, indent=2) + "\n")
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot write extraction output: {exc}") from exc

    complete = summary["complete"]
    print(
        f"extracted {complete}/{len(profiles)} profiles, kept {len(report.entries)} "
        f"after dropping {report.duplicates_dropped} duplicates"
    )
    for name in ("train", "validation", "test"):
        print(f"  {name}: {len(splits.get(name, []))}")
    return EXIT_OK


def cmd_replay(args) -> int:
    seq = load_sequence(args.sequence)
    overrides = parse_overrides(args.param)
    known = {p.index for p in list_parameters(seq)}
    unknown = sorted(set(overrides) - known)
    if unknown:
        raise CliError(
            EXIT_USAGE,
            f"unknown parameter index {unknown[0]}; sequence has {sorted(known) or 'none'}",
        )

    profile, trace = replay(seq, overrides)

    if args.json:
        doc = {
            "profile": profile_to_json(profile),
            "trace": trace_to_json(trace),
            "hausdorff_vs_stored": profile_hausdorff(profile, seq.profile),
        }
        print(json.dumps(doc, indent=2))
    else:
        for rec in trace.records:
            status = "ok" if rec.ok else f"FAILED: {rec.error}"
            print(f"[{rec.index:3d}] {rec.kind:<24} {status}")
        ncurves = sum(len(getattr(loop, "curves", (0,))) for loop in profile.loops)
        print(f"profile: {len(profile.loops)} loop(s), {ncurves} curve(s)")

    if args.svg:
        try:
            Path(args.svg).write_text(profile_to_svg(profile))
        except OSError as exc:
            raise CliError(EXIT_IO, f"cannot write {args.svg}: {exc}") from exc

    failed = trace.failed_steps()
    if failed and not args.lenient:
        first = failed[0]
        print(f"replay failed at step {first.index}: {first.kind}: {first.error}", file=sys.stderr)
        return EXIT_GEOMETRY
    return EXIT_OK


def _report_rows(paths: list[str]) -> list[dict[str, float | None]]:
    rows = []
    for path in paths:
        try:
            seq = load_sequence(path)
        except CliError as exc:
            if exc.code == EXIT_GEOMETRY:  # unreadable DSL content scores as invalid
                rows.append(score_row(None, None, syntactic_valid=False))
                continue
            raise
        problems = validate_topology(seq) + validate_parameters(seq)
        if problems:
            rows.append(score_row(None, None, syntactic_valid=False))
            continue
        rows.append(score_row(seq.prompt, seq.profile, syntactic_valid=True))
    return rows


def _print_summary(rows: list[dict[str, float | None]], columns) -> None:
    summary = summarize_rows(rows)
    for name in columns:
        value = summary.get(name)
        print(f"{name}: {'n/a' if value is None else f'{value:.6g}'}")


def cmd_validate(args) -> int:
    rows = _report_rows(args.files)
    print(f"{len(rows)} sequence(s)")
    _print_summary(rows, VALIDITY_COLUMNS)
    if args.csv:
        try:
            write_report_csv(rows, args.csv)
        except OSError as exc:
            raise CliError(EXIT_IO, f"cannot write {args.csv}: {exc}") from exc
    return EXIT_OK


def cmd_metrics(args) -> int:
    rows = _report_rows(args.files)
    print(f"{len(rows)} sequence(s)")
    _print_summary(rows, REPORT_COLUMNS)
    if args.csv:
        try:
            write_report_csv(rows, args.csv)
        except OSError as exc:
            raise CliError(EXIT_IO, f"cannot write {args.csv}: {exc}") from exc
    return EXIT_OK


def _record_reward(record: SampleRecord, cfg: RewardConfig) -> tuple[float, ValidityReport]:
    try:
        seq = detokenize(_token_ints(record.tokens))
    except TokenSyntaxError:
        report = ValidityReport(syntactic_valid=False, intersections=(), short_edges=())
        return cfg.invalid_penalty, report
    report = check_profile(seq.profile)
    return composite_reward(report, cfg), report


def cmd_rewards(args) -> int:
    try:
        records = read_sample_records(args.samples)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot read {args.samples}: {exc}") from exc
    except ValueError as exc:
        raise CliError(EXIT_IO, str(exc)) from exc

    cfg = RewardConfig(
        w_no_self_intersection=args.w_self_intersection,
        w_no_short_edges=args.w_short_edges,
        invalid_penalty=args.invalid_penalty,
    )
    scored = [(rec, *_record_reward(rec, cfg)) for rec in records]

    out_rows: list[dict] = []
    for prompt_id, group in group_records(records).items():
        group_scored = [(rec, r, rep) for rec, r, rep in scored if rec.prompt_id == prompt_id]
        try:
            if args.estimator == "remax":
                greedy = [r for rec, r, _ in group_scored if rec.greedy]
                if len(greedy) != 1:
                    raise CliError(
                        EXIT_USAGE,
                        f"prompt {prompt_id!r}: remax needs exactly one greedy record per "
                        f"group, found {len(greedy)}",
                    )
                samples = [(rec, r, rep) for rec, r, rep in group_scored if not rec.greedy]
                advs = group_advantages([r for _, r, _ in samples], "remax", greedy_reward=greedy[0])
                rows = [(rec, r, rep, a) for (rec, r, rep), a in zip(samples, advs)]
                rows += [(rec, r, rep, None) for rec, r, rep in group_scored if rec.greedy]
            else:
                advs = group_advantages([r for _, r, _ in group_scored], args.estimator)
                rows = [(rec, r, rep, a) for (rec, r, rep), a in zip(group_scored, advs)]
        except GroupTooSmall as exc:
            raise CliError(EXIT_USAGE, f"prompt {prompt_id!r}: {exc}") from exc
        for rec, r, rep, a in rows:
            out_rows.append(
                {
                    "prompt_id": rec.prompt_id,
                    "greedy": rec.greedy,
                    "reward": r,
                    "advantage": a,
                    "syntactic_valid": rep.syntactic_valid,
                    # Masked on invalid samples: the checks never ran.
                    "self_intersection_free": rep.self_intersection_free
                    if rep.syntactic_valid
                    else None,
                    "no_short_edges": rep.no_short_edges if rep.syntactic_valid else None,
                }
            )

    if args.out:
        try:
            with open(args.out, "w") as fh:
                for row in out_rows:
                    fh.write(json.dumps(row) + "\n")
        except OSError as exc:
            raise CliError(EXIT_IO, f"cannot write {args.out}: {exc}") from exc

    n = len(out_rows)
    mean_reward = sum(r["reward"] for r in out_rows) / n if n else 0.0
    print(f"{n} sample(s), {args.estimator} advantages, mean reward {mean_reward:.4f}")
    for name, key in zip(
        VALIDITY_COLUMNS, ("syntactic_valid", "self_intersection_free", "no_short_edges")
    ):
        # Fractions over all samples; masked (invalid) samples cannot pass.
        frac = sum(1.0 for r in out_rows if r[key] is True) / n if n else 0.0
        print(f"{name}: {frac:.4f}")
    return EXIT_OK


def cmd_tokenize(args) -> int:
    seq = load_sequence(args.sequence)
    try:
        tokens = tokenize(seq)
    except (SequenceError, ValueError) as exc:
        raise CliError(EXIT_GEOMETRY, f"{args.sequence}: cannot tokenize: {exc}") from exc
    try:
        write_token_file(args.out, tokens)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot write {args.out}: {exc}") from exc
    print(f"wrote {len(tokens)} tokens to {args.out}")
    return EXIT_OK


def cmd_detokenize(args) -> int:
    seq = load_sequence(args.tokens)
    doc = json.dumps(sequence_to_json(seq), indent=2)
    if args.out:
        try:
            Path(args.out).write_text(doc + "\n")
        except OSError as exc:
            raise CliError(EXIT_IO, f"cannot write {args.out}: {exc}") from exc
        print(f"wrote sequence with {len(seq.construction_steps())} steps to {args.out}")
    else:
        print(doc)
    return EXIT_OK


def cmd_serve(args) -> int:
    data_dir = args.data or os.environ.get("PROFILE_FORGE_DATA")
    if not data_dir:
        raise CliError(EXIT_USAGE, "pass --data DIR or set PROFILE_FORGE_DATA")
    if not os.path.isdir(data_dir):
        raise CliError(EXIT_IO, f"sequence store {data_dir!r} is not a directory")
    import uvicorn

    from .service import create_app

    app = create_app(data_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument wiring


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="profileforge", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-corpus", help="write a synthetic profile corpus")
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_corpus)

    p = sub.add_parser("extract", help="extract construction sequences from profiles")
    p.add_argument("--input", required=True, help="directory of profile .json files")
    p.add_argument("--output", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--drop-prob", type=float, default=0.5)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("replay", help="replay a sequence file with optional overrides")
    p.add_argument("sequence", help="sequence .json or token file")
    p.add_argument("--param", action="append", default=[], metavar="INDEX=VALUE")
    p.add_argument("--svg", help="write the replayed profile as SVG")
    p.add_argument("--json", action="store_true", help="print profile and trace as JSON")
    p.add_argument("--lenient", action="store_true", help="exit 0 even when steps fail")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("validate", help="validity report over sequence files")
    p.add_argument("files", nargs="+")
    p.add_argument("--csv", help="write the full per-sequence report")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("metrics", help="prompt-satisfaction report over sequence files")
    p.add_argument("files", nargs="+")
    p.add_argument("--csv", help="write the full per-sequence report")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("rewards", help="rewards and advantages for sampled generations")
    p.add_argument("samples", help="JSON-lines sample records")
    p.add_argument("--estimator", choices=ESTIMATORS, default="rloo")
    p.add_argument("--out", help="write per-sample advantages as JSON lines")
    p.add_argument("--w-self-intersection", type=float, default=0.5)
    p.add_argument("--w-short-edges", type=float, default=0.5)
    p.add_argument("--invalid-penalty", type=float, default=-1.0)
    p.set_defaults(func=cmd_rewards)

    p = sub.add_parser("tokenize", help="encode a sequence .json as a token file")
    p.add_argument("sequence")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_tokenize)

    p = sub.add_parser("detokenize", help="decode a token file into sequence JSON")
    p.add_argument("tokens")
    p.add_argument("--out")
    p.set_defaults(func=cmd_detokenize)

    p = sub.add_parser("serve", help="run the HTTP replay service")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--data", help="sequence store directory (or PROFILE_FORGE_DATA)")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except CliError as exc:
        print(f"profileforge: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
