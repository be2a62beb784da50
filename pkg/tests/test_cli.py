import csv
import json

import pytest

from profileforge.cli import (
    EXIT_GEOMETRY,
    EXIT_IO,
    EXIT_OK,
    EXIT_USAGE,
    main,
    parse_overrides,
)
from profileforge.codec import detokenize, read_token_file, tokenize
from profileforge.fixtures import i_beam, parametric_rectangle
from profileforge.metrics import REPORT_COLUMNS
from profileforge.model import list_parameters, sequence_from_json, sequence_to_json
from profileforge.interpreter import validate_topology
from profileforge.profile import profile_from_json
from profileforge.validity import check_profile


@pytest.fixture()
def corpus_dir(tmp_path):
    out = tmp_path / "corpus"
    assert main(["gen-corpus", "--n", "10", "--seed", "1", "--out", str(out)]) == EXIT_OK
    return out


@pytest.fixture()
def extract_dir(tmp_path, corpus_dir):
    out = tmp_path / "extracted"
    assert main(["extract", "--input", str(corpus_dir), "--output", str(out)]) == EXIT_OK
    return out


@pytest.fixture()
def ibeam_file(tmp_path):
    path = tmp_path / "ibeam.json"
    path.write_text(json.dumps(sequence_to_json(i_beam())))
    return str(path)


class TestGenCorpus:
    def test_writes_n_profiles(self, corpus_dir):
        files = sorted(corpus_dir.glob("*.json"))
        assert len(files) == 10

    def test_profiles_are_valid_closed_shapes(self, corpus_dir):
        for path in sorted(corpus_dir.glob("*.json")):
            profile = profile_from_json(json.loads(path.read_text()))
            assert profile.loops
            assert check_profile(profile).ok()

    def test_seeded_determinism(self, tmp_path, corpus_dir):
        again = tmp_path / "again"
        assert main(["gen-corpus", "--n", "10", "--seed", "1", "--out", str(again)]) == EXIT_OK
        for a, b in zip(sorted(corpus_dir.glob("*.json")), sorted(again.glob("*.json"))):
            assert a.read_bytes() == b.read_bytes()


class TestExtract:
    def test_outputs(self, extract_dir):
        report = json.loads((extract_dir / "report.json").read_text())
        splits = json.loads((extract_dir / "splits.json").read_text())
        seqs = sorted(extract_dir.glob("sequences/*.json"))
        toks = sorted(extract_dir.glob("tokens/*.tokens"))
        assert report["profiles"] == 10
        assert report["complete"] + len(report["failures"]) == 10
        assert len(seqs) == len(toks) == report["kept"]
        assert sum(len(ids) for ids in splits.values()) == report["kept"]
        assert set(splits) == {"train", "validation", "test"}

    def test_sequences_are_well_formed(self, extract_dir):
        for path in sorted(extract_dir.glob("sequences/*.json")):
            seq = sequence_from_json(json.loads(path.read_text()))
            assert validate_topology(seq) == []

    def test_rerun_same_seed_identical_split(self, tmp_path, corpus_dir, extract_dir):
        again = tmp_path / "again"
        assert main(["extract", "--input", str(corpus_dir), "--output", str(again)]) == EXIT_OK
        assert (again / "splits.json").read_bytes() == (extract_dir / "splits.json").read_bytes()

    def test_empty_input_dir(self, tmp_path):
        empty = tmp_path / "empty"
        empty.mkdir()
        out = tmp_path / "out"
        assert main(["extract", "--input", str(empty), "--output", str(out)]) == EXIT_OK
        assert json.loads((out / "splits.json").read_text()) == {
            "train": [],
            "validation": [],
            "test": [],
        }

    def test_missing_input_dir(self, tmp_path):
        code = main(["extract", "--input", str(tmp_path / "nope"), "--output", str(tmp_path / "o")])
        assert code == EXIT_IO


class TestReplay:
    def test_default_replay(self, ibeam_file, capsys):
        assert main(["replay", ibeam_file]) == EXIT_OK
        out = capsys.readouterr().out
        assert "LineLineFillet" in out and "FAILED" not in out

    def test_svg_output(self, ibeam_file, tmp_path):
        svg = tmp_path / "out.svg"
        assert main(["replay", ibeam_file, "--svg", str(svg)]) == EXIT_OK
        assert svg.read_text().startswith("<svg")

    def test_json_output(self, ibeam_file, capsys):
        assert main(["replay", ibeam_file, "--json"]) == EXIT_OK
        doc = json.loads(capsys.readouterr().out)
        assert doc["hausdorff_vs_stored"] < 1e-12
        assert all(r["ok"] for r in doc["trace"]["records"])

    def test_forced_no_solution_exits_2_with_step_index(self, ibeam_file, capsys):
        assert main(["replay", ibeam_file, "--param", "2=-0.01"]) == EXIT_GEOMETRY
        err = capsys.readouterr().err
        assert "replay failed at step 11" in err
        assert "LineLineFillet" in err

    def test_lenient_keeps_exit_zero(self, ibeam_file):
        assert main(["replay", ibeam_file, "--param", "2=-0.01", "--lenient"]) == EXIT_OK

    def test_override_changes_geometry(self, ibeam_file, capsys):
        assert main(["replay", ibeam_file, "--param", "1=0.2", "--json"]) == EXIT_OK
        doc = json.loads(capsys.readouterr().out)
        assert doc["hausdorff_vs_stored"] > 0.01

    def test_bad_param_forms(self, ibeam_file):
        assert main(["replay", ibeam_file, "--param", "no-equals"]) == EXIT_USAGE
        assert main(["replay", ibeam_file, "--param", "0=abc"]) == EXIT_USAGE
        assert main(["replay", ibeam_file, "--param", "x=1"]) == EXIT_USAGE

    def test_unknown_param_index(self, ibeam_file):
        assert main(["replay", ibeam_file, "--param", "9=0.1"]) == EXIT_USAGE

    def test_missing_file(self, tmp_path):
        assert main(["replay", str(tmp_path / "nope.json")]) == EXIT_IO

    def test_corrupt_json(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert main(["replay", str(bad)]) == EXIT_IO

    def test_parse_overrides_helper(self):
        assert parse_overrides(["0=0.5", "2=-1"]) == {0: 0.5, 2: -1.0}


class TestValidateAndMetrics:
    def test_validate_reports_fractions(self, extract_dir, tmp_path, capsys):
        toks = [str(p) for p in sorted(extract_dir.glob("tokens/*.tokens"))]
        broken = tmp_path / "broken.tokens"
        broken.write_text("profileforge-tokens 1\n1 2 3\n")
        csv_path = tmp_path / "report.csv"
        assert main(["validate", *toks, str(broken), "--csv", str(csv_path)]) == EXIT_OK
        out = capsys.readouterr().out
        assert f"{len(toks) + 1} sequence(s)" in out
        printed = next(l for l in out.splitlines() if l.startswith("Syntactic validity:"))
        assert float(printed.split(":")[1]) == pytest.approx(len(toks) / (len(toks) + 1), abs=1e-4)
        with open(csv_path) as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["id", *REPORT_COLUMNS]
        assert len(rows) == len(toks) + 2

    def test_metrics_emits_table_columns(self, extract_dir, tmp_path, capsys):
        seqs = [str(p) for p in sorted(extract_dir.glob("sequences/*.json"))][:3]
        csv_path = tmp_path / "metrics.csv"
        assert main(["metrics", *seqs, "--csv", str(csv_path)]) == EXIT_OK
        out = capsys.readouterr().out
        for name in REPORT_COLUMNS:
            assert name in out
        header = csv_path.read_text().splitlines()[0]
        assert "No self-intersection" in header


class TestRewards:
    @pytest.fixture()
    def samples(self, extract_dir, tmp_path):
        toks = sorted(extract_dir.glob("tokens/*.tokens"))[:6]
        rows = []
        for pid, files in (("p0", toks[:3]), ("p1", toks[3:6])):
            for i, f in enumerate(files):
                rows.append({"prompt_id": pid, "tokens": f.read_text(), "greedy": i == 0})
        rows.append({"prompt_id": "p0", "tokens": "1 2 3"})
        path = tmp_path / "samples.jsonl"
        path.write_text("\n".join(json.dumps(r) for r in rows) + "\n")
        return path

    def test_rloo_advantages_sum_to_zero_per_prompt(self, samples, tmp_path):
        out = tmp_path / "adv.jsonl"
        code = main(["rewards", str(samples), "--estimator", "rloo", "--out", str(out)])
        assert code == EXIT_OK
        rows = [json.loads(l) for l in out.read_text().splitlines()]
        assert len(rows) == 7
        by_prompt = {}
        for r in rows:
            by_prompt.setdefault(r["prompt_id"], []).append(r["advantage"])
        for advs in by_prompt.values():
            assert abs(sum(advs)) < 1e-12

    def test_invalid_sample_masked(self, samples, tmp_path):
        out = tmp_path / "adv.jsonl"
        assert main(["rewards", str(samples), "--out", str(out)]) == EXIT_OK
        bad = [json.loads(l) for l in out.read_text().splitlines() if '"syntactic_valid": false' in l]
        assert len(bad) == 1
        assert bad[0]["reward"] == -1.0
        assert bad[0]["self_intersection_free"] is None
        assert bad[0]["no_short_edges"] is None

    def test_remax_uses_greedy_baseline(self, samples, tmp_path):
        out = tmp_path / "adv.jsonl"
        code = main(["rewards", str(samples), "--estimator", "remax", "--out", str(out)])
        assert code == EXIT_OK
        rows = [json.loads(l) for l in out.read_text().splitlines()]
        greedy = {r["prompt_id"]: r["reward"] for r in rows if r["greedy"]}
        for r in rows:
            if r["greedy"]:
                assert r["advantage"] is None
            else:
                assert r["advantage"] == pytest.approx(r["reward"] - greedy[r["prompt_id"]])

    def test_remax_without_greedy_record(self, extract_dir, tmp_path):
        tok = sorted(extract_dir.glob("tokens/*.tokens"))[0]
        path = tmp_path / "s.jsonl"
        path.write_text(json.dumps({"prompt_id": "p", "tokens": tok.read_text()}) + "\n")
        assert main(["rewards", str(path), "--estimator", "remax"]) == EXIT_USAGE

    def test_group_of_one_rejected(self, extract_dir, tmp_path):
        tok = sorted(extract_dir.glob("tokens/*.tokens"))[0]
        path = tmp_path / "s.jsonl"
        path.write_text(json.dumps({"prompt_id": "p", "tokens": tok.read_text()}) + "\n")
        assert main(["rewards", str(path), "--estimator", "grpo"]) == EXIT_USAGE

    def test_missing_samples_file(self, tmp_path):
        assert main(["rewards", str(tmp_path / "nope.jsonl")]) == EXIT_IO


class TestTokenCommands:
    def test_round_trip(self, extract_dir, tmp_path):
        src = sorted(extract_dir.glob("sequences/*.json"))[0]
        toks = tmp_path / "rt.tokens"
        back = tmp_path / "rt.json"
        assert main(["tokenize", str(src), "--out", str(toks)]) == EXIT_OK
        assert main(["detokenize", str(toks), "--out", str(back)]) == EXIT_OK
        seq = sequence_from_json(json.loads(src.read_text()))
        expect = detokenize(tokenize(seq))
        got = sequence_from_json(json.loads(back.read_text()))
        assert got == expect

    def test_detokenize_rejects_garbage(self, tmp_path):
        bad = tmp_path / "bad.tokens"
        bad.write_text("profileforge-tokens 1\n1 2 3\n")
        assert main(["detokenize", str(bad)]) == EXIT_GEOMETRY


class TestUsage:
    def test_no_command(self):
        assert main([]) == EXIT_USAGE

    def test_unknown_command(self):
        assert main(["frobnicate"]) == EXIT_USAGE

    def test_unknown_estimator(self, tmp_path):
        path = tmp_path / "s.jsonl"
        path.write_text("")
        assert main(["rewards", str(path), "--estimator", "ppo"]) == EXIT_USAGE
