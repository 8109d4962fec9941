import json
import math
import sys

import numpy as np
import pytest
from click.testing import CliRunner

from tslingua.cli import EXIT_BACKEND, EXIT_DATA, EXIT_USAGE, config_hash, main
from tslingua.corpus import read_series_csv, write_series_csv


@pytest.fixture
def runner():
    return CliRunner()


def write_csv(path, values):
    write_series_csv(path, range(len(values)), values)
    return str(path)


class TestConfigHash:
    def test_stable(self):
        assert config_hash({"a": 1}) == config_hash({"a": 1})
        assert config_hash({"a": 1}) != config_hash({"a": 2})
        assert len(config_hash({})) == 12

    def test_key_order_irrelevant(self):
        assert config_hash({"a": 1, "b": 2}) == config_hash({"b": 2, "a": 1})


class TestEncodeDecode:
    def test_round_trip(self, runner, tmp_path):
        values = [3.0, 7.5, -2.25, 11.0]
        src = write_csv(tmp_path / "in.csv", values)
        words = tmp_path / "words.txt"
        out = tmp_path / "out.csv"
        r1 = runner.invoke(main, ["encode", "--input", src, "--out", str(words)])
        assert r1.exit_code == 0, r1.output
        r2 = runner.invoke(main, ["decode", "--input", str(words), "--out", str(out)])
        assert r2.exit_code == 0, r2.output
        _, back = read_series_csv(out)
        bound = 0.0001 * (max(values) - min(values))
        assert all(abs(a - b) <= bound for a, b in zip(values, back))

    def test_encode_output_has_header(self, runner, tmp_path):
        src = write_csv(tmp_path / "in.csv", [1.0, 2.0])
        words = tmp_path / "words.txt"
        runner.invoke(main, ["encode", "--input", src, "--out", str(words)])
        first = words.read_text().splitlines()[0]
        assert first.startswith("# tslingua v")
        assert "config=" in first and "lo=" in first and "hi=" in first

    def test_decode_missing_scaling_header(self, runner, tmp_path):
        bad = tmp_path / "words.txt"
        bad.write_text("###0.0001### ###0.0003###\n")
        out = runner.invoke(main, ["decode", "--input", str(bad),
                                   "--out", str(tmp_path / "o.csv")])
        assert out.exit_code == EXIT_DATA

    def test_encode_all_missing_is_data_error(self, runner, tmp_path):
        src = write_csv(tmp_path / "in.csv", [float("nan")] * 4)
        out = runner.invoke(main, ["encode", "--input", src,
                                   "--out", str(tmp_path / "w.txt")])
        assert out.exit_code == EXIT_DATA


class TestVocab:
    def test_file_line_count(self, runner, tmp_path):
        out = tmp_path / "vocab.txt"
        r = runner.invoke(main, ["vocab", "--out", str(out)])
        assert r.exit_code == 0
        lines = out.read_text().splitlines()
        assert len(lines) == 10001
        assert lines[0] == "###-0.9999###"
        assert lines[-1] == "###Nan###"


class TestSliceDedup:
    def make_sources(self, tmp_path):
        rng = np.random.default_rng(0)
        paths = []
        for b, shape in enumerate((np.sin(np.linspace(0, 20, 80)),
                                   np.linspace(0, 3, 80))):
            noisy = shape + rng.normal(0, 0.01, 80)
            paths.append(write_csv(tmp_path / f"blob{b}.csv", list(noisy)))
        return paths

    def test_slice_then_dedup_deterministic(self, runner, tmp_path):
        paths = self.make_sources(tmp_path)
        sliced = tmp_path / "slices.jsonl"
        cmd = ["slice"] + [a for p in paths for a in ("--input", p)] + \
            ["--out", str(sliced)]
        assert runner.invoke(main, cmd).exit_code == 0

        outs = []
        for i in range(2):
            out = tmp_path / f"dedup{i}.jsonl"
            r = runner.invoke(main, ["dedup", "--input", str(sliced),
                                     "--out", str(out), "--k", "2", "--seed", "5"])
            assert r.exit_code == 0, r.output
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_dedup_threads_flag_does_not_change_output(self, runner, tmp_path):
        paths = self.make_sources(tmp_path)
        sliced = tmp_path / "slices.jsonl"
        cmd = ["slice"] + [a for p in paths for a in ("--input", p)] + \
            ["--out", str(sliced)]
        runner.invoke(main, cmd)
        outs = []
        for threads in ("1", "4"):
            out = tmp_path / f"dedup_t{threads}.jsonl"
            r = runner.invoke(main, ["--threads", threads, "dedup", "--input",
                                     str(sliced), "--out", str(out),
                                     "--k", "2", "--seed", "5"])
            assert r.exit_code == 0, r.output
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_dedup_k_too_large(self, runner, tmp_path):
        paths = self.make_sources(tmp_path)
        sliced = tmp_path / "slices.jsonl"
        cmd = ["slice"] + [a for p in paths for a in ("--input", p)] + \
            ["--out", str(sliced)]
        runner.invoke(main, cmd)
        r = runner.invoke(main, ["dedup", "--input", str(sliced),
                                 "--out", str(tmp_path / "o.jsonl"),
                                 "--k", "999", "--seed", "0"])
        assert r.exit_code == EXIT_DATA


class TestCorpusCommands:
    def test_build_pretrain(self, runner, tmp_path):
        src = write_csv(tmp_path / "s.csv", list(np.sin(np.arange(80))))
        sliced = tmp_path / "slices.jsonl"
        runner.invoke(main, ["slice", "--input", src, "--out", str(sliced)])
        out = tmp_path / "corpus.jsonl"
        r = runner.invoke(main, ["build-pretrain", "--input", str(sliced),
                                 "--out", str(out)])
        assert r.exit_code == 0, r.output
        lines = [l for l in out.read_text().splitlines() if not l.startswith("#")]
        assert len(lines) > 0
        assert json.loads(lines[0])["task"] == "forecast"

    def test_build_finetune_counts(self, runner, tmp_path):
        from tslingua.records import CorpusRecord, write_records
        paths = {}
        for task in ("text_qa", "forecast", "context_forecast", "ts_qa"):
            p = tmp_path / f"{task}.jsonl"
            write_records([CorpusRecord(f"i{i}", f"in{i}", f"o{i}", task)
                           for i in range(10)], p)
            paths[task] = str(p)
        out = tmp_path / "mix.jsonl"
        r = runner.invoke(main, [
            "build-finetune", "--text-qa", paths["text_qa"],
            "--forecast", paths["forecast"],
            "--context-forecast", paths["context_forecast"],
            "--ts-qa", paths["ts_qa"], "--per-task", "3", "--seed", "0",
            "--out", str(out)])
        assert r.exit_code == 0, r.output
        lines = [l for l in out.read_text().splitlines() if not l.startswith("#")]
        assert len(lines) == 12


class TestSynthQa:
    def test_deterministic_bytes(self, runner, tmp_path):
        outs = []
        for i in range(2):
            out = tmp_path / f"qa{i}.jsonl"
            r = runner.invoke(main, ["synth-qa", "--per-feature", "3",
                                     "--lengths", "64", "--seed", "9",
                                     "--out", str(out)])
            assert r.exit_code == 0, r.output
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_eval_qa_perfect_responses(self, runner, tmp_path):
        samples = tmp_path / "qa.jsonl"
        runner.invoke(main, ["synth-qa", "--per-feature", "3", "--lengths", "64",
                             "--seed", "1", "--out", str(samples)])
        from tslingua.qasynth import load_dataset
        loaded = load_dataset(samples)
        responses = tmp_path / "responses.txt"
        responses.write_text("".join(f"It shows {s.category}.\n" for s in loaded))
        out = tmp_path / "acc.csv"
        r = runner.invoke(main, ["eval-qa", "--samples", str(samples),
                                 "--responses", str(responses), "--out", str(out)])
        assert r.exit_code == 0, r.output
        assert "average accuracy: 1.0000" in r.output
        rows = [l for l in out.read_text().splitlines()
                if l and not l.startswith("#")][1:]
        assert all(row.endswith("1.0000") for row in rows)


class TestPromptCommand:
    def test_forecast_prompt_sections(self, runner, tmp_path):
        src = write_csv(tmp_path / "s.csv", [1.0, 2.0, 3.0])
        r = runner.invoke(main, ["prompt", "--input", src])
        assert r.exit_code == 0
        for section in ("[SYSTEM]", "[INTRODUCTION]", "[INPUT]", "[RESPONSE]"):
            assert section in r.output
        assert r.output.endswith("[RESPONSE]\n")

    def test_qa_prompt_mentions_categories(self, runner, tmp_path):
        src = write_csv(tmp_path / "s.csv", [1.0, 2.0, 3.0])
        r = runner.invoke(main, ["prompt", "--input", src, "--task", "qa",
                                 "--feature", "season"])
        assert r.exit_code == 0
        assert "fixed seasonality" in r.output


class TestForecastCommand:
    def test_seasonal_naive_sinusoid(self, runner, tmp_path):
        period, hist, horizon = 24, 48, 24
        t = np.arange(hist + horizon)
        series = 10 + 5 * np.sin(2 * np.pi * t / period)
        src = write_csv(tmp_path / "s.csv", list(series[:hist]))
        out = tmp_path / "pred.csv"
        r = runner.invoke(main, ["forecast", "--input", src, "--horizon",
                                 str(horizon), "--backend", "seasonal_naive",
                                 "--out", str(out)])
        assert r.exit_code == 0, r.output
        _, predicted = read_series_csv(out)
        bound = 2 * 0.0001 * 10
        assert len(predicted) == horizon
        assert all(abs(p - tr) <= bound
                   for p, tr in zip(predicted, series[hist:]))

    def test_external_backend_echo(self, runner, tmp_path):
        from tests.test_inference import ECHO_SCRIPT
        script = tmp_path / "echo_backend.py"
        script.write_text(ECHO_SCRIPT)
        history = [1.0, 2.0, 3.0, 4.0]
        src = write_csv(tmp_path / "s.csv", history)
        out = tmp_path / "pred.csv"
        r = runner.invoke(main, ["forecast", "--input", src, "--horizon", "2",
                                 "--backend", "external", "--backend-cmd",
                                 f"{sys.executable} {script}",
                                 "--out", str(out)])
        assert r.exit_code == 0, r.output
        _, predicted = read_series_csv(out)
        bound = 0.0001 * (max(history) - min(history))
        # the echo backend replays the history prefix
        assert all(abs(p - h) <= bound for p, h in zip(predicted, history))

    def test_missing_backend_cmd_is_backend_error(self, runner, tmp_path):
        src = write_csv(tmp_path / "s.csv", [1.0, 2.0, 3.0])
        r = runner.invoke(main, ["forecast", "--input", src, "--horizon", "2",
                                 "--backend", "external",
                                 "--out", str(tmp_path / "o.csv")],
                          env={"TSLINGUA_BACKEND_CMD": ""})
        assert r.exit_code == EXIT_BACKEND


class TestEvalForecastCommand:
    def test_last_value_constant_series(self, runner, tmp_path):
        src = write_csv(tmp_path / "s.csv", [5.0] * 200)
        out = tmp_path / "table.csv"
        r = runner.invoke(main, ["eval-forecast", "--input", src,
                                 "--pred-len", "10", "--multiples", "2,3",
                                 "--out", str(out)])
        assert r.exit_code == 0, r.output
        assert "mean MAE: 0.000000" in r.output
        lines = out.read_text().splitlines()
        assert lines[1] == "dataset,hist,pred,method,mae"
        assert len(lines) == 4
        assert (tmp_path / "table.jsonl").exists()


class TestConfigFile:
    def test_config_presets_flags(self, runner, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("per-feature = 2\nlengths = 64\nseed = 7\n")
        out = tmp_path / "qa.jsonl"
        r = runner.invoke(main, ["--config", str(cfg), "synth-qa",
                                 "--out", str(out)])
        assert r.exit_code == 0, r.output
        from tslingua.qasynth import load_dataset
        samples = load_dataset(out)
        assert {len(s.series) for s in samples} == {64}

    def test_explicit_flag_overrides_config(self, runner, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("per-feature = 2\nlengths = 64\n")
        out = tmp_path / "qa.jsonl"
        r = runner.invoke(main, ["--config", str(cfg), "synth-qa",
                                 "--lengths", "128", "--out", str(out)])
        assert r.exit_code == 0, r.output
        from tslingua.qasynth import load_dataset
        assert {len(s.series) for s in load_dataset(out)} == {128}


class TestExitCodes:
    def test_usage_error(self, runner):
        assert runner.invoke(main, ["encode"]).exit_code == EXIT_USAGE

    def test_unknown_command(self, runner):
        assert runner.invoke(main, ["frobnicate"]).exit_code == EXIT_USAGE

    def test_help_runs(self, runner):
        r = runner.invoke(main, ["--help"])
        assert r.exit_code == 0
        for cmd in ("encode", "decode", "vocab", "slice", "dedup",
                    "build-pretrain", "build-finetune", "synth-qa", "prompt",
                    "forecast", "eval-forecast", "eval-qa"):
            assert cmd in r.output
