import math

import numpy as np
import pytest

from tslingua.codec import parse_words
from tslingua.corpus import (
    PAPER_SLICE_CONFIGS,
    Slice,
    SliceConfig,
    build_finetune_mix,
    build_pretrain_corpus,
    featurize_slice,
    read_series_csv,
    select_representatives,
    slice_series,
    write_series_csv,
)
from tslingua.errors import (
    DataError,
    InsufficientSlicesError,
    SourceTooSmallError,
    TooFewValuesError,
)
from tslingua.records import CorpusRecord, read_records

NAN = float("nan")


def make_slice(values, config=SliceConfig(36, 32, 4, 2), source="s"):
    return Slice(source, 0, config, tuple(values))


class TestSliceConfig:
    def test_paper_configs(self):
        assert [(c.window, c.history, c.prediction, c.step) for c in PAPER_SLICE_CONFIGS] == [
            (576, 512, 64, 32), (288, 256, 32, 16), (144, 128, 16, 8),
            (72, 64, 8, 4), (36, 32, 4, 2)]

    def test_window_consistency_enforced(self):
        with pytest.raises(ValueError):
            SliceConfig(100, 90, 20, 4)

    def test_step_positive(self):
        with pytest.raises(ValueError):
            SliceConfig(36, 32, 4, 0)


class TestSliceSeries:
    def test_exact_fit_single_slice(self):
        slices = slice_series(range(576))
        assert len(slices) == 1
        assert slices[0].offset == 0
        assert slices[0].config.window == 576

    def test_two_slices(self):
        slices = slice_series(range(608))
        assert [s.offset for s in slices] == [0, 32]

    def test_below_minimum(self):
        assert slice_series(range(35)) == []

    def test_largest_only_picks_max_fitting(self):
        slices = slice_series(range(300))
        assert {s.config.window for s in slices} == {288}

    def test_all_configs_policy(self):
        slices = slice_series(range(300), policy="all_configs")
        assert {s.config.window for s in slices} == {288, 144, 72, 36}

    def test_closed_form_count(self):
        rng = np.random.default_rng(9)
        for config in PAPER_SLICE_CONFIGS:
            for length in rng.integers(config.window, 4000, 40):
                slices = slice_series(range(int(length)), configs=[config])
                assert len(slices) == (length - config.window) // config.step + 1

    def test_values_copied(self):
        source = list(range(36))
        slices = slice_series(source)
        source[0] = 999
        assert slices[0].values[0] == 0

    def test_history_prediction_split(self):
        s = slice_series(range(36))[0]
        assert len(s.history_values) == 32
        assert len(s.prediction_values) == 4


class TestFeaturize:
    def test_constant_slice_zero_vector(self):
        f = featurize_slice(make_slice([5.0] * 36))
        assert np.allclose(f, 0.0)

    def test_znorm_identity_resample(self):
        values = list(np.random.default_rng(0).normal(size=32))
        s = Slice("s", 0, SliceConfig(32, 28, 4, 2), tuple(values))
        f = featurize_slice(s, target_len=32)
        assert f.mean() == pytest.approx(0, abs=1e-9)
        assert f.std() == pytest.approx(1, abs=1e-9)

    def test_ramps_identical(self):
        r1 = featurize_slice(make_slice(np.linspace(0, 1, 36)))
        r2 = featurize_slice(Slice("s", 0, SliceConfig(72, 64, 8, 4),
                                   tuple(np.linspace(-50, 20, 72))))
        assert np.allclose(r1, r2, atol=1e-9)

    def test_missing_interpolated(self):
        values = list(np.linspace(0, 1, 36))
        values[10] = NAN
        f = featurize_slice(make_slice(values))
        assert np.all(np.isfinite(f))

    def test_too_few_values(self):
        with pytest.raises(TooFewValuesError):
            featurize_slice(make_slice([1.0] + [NAN] * 35))


def two_blob_slices(n_per_blob=20, seed=0):
    rng = np.random.default_rng(seed)
    slices = []
    for b, shape in enumerate((np.sin(np.linspace(0, 6 * np.pi, 36)),
                               np.linspace(0, 1, 36))):
        for i in range(n_per_blob):
            noisy = shape + rng.normal(0, 0.01, 36)
            slices.append(Slice(f"blob{b}", i, SliceConfig(36, 32, 4, 2), tuple(noisy)))
    return slices


class TestSelectRepresentatives:
    def test_k_equals_n(self):
        slices = two_blob_slices(3)
        assert select_representatives(slices, len(slices), seed=1) == slices

    def test_k_one(self):
        assert len(select_representatives(two_blob_slices(3), 1, seed=1)) == 1

    def test_two_blobs_one_each(self):
        slices = two_blob_slices()
        reps = select_representatives(slices, 2, seed=7)
        assert len(reps) == 2
        assert {r.source_id for r in reps} == {"blob0", "blob1"}

    def test_nearest_centroid_oracle(self):
        # each representative must be closer to its own blob mean than to the other's
        slices = two_blob_slices()
        feats = {id(s): featurize_slice(s) for s in slices}
        blob_means = {
            b: np.mean([feats[id(s)] for s in slices if s.source_id == b], axis=0)
            for b in ("blob0", "blob1")}
        for rep in select_representatives(slices, 2, seed=7):
            own = np.linalg.norm(feats[id(rep)] - blob_means[rep.source_id])
            other = min(np.linalg.norm(feats[id(rep)] - m)
                        for b, m in blob_means.items() if b != rep.source_id)
            assert own < other

    def test_deterministic(self):
        slices = two_blob_slices()
        runs = [select_representatives(slices, 2, seed=3) for _ in range(5)]
        assert all(r == runs[0] for r in runs)

    def test_subset_no_duplicates(self):
        slices = two_blob_slices(10)
        reps = select_representatives(slices, 7, seed=2)
        ids = [(r.source_id, r.offset) for r in reps]
        assert len(set(ids)) == len(ids)
        assert all(r in slices for r in reps)

    def test_k_too_large(self):
        with pytest.raises(InsufficientSlicesError):
            select_representatives(two_blob_slices(2), 10, seed=0)


class TestPretrainCorpus:
    def test_record_per_slice(self, tmp_path):
        slices = slice_series(range(700))
        path = tmp_path / "corpus.jsonl"
        records = build_pretrain_corpus(slices, path)
        assert len(records) == len(slices)

    def test_output_parses_to_prediction_words(self, tmp_path):
        slices = slice_series(range(36))
        records = build_pretrain_corpus(slices, tmp_path / "c.jsonl")
        parsed = parse_words(records[0].output)
        assert len(parsed.seq) == slices[0].config.prediction

    def test_round_trip(self, tmp_path):
        slices = slice_series(range(620))
        path = tmp_path / "corpus.jsonl"
        records = build_pretrain_corpus(slices, path, header="test run")
        assert read_records(path) == records


def fake_records(task, n):
    return [CorpusRecord(f"instruction {i}", f"input {i}", f"output {i}", task)
            for i in range(n)]


class TestFinetuneMix:
    SOURCES = {
        "text_qa": fake_records("text_qa", 40),
        "forecast": fake_records("forecast", 40),
        "context_forecast": fake_records("context_forecast", 40),
        "ts_qa": fake_records("ts_qa", 40),
    }

    def test_counts(self, tmp_path):
        mixed = build_finetune_mix(self.SOURCES, per_task=25, seed=0)
        assert len(mixed) == 100
        for task in self.SOURCES:
            assert sum(r.task == task for r in mixed) == 25

    def test_desk_scale_deterministic(self, tmp_path):
        p1, p2 = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        build_finetune_mix(self.SOURCES, per_task=2, seed=11, path=p1, header="h")
        build_finetune_mix(self.SOURCES, per_task=2, seed=11, path=p2, header="h")
        assert p1.read_bytes() == p2.read_bytes()
        assert len(read_records(p1)) == 8

    def test_source_too_small(self):
        with pytest.raises(SourceTooSmallError):
            build_finetune_mix(self.SOURCES, per_task=41, seed=0)


class TestSeriesCsv:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "series.csv"
        values = [1.5, NAN, -3.25]
        write_series_csv(path, ["2024-01-01", "2024-01-02", "2024-01-03"], values)
        timestamps, back = read_series_csv(path)
        assert timestamps[0] == "2024-01-01"
        assert back[0] == 1.5 and math.isnan(back[1]) and back[2] == -3.25

    def test_missing_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(DataError):
            read_series_csv(path)

    def test_bad_value(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("timestamp,value\n2024-01-01,xyz\n")
        with pytest.raises(DataError):
            read_series_csv(path)
