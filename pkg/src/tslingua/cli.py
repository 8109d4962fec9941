"""Command-line entry point for the whole pipeline.

One binary with subcommands; all randomness flows through ``--seed`` and a
``--config`` file (flat ``key = value`` lines) can pre-set any flag, with
explicit flags taking precedence. Output files carry a header comment line
with the tool version and a hash of the run configuration.
"""

from __future__ import annotations

import hashlib
import json
import sys
from pathlib import Path

import click

from . import __version__, codec, corpus, evalkit, inference, prompts, qasynth, vocabulary
from .errors import BackendError, DataError, InsufficientWordsError, TsLinguaError
from .features import FEATURES
from .records import read_records

EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_BACKEND = 4
EXIT_IO = 5


def config_hash(params: dict) -> str:
    blob = json.dumps(params, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:12]


def header_line(params: dict) -> str:
    return f"tslingua v{__version__} config={config_hash(params)}"


def _load_config_file(path: str) -> dict:
    values = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise DataError(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        values[key.strip().replace("-", "_")] = value.strip()
    return values


class _Cli(click.Group):
    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except (BackendError, InsufficientWordsError) as exc:
            click.echo(f"BackendError: {exc}", err=True)
            sys.exit(EXIT_BACKEND)
        except OSError as exc:
            click.echo(f"IoError: {exc}", err=True)
            sys.exit(EXIT_IO)
        except TsLinguaError as exc:
            click.echo(f"DataError: {exc}", err=True)
            sys.exit(EXIT_DATA)


@click.group(cls=_Cli)
@click.option("--config", "config_path", type=click.Path(exists=True),
              default=None, help="Flat key = value config file; flags override.")
@click.option("--threads", type=int, default=1, show_default=True,
              help="Worker limit for parallel sections.")
@click.version_option(__version__)
@click.pass_context
def main(ctx, config_path, threads):
    """Time-series-as-language toolkit: codec, corpora, forecasting, evaluation."""
    if config_path:
        cfg = _load_config_file(config_path)
        ctx.default_map = {cmd: cfg for cmd in main.commands}
    ctx.obj = {"threads": threads}


_grid_options = [
    click.option("--bins", type=int, default=codec.DEFAULT_BIN_COUNT,
                 show_default=True, help="Number of quantization bins."),
    click.option("--lower", type=float, default=codec.DEFAULT_LOWER,
                 show_default=True, help="Lower edge of the scaled band."),
    click.option("--upper", type=float, default=codec.DEFAULT_UPPER,
                 show_default=True, help="Upper edge of the scaled band."),
]


def grid_options(fn):
    for opt in reversed(_grid_options):
        fn = opt(fn)
    return fn


def _make_grid(bins, lower, upper) -> codec.BinGrid:
    return codec.BinGrid(bins, lower, upper)


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True),
              help="CSV with 'timestamp,value' header.")
@click.option("--out", "out_path", required=True, type=click.Path())
@grid_options
def encode(input_path, out_path, bins, lower, upper):
    """Encode a series CSV into one line of foreign words."""
    grid = _make_grid(bins, lower, upper)
    _, values = corpus.read_series_csv(input_path)
    seq, params = codec.encode(codec.SeriesWindow(values), grid)
    header = header_line({"cmd": "encode", "bins": bins, "lower": lower, "upper": upper})
    Path(out_path).write_text(
        f"# {header} lo={params.lo!r} hi={params.hi!r}\n{seq.render()}\n",
        encoding="utf-8")


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True),
              help="Word file produced by encode.")
@click.option("--out", "out_path", required=True, type=click.Path())
@grid_options
def decode(input_path, out_path, bins, lower, upper):
    """Decode a word file back into a series CSV."""
    grid = _make_grid(bins, lower, upper)
    lines = Path(input_path).read_text(encoding="utf-8").splitlines()
    lo = hi = None
    body = []
    for line in lines:
        if line.startswith("#"):
            for part in line.split():
                if part.startswith("lo="):
                    lo = float(part[3:])
                elif part.startswith("hi="):
                    hi = float(part[3:])
        elif line.strip():
            body.append(line.strip())
    if lo is None or hi is None:
        raise DataError(f"{input_path}: missing lo=/hi= scaling header")
    seq = codec.parse_words(" ".join(body), grid).seq
    values = codec.decode(seq, codec.ScalingParams(lo, hi))
    corpus.write_series_csv(out_path, range(len(values)), values)


@main.command()
@click.option("--out", "out_path", required=True, type=click.Path())
@grid_options
def vocab(out_path, bins, lower, upper):
    """Write the foreign-word vocabulary file (one word per line)."""
    vocabulary.save_vocabulary(
        vocabulary.build_vocabulary(_make_grid(bins, lower, upper)), out_path)


def _write_slices(slices, path, params):
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# {header_line(params)}\n")
        for s in slices:
            fh.write(json.dumps({
                "source_id": s.source_id, "offset": s.offset,
                "window": s.config.window, "history": s.config.history,
                "prediction": s.config.prediction, "step": s.config.step,
                "values": [None if v != v else v for v in s.values],
            }) + "\n")


def _read_slices(path) -> list[corpus.Slice]:
    slices = []
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            try:
                obj = json.loads(line)
                config = corpus.SliceConfig(obj["window"], obj["history"],
                                            obj["prediction"], obj["step"])
                values = tuple(float("nan") if v is None else float(v)
                               for v in obj["values"])
                slices.append(corpus.Slice(obj["source_id"], obj["offset"], config, values))
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise DataError(f"{path}:{lineno}: bad slice ({exc})") from exc
    return slices


@main.command(name="slice")
@click.option("--input", "input_paths", required=True, multiple=True,
              type=click.Path(exists=True), help="Series CSV (repeatable).")
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--policy", type=click.Choice(["largest_only", "all_configs"]),
              default="largest_only", show_default=True)
def slice_cmd(input_paths, out_path, policy):
    """Cut source series into sliding-window slices."""
    slices = []
    for path in input_paths:
        _, values = corpus.read_series_csv(path)
        slices.extend(corpus.slice_series(values, policy=policy,
                                          source_id=Path(path).stem))
    _write_slices(slices, out_path, {"cmd": "slice", "policy": policy})


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--k", type=int, required=True, help="Number of representatives.")
@click.option("--seed", type=int, default=0, show_default=True)
def dedup(input_path, out_path, k, seed):
    """Select k cluster representatives from a slice file."""
    slices = _read_slices(input_path)
    picked = corpus.select_representatives(slices, k, seed)
    _write_slices(picked, out_path, {"cmd": "dedup", "k": k, "seed": seed})


@main.command(name="build-pretrain")
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
def build_pretrain(input_path, out_path):
    """Render slices into autoregressive forecast records."""
    slices = _read_slices(input_path)
    corpus.build_pretrain_corpus(slices, out_path,
                                 header=header_line({"cmd": "build-pretrain"}))


@main.command(name="build-finetune")
@click.option("--text-qa", "text_qa", required=True, type=click.Path(exists=True))
@click.option("--forecast", "forecast_path", required=True, type=click.Path(exists=True))
@click.option("--context-forecast", "context_path", required=True, type=click.Path(exists=True))
@click.option("--ts-qa", "ts_qa", required=True, type=click.Path(exists=True))
@click.option("--per-task", type=int, default=corpus.PRODUCTION_PER_TASK,
              show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
def build_finetune(text_qa, forecast_path, context_path, ts_qa, per_task, seed, out_path):
    """Blend the four task sources into one fine-tuning mix."""
    sources = {
        "text_qa": read_records(text_qa),
        "forecast": read_records(forecast_path),
        "context_forecast": read_records(context_path),
        "ts_qa": read_records(ts_qa),
    }
    params = {"cmd": "build-finetune", "per_task": per_task, "seed": seed}
    corpus.build_finetune_mix(sources, per_task, seed, path=out_path,
                              header=header_line(params))


@main.command(name="synth-qa")
@click.option("--per-feature", type=int, required=True,
              help="Samples per (feature, length) cell.")
@click.option("--lengths", default="64,128,256,512", show_default=True,
              help="Comma-separated series lengths.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
def synth_qa(per_feature, lengths, seed, out_path):
    """Generate the labeled question-answering dataset."""
    lengths = tuple(int(v) for v in lengths.split(","))
    samples = qasynth.generate_dataset(per_feature, seed, lengths=lengths)
    params = {"cmd": "synth-qa", "per_feature": per_feature,
              "lengths": lengths, "seed": seed}
    qasynth.save_dataset(samples, out_path, header=header_line(params))


@main.command()
@click.option("--task", type=click.Choice(["forecast", "context", "qa"]),
              default="forecast", show_default=True)
@click.option("--input", "input_path", required=True, type=click.Path(exists=True),
              help="Series CSV to embed in the prompt.")
@click.option("--feature", type=click.Choice(FEATURES), default="trend",
              show_default=True, help="Feature taxonomy for qa prompts.")
@click.option("--background", default="", help="Context background text.")
@click.option("--weather", default="", help="Context weather text.")
@click.option("--date", default="", help="Context date text.")
@click.option("--out", "out_path", default=None, type=click.Path())
def prompt(task, input_path, feature, background, weather, date, out_path):
    """Render an inference-mode prompt for a series."""
    _, values = corpus.read_series_csv(input_path)
    seq, _ = codec.encode(codec.SeriesWindow(values))
    if task == "forecast":
        bundle = prompts.render_forecast_prompt(seq)
    elif task == "context":
        ctx = prompts.ContextBlock(background=background, weather=weather, date=date)
        bundle = prompts.render_context_prompt(ctx, seq)
    else:
        bundle = prompts.render_qa_prompt(prompts.QAPrompt(feature, seq))
    text = bundle.render()
    if out_path:
        Path(out_path).write_text(text, encoding="utf-8")
    else:
        click.echo(text, nl=False)


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--horizon", type=int, required=True)
@click.option("--backend", "backend_kind",
              type=click.Choice(["last_value", "seasonal_naive", "ngram", "external"]),
              default="last_value", show_default=True)
@click.option("--backend-cmd", default=None,
              help="External backend command (or TSLINGUA_BACKEND_CMD).")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
def forecast(input_path, horizon, backend_kind, backend_cmd, seed, out_path):
    """Forecast the next values of a series through the word pipeline."""
    _, values = corpus.read_series_csv(input_path)
    backend = inference.make_backend(backend_kind, seed=seed, command=backend_cmd)
    try:
        window = codec.SeriesWindow(values, horizon=horizon)
        predicted = inference.forecast(window, backend)
    finally:
        if hasattr(backend, "close"):
            backend.close()
    corpus.write_series_csv(out_path, range(len(predicted)), predicted)


def _parse_multiples(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.split(","))


@main.command(name="eval-forecast")
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--pred-len", type=int, required=True,
              help="A-priori period of the dataset; used as prediction length.")
@click.option("--multiples", default="2,3,4,5", show_default=True,
              help="History lengths as multiples of the prediction length.")
@click.option("--backend", "backend_kind",
              type=click.Choice(["last_value", "seasonal_naive", "ngram", "external"]),
              default="last_value", show_default=True)
@click.option("--backend-cmd", default=None)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path(),
              help="CSV table; a .jsonl report is written alongside.")
def eval_forecast(input_path, pred_len, multiples, backend_kind, backend_cmd, seed, out_path):
    """Rolling-origin MAE evaluation on the chronological test split."""
    _, values = corpus.read_series_csv(input_path)
    config = evalkit.EvalConfig(pred_len, _parse_multiples(multiples))
    backend = inference.make_backend(backend_kind, seed=seed, command=backend_cmd)
    try:
        report = evalkit.evaluate_forecaster(values, config, backend)
    finally:
        if hasattr(backend, "close"):
            backend.close()
    params = {"cmd": "eval-forecast", "pred_len": pred_len,
              "multiples": multiples, "backend": backend_kind, "seed": seed}
    dataset = Path(input_path).stem
    with Path(out_path).open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# {header_line(params)}\n")
        fh.write("dataset,hist,pred,method,mae\n")
        for r in report.results:
            fh.write(f"{dataset},{r.history_len},{pred_len},{backend_kind},{r.mae:.6f}\n")
    jsonl_path = Path(out_path).with_suffix(".jsonl")
    with jsonl_path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# {header_line(params)}\n")
        for r in report.results:
            fh.write(json.dumps({
                "dataset": dataset, "hist": r.history_len, "pred": pred_len,
                "method": backend_kind, "mae": r.mae, "origins": r.origins,
            }) + "\n")
    click.echo(f"mean MAE: {report.mean_mae:.6f}")


@main.command(name="eval-qa")
@click.option("--samples", "samples_path", required=True, type=click.Path(exists=True))
@click.option("--responses", "responses_path", required=True, type=click.Path(exists=True),
              help="One model response per line, aligned with the sample file.")
@click.option("--out", "out_path", required=True, type=click.Path())
def eval_qa(samples_path, responses_path, out_path):
    """Score QA responses against gold categories."""
    samples = qasynth.load_dataset(samples_path)
    responses = Path(responses_path).read_text(encoding="utf-8").splitlines()
    accuracy = evalkit.score_qa(responses, samples)
    params = {"cmd": "eval-qa"}
    with Path(out_path).open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# {header_line(params)}\n")
        fh.write("feature,length,accuracy\n")
        for (feature, length), acc in sorted(accuracy.items()):
            fh.write(f"{feature},{length},{acc:.4f}\n")
    overall = sum(accuracy.values()) / len(accuracy)
    click.echo(f"average accuracy: {overall:.4f}")


if __name__ == "__main__":
    main()
