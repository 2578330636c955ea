"""Command-line entry point.

Subcommands cover the pipeline stages (generate, annotate, factcheck,
build, export-sft), evaluation, and one-off rendering. A JSON config file
provides defaults; flags override. Exit codes: 0 success, 1 validation
error, 2 transport error, 3 data error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .config import PipelineConfig, load_config
from .dataset import DatasetBuilder, export_sft, load_samples
from .errors import PipelineError, ValidationError
from .evaluation import emit_report, evaluate, load_candidates
from .ou import OuParams, generate_series
from .plotting import render_plot
from .scorers import RemoteScorer, RuleBasedScorer

log = logging.getLogger("tsdistill")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(f"{self.prog}: {message}")


class _JsonFormatter(logging.Formatter):
    def format(self, record):
        payload = {"level": record.levelname.lower(), "logger": record.name, "msg": record.getMessage()}
        return json.dumps(payload, sort_keys=True)


def _setup_logging(log_json: bool) -> None:
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(
        _JsonFormatter() if log_json else logging.Formatter("%(levelname)s %(name)s: %(message)s")
    )
    root = logging.getLogger()
    root.handlers[:] = [handler]
    root.setLevel(logging.INFO)


def build_parser() -> _Parser:
    parser = _Parser(prog="tsdistill", description=__doc__)
    parser.add_argument("--config", help="JSON config file (defaults apply when omitted)")
    parser.add_argument("--log-json", action="store_true", help="emit machine-readable JSON log lines")
    sub = parser.add_subparsers(dest="command", required=True)

    def stage(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--out", help="dataset directory (overrides config output_dir)")
        p.add_argument("--seed", type=int, help="dataset seed override")
        p.add_argument("--n", type=int, dest="n_samples", help="sample count override")
        p.add_argument("--train", type=int, help="train split count override")
        p.add_argument("--test", type=int, help="test split count override")
        p.add_argument("--force", action="store_true", help="rebuild even if outputs exist")
        return p

    p = stage("generate", "generate series, labels, digits, and plots")
    p = stage("annotate", "fill annotations for generated samples")
    p.add_argument("--mock", action="store_true", help="use the offline oracle annotator")
    p.add_argument("--jobs", type=int, default=4, help="parallel annotation requests")
    p = stage("factcheck", "compare annotations to fact sentences; replace contradicted extrema")
    p.add_argument("--scorer", choices=("rule", "remote"), help="NLI scorer override")
    p.add_argument("--scorer-url", help="scoring service base URL for --scorer remote")
    p = stage("build", "run the full pipeline")
    p.add_argument("--mock", action="store_true", help="use the offline oracle annotator")
    p.add_argument("--jobs", type=int, default=4, help="parallel annotation requests")
    p.add_argument("--scorer", choices=("rule", "remote"), help="NLI scorer override")
    p.add_argument("--scorer-url", help="scoring service base URL for --scorer remote")
    p = stage("export-sft", "rewrite the SFT train/test JSONL files")

    p = sub.add_parser("evaluate", help="score candidate annotations against the test split")
    p.add_argument("--dataset", help="dataset directory (overrides config output_dir)")
    p.add_argument("--candidates", required=True, help="candidates JSONL file")
    p.add_argument("--mode", choices=("strict", "freetext"), default="strict")
    p.add_argument("--scorer", choices=("rule", "remote"), help="NLI scorer override")
    p.add_argument("--scorer-url", help="scoring service base URL for --scorer remote")
    p.add_argument("--report-dir", help="directory for report.json/report.txt (default: dataset dir)")

    p = sub.add_parser("render", help="render one series to a PNG")
    p.add_argument("--kappa", type=float, required=True)
    p.add_argument("--r-bar", type=float, required=True)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--n-steps", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output PNG path")
    p.add_argument("--force", action="store_true", help="overwrite an existing file")
    return parser


def _resolved_config(args) -> PipelineConfig:
    config = load_config(args.config)
    overrides = {}
    if getattr(args, "seed", None) is not None:
        overrides["dataset_seed"] = args.seed
    if getattr(args, "n_samples", None) is not None:
        overrides["n_samples"] = args.n_samples
    if getattr(args, "train", None) is not None:
        overrides["train_count"] = args.train
    if getattr(args, "test", None) is not None:
        overrides["test_count"] = args.test
    if getattr(args, "out", None):
        overrides["output_dir"] = args.out
    if getattr(args, "scorer", None):
        overrides["scorer"] = args.scorer
    if getattr(args, "scorer_url", None):
        overrides["scorer_url"] = args.scorer_url
    if not overrides:
        return config
    data = config.to_dict()
    data.update(overrides)
    return PipelineConfig.from_dict(data)


def _builder(args, config: PipelineConfig) -> DatasetBuilder:
    return DatasetBuilder(
        config,
        mock=getattr(args, "mock", False),
        jobs=getattr(args, "jobs", 4),
        force=getattr(args, "force", False),
    )


def _scorer_for(config: PipelineConfig):
    if config.scorer == "remote":
        remote = RemoteScorer(config.scorer_url)
        return remote, remote
    return RuleBasedScorer(), None


def _cmd_generate(args):
    config = _resolved_config(args)
    manifest = _builder(args, config).generate()
    log.info("generated %d samples under %s", config.n_samples, config.output_dir)
    return manifest


def _cmd_annotate(args):
    config = _resolved_config(args)
    builder = _builder(args, config)
    builder.generate()
    builder.annotate()
    log.info("annotations complete under %s", config.output_dir)


def _cmd_factcheck(args):
    config = _resolved_config(args)
    report = _builder(args, config).fact_check()
    log.info(
        "fact-check rates: trend=%.3f noise=%.3f extrema=%.3f (%d replaced)",
        report.rates["trend"], report.rates["noise"], report.rates["extrema"],
        len(report.replaced_ids),
    )


def _cmd_build(args):
    config = _resolved_config(args)
    _builder(args, config).build()
    log.info("dataset complete under %s", config.output_dir)


def _cmd_export_sft(args):
    config = _resolved_config(args)
    out_dir = Path(config.output_dir)
    samples = load_samples(out_dir)
    export_sft([s for s in samples if s.split == "train"], out_dir / "sft_train.jsonl")
    export_sft([s for s in samples if s.split == "test"], out_dir / "sft_test.jsonl")
    log.info("SFT files rewritten under %s", out_dir)


def _cmd_evaluate(args):
    config = _resolved_config(args)
    dataset_dir = Path(args.dataset or config.output_dir)
    samples = load_samples(dataset_dir)
    test_samples = [s for s in samples if s.split == "test"]
    candidates = load_candidates(args.candidates, args.mode)
    scorer, embedder = _scorer_for(config)
    report = evaluate(test_samples, candidates, scorer, embedder=embedder, mode=args.mode)
    report_dir = Path(args.report_dir or dataset_dir)
    json_path, text_path = emit_report(report, report_dir)
    sys.stdout.write(report.to_text())
    log.info("report written to %s and %s", json_path, text_path)


def _cmd_render(args):
    out = Path(args.out)
    if out.exists() and not args.force:
        raise ValidationError(f"{out} already exists; pass --force to overwrite")
    params = OuParams(
        kappa=args.kappa, r_bar=args.r_bar, sigma=args.sigma, n_steps=args.n_steps, seed=args.seed
    )
    render_plot(generate_series(params), out)
    log.info("wrote %s", out)


_COMMANDS = {
    "generate": _cmd_generate,
    "annotate": _cmd_annotate,
    "factcheck": _cmd_factcheck,
    "build": _cmd_build,
    "export-sft": _cmd_export_sft,
    "evaluate": _cmd_evaluate,
    "render": _cmd_render,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _setup_logging(args.log_json)
        _COMMANDS[args.command](args)
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
