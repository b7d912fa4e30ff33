#!/usr/bin/env python3
"""
Guidance Lab command line.

Each subcommand loads an experiment config (JSON, dotted ``--set``
overrides and first-class flags), runs one use case and writes its
artifacts under the run directory. Library errors are logged and exit
with status 1.
"""
import json
import os
import sys
from pathlib import Path

from dotenv import load_dotenv

from guidance_lab.application.services import (
    evaluate,
    extract_curves,
    extract_dissim_curves,
    kappa_matrix,
    load_network,
    predict,
)
from guidance_lab.application.use_cases import lr_sweep, run_experiment, train_guide
from guidance_lab.domain.exceptions import ConfigError, GuidanceLabError
from guidance_lab.domain.value_objects import TaskName
from guidance_lab.infrastructure.cli.cli_parser import create_parser, parse_named_paths, validate_args
from guidance_lab.infrastructure.config import DataConfig, load_config, parse_assignments, resolve_output_dir
from guidance_lab.infrastructure.datasets import build_dataset, pad_id_for, save_dataset
from guidance_lab.infrastructure.integrations.curve_writer import emit_curves
from guidance_lab.shared.constants import EnvironmentVariables
from guidance_lab.shared.helpers import configure_external_loggers, get_logger, setup_logging

logger = get_logger("cli")


def _setup_logging(args):
    level = args.log_level or os.getenv(EnvironmentVariables.LOG_LEVEL, "INFO")
    if args.verbose:
        level = "STEP"
    setup_logging(
        level=level,
        log_file=Path(args.log_file) if args.log_file else None,
        quiet=args.quiet,
        json_format=args.json_logs,
    )
    configure_external_loggers()


def load_experiment(args):
    """Config file + ``--set`` assignments + first-class flags, validated."""
    overrides = parse_assignments(args.set)
    for flag, key in (("lr", "lr"), ("epochs", "epochs"), ("seeds", "seeds"),
                      ("batch_size", "batch_size"), ("output_dir", "output_dir")):
        value = getattr(args, flag, None)
        if value is not None:
            overrides[key] = value
    if getattr(args, "guide_checkpoint", None):
        overrides["guide_checkpoint"] = args.guide_checkpoint
    return load_config(args.config, overrides)


# ============================================================================
# COMMANDS
# ============================================================================

def cmd_gen_data(args):
    if args.config:
        config = load_config(args.config)
        task, data = config.task, config.data.model_dump()
    else:
        task, data = TaskName(args.task), {}
    for flag, key in (("n", "n"), ("seed", "seed"), ("len_range", "len_range"), ("vocab_size", "vocab_size"),
                      ("corpus", "corpus_path"), ("context_len", "context_len"), ("image_file", "image_path"),
                      ("image_size", "image_size"), ("image_classes", "image_classes"),
                      ("image_channels", "image_channels")):
        value = getattr(args, flag)
        if value is not None:
            data[key] = value
    data["dataset_dir"] = None
    split = build_dataset(DataConfig(**data), task)
    save_dataset(split, args.out)
    logger.success(f"{task} dataset {split.sizes()} saved to {args.out} (hash {split.manifest_hash[:12]})")
    return 0


def cmd_train(args):
    config = load_experiment(args)
    if config.guidance.enabled:
        raise ConfigError("train runs baselines; use the guide command for guided configs")
    result = run_experiment(config)
    return 1 if result.summary.failed else 0


def cmd_train_guide(args):
    config = load_experiment(args)
    path, _ = train_guide(config, Path(args.out) if args.out else None)
    print(path)
    return 0


def cmd_guide(args):
    config = load_experiment(args)
    if not config.guidance.enabled:
        raise ConfigError("guide needs guidance.guide_mode other than none")
    result = run_experiment(config)
    return 1 if result.summary.failed else 0


def cmd_sweep_lr(args):
    config = load_experiment(args)
    run_dir = resolve_output_dir(config) / "sweep"
    result = lr_sweep(config, run_dir=run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    with open(run_dir / "sweep.json", "w", encoding="utf-8") as f:
        json.dump(result.to_dict(), f, indent=2)
    print(json.dumps(result.to_dict(), indent=2))
    return 0


def cmd_eval(args):
    config = load_experiment(args)
    dataset = build_dataset(config.data, config.task)
    net = load_network(args.checkpoint)
    result = evaluate(net.eval(), dataset.part(args.split), config.task, config.task_loss,
                      config.batch_size, pad_id_for(dataset))
    print(json.dumps({"split": args.split, "loss": result.loss, **result.metrics}, indent=2))
    return 0


def cmd_compare_errors(args):
    named, error = parse_named_paths(args.checkpoint)
    if error:
        raise ConfigError(error)
    config = load_experiment(args)
    dataset = build_dataset(config.data, config.task)
    examples = dataset.part(args.split)
    predictions = {}
    for name, path in named.items():
        net = load_network(path).eval()
        predictions[name] = predict(net, examples, config.task, config.task_loss,
                                    config.batch_size, pad_id_for(dataset))
        logger.info(f"{name}: accuracy {predictions[name].accuracy:.4f}")
    table = kappa_matrix(predictions)
    document = {
        "split": args.split,
        "accuracy": {name: p.accuracy for name, p in predictions.items()},
        "kappa": json.loads(table.to_json(orient="index")),
    }
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8") as f:
        json.dump(document, f, indent=2)
    print(table.round(4).to_string())
    return 0


def cmd_plot(args):
    if args.kind == "dissim":
        series, ylabel = extract_dissim_curves(args.log), "dissimilarity"
        xlabel = "step"
    elif args.kind == "loss":
        series, ylabel = extract_curves(args.log, "total_loss", "train", "step"), "total loss"
        xlabel = "step"
    else:
        series, ylabel = extract_curves(args.log, "metric", "val", "epoch"), "val metric"
        xlabel = "epoch"
    emit_curves(series, args.format, args.out, xlabel=xlabel, ylabel=ylabel)
    return 0


COMMANDS = {
    "gen-data": cmd_gen_data,
    "train": cmd_train,
    "train-guide": cmd_train_guide,
    "guide": cmd_guide,
    "sweep-lr": cmd_sweep_lr,
    "eval": cmd_eval,
    "compare-errors": cmd_compare_errors,
    "plot": cmd_plot,
}


def main(argv=None):
    """Main entry point with command-line argument parsing"""
    load_dotenv()
    parser = create_parser()
    args = parser.parse_args(sys.argv[1:] if argv is None else argv)

    error_msg = validate_args(args)
    if error_msg:
        parser.error(error_msg)

    _setup_logging(args)
    logger.debug(f"command: {args.command}")
    try:
        return COMMANDS[args.command](args)
    except GuidanceLabError as e:
        logger.error(str(e))
        return 1
    except KeyboardInterrupt:
        logger.warning("Interrupted")
        return 130


if __name__ == "__main__":
    sys.exit(main())
