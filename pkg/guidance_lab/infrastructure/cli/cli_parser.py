import argparse

from guidance_lab import __version__

SUBCOMMANDS = ("gen-data", "train", "train-guide", "guide", "sweep-lr", "eval", "compare-errors", "plot")


def _logging_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--log-level",
        default=None,
        help="Logging level (DEBUG, STEP, INFO, WARNING, ERROR); default from GUIDANCE_LAB_LOG_LEVEL or INFO"
    )
    common.add_argument(
        "--verbose", "-v",
        action="store_true",
        help="Log every training step"
    )
    common.add_argument(
        "--quiet", "-q",
        action="store_true",
        help="Only log warnings and errors"
    )
    common.add_argument(
        "--log-file",
        default=None,
        help="Also write DEBUG logs to this file"
    )
    common.add_argument(
        "--json-logs",
        action="store_true",
        help="Emit log lines as JSON objects"
    )
    return common


def _experiment_options(config_required: bool = True) -> argparse.ArgumentParser:
    experiment = argparse.ArgumentParser(add_help=False)
    experiment.add_argument(
        "--config", "-c",
        required=config_required,
        help="Experiment config (JSON)"
    )
    experiment.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="Override a config key, e.g. --set optimizer.weight_decay=0.0 (repeatable)"
    )
    experiment.add_argument("--lr", type=float, help="Learning rate")
    experiment.add_argument("--epochs", type=int, help="Number of epochs")
    experiment.add_argument(
        "--seeds",
        type=lambda s: [int(v) for v in s.split(",") if v.strip()],
        help="Comma-separated seeds, e.g. 0,1,2"
    )
    experiment.add_argument("--batch-size", type=int, help="Batch size")
    experiment.add_argument("--output-dir", help="Root directory for run artifacts")
    return experiment


def create_parser():
    """Create the argument parser for the guidance-lab CLI"""
    common = _logging_options()
    experiment = _experiment_options()

    parser = argparse.ArgumentParser(
        prog="guidance-lab",
        description="Guidance Lab - train networks against the representations of a frozen guide network",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  guidance-lab gen-data --task parity --n 20000 --out data/parity
  guidance-lab train-guide -c configs/parity_rnn_guide.json
  guidance-lab guide -c configs/parity_transformer_guided.json --seeds 0,1,2
  guidance-lab sweep-lr -c configs/copy_paste_rnn_baseline.json
  guidance-lab compare-errors -c configs/images_fcn_guided.json --checkpoint a=runs/a/guide.glab --checkpoint b=runs/b/guide.glab
  guidance-lab plot --log runs/exp/log.csv --format svg --out runs/exp/dissim.svg
        """
    )
    parser.add_argument("--version", action="version", version=f"guidance-lab {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    gen = sub.add_parser("gen-data", parents=[common], help="Generate or ingest a dataset and save it")
    gen.add_argument("--config", "-c", help="Take task and data settings from an experiment config")
    gen.add_argument("--task", choices=["copy_paste", "parity", "lm", "images"], help="Task to generate")
    gen.add_argument("--n", type=int, help="Number of examples")
    gen.add_argument("--seed", type=int, help="Generation seed")
    gen.add_argument("--len-range", type=int, nargs=2, metavar=("MIN", "MAX"), help="Sequence length range")
    gen.add_argument("--vocab-size", type=int, help="Copy-paste content values 1..N")
    gen.add_argument("--corpus", help="UTF-8 corpus for the lm task")
    gen.add_argument("--context-len", type=int, help="LM window length")
    gen.add_argument("--image-file", help="GIMG file to ingest for the images task")
    gen.add_argument("--image-size", type=int, help="Synthetic image height and width")
    gen.add_argument("--image-classes", type=int, help="Number of image classes")
    gen.add_argument("--image-channels", type=int, help="Synthetic image channels")
    gen.add_argument("--out", required=True, help="Output directory")

    sub.add_parser("train", parents=[common, experiment], help="Baseline training (no guide)")

    train_guide = sub.add_parser("train-guide", parents=[common, experiment], help="Train a guide network")
    train_guide.add_argument("--out", help="Where to write the guide checkpoint (default <run>/guide.glab)")

    guide = sub.add_parser("guide", parents=[common, experiment], help="Guided training")
    guide.add_argument("--guide-checkpoint", help="Trained guide checkpoint")

    sub.add_parser("sweep-lr", parents=[common, experiment], help="Five-value learning-rate sweep")

    evaluate = sub.add_parser("eval", parents=[common, experiment], help="Evaluate a checkpoint")
    evaluate.add_argument("--checkpoint", required=True, help="Checkpoint to evaluate")
    evaluate.add_argument("--split", choices=["train", "val", "test"], default="test", help="Split (default: test)")

    compare = sub.add_parser("compare-errors", parents=[common, experiment], help="Error consistency between checkpoints")
    compare.add_argument(
        "--checkpoint",
        action="append",
        required=True,
        metavar="NAME=PATH",
        help="Named checkpoint (repeat for every network)"
    )
    compare.add_argument("--split", choices=["train", "val", "test"], default="test", help="Split (default: test)")
    compare.add_argument("--out", required=True, help="Output JSON with the kappa matrix")

    plot = sub.add_parser("plot", parents=[common], help="Emit curves from run logs")
    plot.add_argument("--log", action="append", required=True, help="Run log CSV (repeat per run)")
    plot.add_argument("--kind", choices=["dissim", "loss", "metric"], default="dissim", help="Which curves")
    plot.add_argument("--format", choices=["csv", "svg"], default="svg", help="Output format")
    plot.add_argument("--out", required=True, help="Output file")

    return parser


def parse_named_paths(items):
    """["a=runs/a.glab"] -> {"a": "runs/a.glab"}; returns (mapping, error message or None)"""
    named = {}
    for item in items:
        if "=" not in item:
            return None, f"Error: --checkpoint expects NAME=PATH, got {item!r}"
        name, path = item.split("=", 1)
        if name in named:
            return None, f"Error: duplicate checkpoint name {name!r}"
        named[name] = path
    return named, None


def validate_args(args):
    if getattr(args, "quiet", False) and getattr(args, "verbose", False):
        return "Error: --quiet and --verbose are mutually exclusive"
    if getattr(args, "epochs", None) is not None and args.epochs < 1:
        return "Error: --epochs must be positive"
    if getattr(args, "batch_size", None) is not None and args.batch_size < 1:
        return "Error: --batch-size must be positive"
    if getattr(args, "seeds", None) is not None and not args.seeds:
        return "Error: --seeds needs at least one seed"
    if args.command == "gen-data" and not (args.config or args.task):
        return "Error: gen-data needs --config or --task"
    return None
