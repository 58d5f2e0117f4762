"""``enose`` command line: simulate, train, evaluate, compare, stream, rerun."""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, replace
from pathlib import Path

from . import __version__
from .acquisition import GapNotice, SkipNotice, frames_to_wire, read_stream
from .core import DatasetError, decode_argmax, dumps_dataset, fit_scaler, load_dataset
from .evaluation import (
    DEFAULT_THRESHOLD,
    compare_architectures,
    comparison_kv,
    comparison_text,
    eval_report_kv,
    eval_report_text,
    evaluate,
)
from .nn import (
    DivergenceError,
    ModelFormatError,
    NetworkConfig,
    TrainConfig,
    forward,
    init_weights,
    load_model,
    save_model,
    train,
)
from .simulator import ConfigError, SimConfig, dumps_sim_config, generate_dataset, load_sim_config

DEFAULT_SEED = 7


class CommandError(Exception):
    pass


def _threshold(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0 < value < 1:
        raise argparse.ArgumentTypeError(f"threshold must lie strictly inside (0, 1), got {value}")
    return value


def _write_manifest(out: str, command: str, argv: list[str], config: dict, seed: int,
                    inputs: list[str], outputs: list[str]) -> Path:
    path = Path(str(out) + ".manifest.json")
    manifest = {
        "command": command,
        "argv": argv,
        "config": config,
        "seed": seed,
        "inputs": inputs,
        "outputs": outputs,
        "version": __version__,
    }
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def _train_config(args) -> TrainConfig:
    try:
        return TrainConfig(learning_rate=args.lr, momentum=args.momentum, epochs=args.epochs,
                           seed=args.seed, init_half_range=args.init_half_range)
    except ValueError as exc:
        raise CommandError(str(exc)) from None


# -- commands ----------------------------------------------------------------


def cmd_simulate(args, argv) -> int:
    config = load_sim_config(args.config) if args.config else SimConfig()
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.samples_per_class is not None:
        overrides["samples_per_class"] = args.samples_per_class
    if args.overlap is not None:
        overrides["overlap_factor"] = args.overlap
    if overrides:
        config = replace(config, **overrides)
    dataset = generate_dataset(config)
    if args.wire:
        Path(args.out).write_bytes(frames_to_wire(s.frame for s in dataset))
    else:
        Path(args.out).write_text(dumps_dataset(dataset), encoding="utf-8")
    _write_manifest(args.out, "simulate", argv, {"sim_config": dumps_sim_config(config), "wire": args.wire},
                    config.seed, [args.config] if args.config else [], [args.out])
    print(f"wrote {len(dataset)} samples to {args.out}", file=sys.stderr)
    return 0


def _training_report_text(report, net_config: NetworkConfig, train_config: TrainConfig, n: int) -> str:
    lines = [
        f"architecture 7-{net_config.hidden_size}-5, {n} training samples",
        f"learning_rate {train_config.learning_rate!r} momentum {train_config.momentum!r} "
        f"epochs {train_config.epochs} seed {train_config.seed}",
        f"final_mse {report.final_mse!r}",
        "epoch mse",
    ]
    lines += [f"{i + 1} {v!r}" for i, v in enumerate(report.history)]
    return "\n".join(lines) + "\n"


def cmd_train(args, argv) -> int:
    dataset = load_dataset(args.dataset)
    if len(dataset) == 0:
        raise CommandError(f"{args.dataset}: dataset is empty")
    train_config = _train_config(args)
    net_config = NetworkConfig(hidden_size=args.hidden)
    scaler = fit_scaler(dataset)
    net, report = train(init_weights(net_config, train_config), dataset, scaler, train_config)
    if args.activation != "exact":
        net = net.with_activation(args.activation)
    save_model(net, scaler, args.out)
    text = _training_report_text(report, net_config, train_config, len(dataset))
    report_path = str(args.out) + ".report.txt"
    Path(report_path).write_text(text, encoding="utf-8")
    _write_manifest(args.out, "train", argv,
                    {"train_config": asdict(train_config), "network": asdict(net.config)},
                    train_config.seed, [args.dataset], [args.out, report_path])
    print(f"7-{args.hidden}-5 trained for {report.epochs} epochs, final mse {report.final_mse:.6g}")
    return 0


def cmd_evaluate(args, argv) -> int:
    net, scaler = load_model(args.model)
    if args.activation:
        net = net.with_activation(args.activation)
    dataset = load_dataset(args.dataset)
    if len(dataset) == 0:
        raise CommandError(f"{args.dataset}: dataset is empty")
    report = evaluate(net, scaler, dataset, args.threshold)
    sys.stdout.write(eval_report_text(report, title=f"7-{net.hidden_size}-5 {net.config.activation}"))
    if args.out:
        Path(args.out).write_text(eval_report_kv(report), encoding="utf-8")
        _write_manifest(args.out, "evaluate", argv, {"threshold": args.threshold,
                                                     "activation": net.config.activation},
                        None, [args.model, args.dataset], [args.out])
    return 0


def cmd_compare(args, argv) -> int:
    dataset = load_dataset(args.dataset)
    train_config = _train_config(args)
    report = compare_architectures(dataset, train_config, args.hidden, args.threshold, args.activation)
    sys.stdout.write(comparison_text(report))
    if args.out:
        # wall-clock times are left out of the file so reruns are byte-identical
        Path(args.out).write_text(comparison_kv(report, timings=False), encoding="utf-8")
        _write_manifest(args.out, "compare", argv, {"train_config": asdict(train_config),
                                                    "hidden_sizes": args.hidden,
                                                    "threshold": args.threshold},
                        train_config.seed, [args.dataset], [args.out])
    return 0


def cmd_stream(args, argv) -> int:
    net, scaler = load_model(args.model)
    if args.activation:
        net = net.with_activation(args.activation)
    if args.input in (None, "-"):
        events = read_stream(sys.stdin.buffer)
        for event in events:
            _emit(event, net, scaler)
    else:
        with open(args.input, "rb") as fh:
            for event in read_stream(fh):
                _emit(event, net, scaler)
    return 0


def _emit(event, net, scaler) -> None:
    if isinstance(event, SkipNotice):
        print(f"skip #{event.count}: {event.reason}: {event.data[:60]!r}", file=sys.stderr)
    elif isinstance(event, GapNotice):
        print(f"gap: {event.missing} frame(s) missing (expected seq {event.expected}, got {event.received})",
              file=sys.stderr)
    else:
        output, _ = forward(net, scaler.transform(event.frame.channels))
        label, confidence = decode_argmax(output)
        sys.stdout.write(f"seq={event.seq} class={label.label} confidence={confidence:.4f}\n")
        sys.stdout.flush()


def cmd_rerun(args, argv) -> int:
    manifest = json.loads(Path(args.manifest).read_text(encoding="utf-8"))
    return main(manifest["argv"])


# -- parser ------------------------------------------------------------------


def _add_train_flags(p, hidden_default, hidden_nargs=None):
    defaults = TrainConfig()
    if hidden_nargs:
        p.add_argument("--hidden", type=int, nargs=hidden_nargs, default=hidden_default,
                       help="hidden layer sizes to compare (default: 3 10)")
    else:
        p.add_argument("--hidden", type=int, default=hidden_default, help="hidden layer size Z (default: 3)")
    p.add_argument("--lr", type=float, default=defaults.learning_rate, help="learning rate (default: 0.01)")
    p.add_argument("--momentum", type=float, default=defaults.momentum, help="momentum (default: 0.9)")
    p.add_argument("--epochs", type=int, default=defaults.epochs, help="training epochs (default: 1000)")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--init-half-range", type=float, default=defaults.init_half_range)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="enose", description="Electronic-nose toolkit")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a synthetic labeled dataset")
    p.add_argument("--config", help="key-value simulator config (default: built-in)")
    p.add_argument("--seed", type=int)
    p.add_argument("--samples-per-class", type=int)
    p.add_argument("--overlap", type=float, help="overlap factor (noise scale)")
    p.add_argument("--wire", action="store_true", help="write a wire-format frame stream instead of CSV")
    p.add_argument("--out", required=True)

    p = sub.add_parser("train", help="train a 7-Z-5 network")
    p.add_argument("dataset")
    _add_train_flags(p, 3)
    p.add_argument("--activation", choices=("exact", "table"), default="exact",
                   help="activation stored in the model for inference")
    p.add_argument("--out", required=True)

    p = sub.add_parser("evaluate", help="confusion matrix and false-positive rate")
    p.add_argument("model")
    p.add_argument("dataset")
    p.add_argument("--threshold", type=_threshold, default=DEFAULT_THRESHOLD)
    p.add_argument("--activation", choices=("exact", "table"))
    p.add_argument("--out", help="write a key-value report here")

    p = sub.add_parser("compare", help="train and compare hidden-layer sizes on one split")
    p.add_argument("dataset")
    _add_train_flags(p, [3, 10], hidden_nargs="+")
    p.add_argument("--threshold", type=_threshold, default=DEFAULT_THRESHOLD)
    p.add_argument("--activation", choices=("exact", "table"), default="exact")
    p.add_argument("--out", help="write a key-value report here")

    p = sub.add_parser("stream", help="classify wire-format frames from a file or stdin")
    p.add_argument("model")
    p.add_argument("input", nargs="?", default="-")
    p.add_argument("--activation", choices=("exact", "table"))

    p = sub.add_parser("rerun", help="repeat a command from its manifest")
    p.add_argument("manifest")
    return parser


COMMANDS = {
    "simulate": cmd_simulate,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "compare": cmd_compare,
    "stream": cmd_stream,
    "rerun": cmd_rerun,
}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "compare" and len(args.hidden) < 2:
        parser.error("compare needs at least two --hidden sizes")
    try:
        return COMMANDS[args.command](args, argv)
    except (DatasetError, ConfigError, ModelFormatError, DivergenceError, CommandError,
            FileNotFoundError) as exc:
        print(f"enose {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
