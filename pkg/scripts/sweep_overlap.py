"""Accuracy of 7-3-5 and 7-10-5 networks as sensor noise grows.

Each overlap factor gets a fresh simulated dataset; both architectures are
trained on the same stratified split. Prints one row per factor.

    python3 scripts/sweep_overlap.py --factors 0 0.5 1 1.5 2 --epochs 300
"""
import argparse

from enose.evaluation import compare_architectures
from enose.nn import TrainConfig
from enose.simulator import SimConfig, cluster_overlap, generate_dataset


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--factors", type=float, nargs="+", default=[0.0, 0.5, 1.0, 1.5, 2.0])
    parser.add_argument("--samples-per-class", type=int, default=40)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--epochs", type=int, default=1000)
    parser.add_argument("--hidden", type=int, nargs="+", default=[3, 10])
    args = parser.parse_args()

    cfg = TrainConfig(epochs=args.epochs, seed=args.seed)
    header = ["overlap", "cluster_overlap"] + [f"acc_z{z}" for z in args.hidden] + [f"fp_z{z}" for z in args.hidden]
    print("  ".join(f"{h:>15}" for h in header))
    for factor in args.factors:
        ds = generate_dataset(SimConfig(samples_per_class=args.samples_per_class, seed=args.seed,
                                        overlap_factor=factor))
        report = compare_architectures(ds, cfg, args.hidden)
        row = [factor, cluster_overlap(ds)]
        row += [report.by_hidden(z).report.accuracy for z in args.hidden]
        row += [report.by_hidden(z).report.fp_rate for z in args.hidden]
        print("  ".join(f"{v:>15.4f}" for v in row))


if __name__ == "__main__":
    main()
