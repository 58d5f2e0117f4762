"""Train a 7-3-5 network on simulated data and report held-out accuracy.

    python3 scripts/run_headline.py --overlap 0.5 --seed 7
"""
import argparse
import time

from enose.core import fit_scaler
from enose.evaluation import eval_report_text, evaluate, stratified_split
from enose.nn import NetworkConfig, TrainConfig, init_weights, train
from enose.simulator import SimConfig, generate_dataset


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--overlap", type=float, default=0.5)
    parser.add_argument("--samples-per-class", type=int, default=40)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--hidden", type=int, default=3)
    parser.add_argument("--epochs", type=int, default=1000)
    args = parser.parse_args()

    ds = generate_dataset(SimConfig(samples_per_class=args.samples_per_class, seed=args.seed,
                                    overlap_factor=args.overlap))
    train_idx, test_idx = stratified_split(ds, seed=args.seed)
    train_set, test_set = ds.subset(train_idx), ds.subset(test_idx)
    scaler = fit_scaler(train_set)
    cfg = TrainConfig(epochs=args.epochs, seed=args.seed)

    start = time.perf_counter()
    net, report = train(init_weights(NetworkConfig(args.hidden), cfg), train_set, scaler, cfg)
    seconds = time.perf_counter() - start

    print(f"7-{args.hidden}-5, overlap {args.overlap}, {len(train_set)} train / {len(test_set)} test")
    print(f"final training mse {report.final_mse:.6f} ({seconds:.1f}s)")
    print(eval_report_text(evaluate(net, scaler, test_set)))


if __name__ == "__main__":
    main()
