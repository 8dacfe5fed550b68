#!/usr/bin/env python3
"""Train the tiny encoder on one objective and watch the bound tighten.

The encoder is a 1 -> 32 -> 32 MLP with GeLU hidden units, hand-derived
gradients, and decoupled weight decay. Each epoch draws a fresh batch from
the Gaussian world, takes one optimizer step, and periodically evaluates the
loss on held-out batches to convert it into a mutual-information bound.

Everything is derived from the run description, so rerunning this script
reproduces the numbers below byte for byte.

Run:  python3 demos/03_train_small.py   (about 15 seconds)
"""

from polyview import Method, RunSpec, TrainConfig, run_training, true_one_vs_rest_mi


def main() -> None:
    spec = RunSpec(
        method=Method.GEOMETRIC_PVC,
        m=4,
        k=256,
        train=TrainConfig(epochs=400),
        seed=0,
        eval_batches=8,
        record_stride=50,
    )
    print(f"training {spec.method.value} with M={spec.m}, K={spec.k}, "
          f"{spec.train.epochs} epochs, seed {spec.seed}")
    record = run_training(spec)

    print(f"  {'epoch':>5} {'train loss':>11} {'eval loss':>10} "
          f"{'bound':>8} {'gap':>8} {'rel MI':>7}")
    for row in record.rows:
        train = "-" if row.train_loss is None else f"{row.train_loss:.4f}"
        rel = "-" if row.relative_mi is None else f"{row.relative_mi:.3f}"
        print(f"  {row.epoch:>5} {train:>11} {row.eval_loss:>10.4f} "
              f"{row.bound:>8.4f} {row.gap:>8.4f} {rel:>7}")

    final = record.final()
    true_2 = true_one_vs_rest_mi(spec.sigma0_sq, spec.sigma_sq, 2)
    print(f"\n  true MI at M={spec.m}: {final.true_mi:.4f} nats; "
          f"two-view MI: {true_2:.4f} nats")
    print(f"  final bound {final.bound:.4f} sits near the two-view value, "
          f"not the M-view one:")
    print("  each per-target term in this objective is still a two-view")
    print("  contrast, so its expectation cannot exceed the two-view MI no")
    print("  matter how long we train. The M-view gap column therefore")
    print("  grows with M even for a perfect encoder.")

    record.write("/tmp/demo_run.csv")
    print("\n  full record written to /tmp/demo_run.csv "
          "(same schema the sweep harness uses)")


if __name__ == "__main__":
    main()
