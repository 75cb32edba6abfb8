#!/usr/bin/env python3
"""Full citation-network study: all variants, multiple seeds, tuned eta.

Needs the raw files (cora.content, cora.cites) under DISTSIG_DATA_DIR or
--data-dir.  For every variant and seed, eta is picked by validation accuracy
over the standard grid; the plain model trains once per seed.  Writes one
metrics JSON per (variant, seed) plus a summary CSV, and prints the
mean/std accuracy table alongside the column-1 high-frequency fractions and
the near-uniform/near-one entry counts of the final outputs.
"""

import argparse
import csv
import json
import os
import sys
import time

import numpy as np

from distsig.gnn import (
    ETA_GRID,
    TrainConfig,
    load_cora_dir,
    main_component,
    make_split,
    train,
)
from distsig.regularizer import nonuniformity_counts
from distsig.spectral import laplacian_spectrum

VARIANTS = ("gcn", "r", "r1", "r2", "r3", "lap")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--data-dir", default=None, help="override DISTSIG_DATA_DIR")
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--variants", default=",".join(VARIANTS))
    ap.add_argument("--out-dir", default="cora_runs")
    args = ap.parse_args()

    try:
        g, features, labels, _ = load_cora_dir(args.data_dir)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    sub, nodes = main_component(g)
    spectrum = (nodes, laplacian_spectrum(sub))
    os.makedirs(args.out_dir, exist_ok=True)

    variants = [v.strip() for v in args.variants.split(",") if v.strip()]
    rows = []
    t0 = time.perf_counter()
    for variant in variants:
        accs = []
        for seed in range(args.seeds):
            split = make_split(labels, 20, 500, 1000, seed)
            if variant == "gcn":
                m = train(g, features, labels, split,
                          TrainConfig(variant="gcn", seed=seed),
                          component_spectrum=spectrum)
            else:
                best = None
                for eta in ETA_GRID:
                    cand = train(g, features, labels, split,
                                 TrainConfig(variant=variant, eta=eta, seed=seed),
                                 component_spectrum=spectrum)
                    if best is None or max(cand.val_acc) > max(best.val_acc):
                        best = cand
                m = best
            accs.append(m.test_acc)
            near_u, near_one = nonuniformity_counts(m.final_probs, 0.01, 0.01)
            rows.append({
                "variant": variant,
                "seed": seed,
                "eta": m.config.eta,
                "test_acc": m.test_acc,
                "hf_col1": m.hf_fraction_per_class[0],
                "near_uniform": near_u,
                "near_one": near_one,
            })
            path = os.path.join(args.out_dir, f"{variant}_seed{seed}.json")
            with open(path, "w", encoding="utf-8") as fh:
                json.dump(m.to_json_dict(), fh, indent=2, sort_keys=True)
            print(f"{variant} seed {seed}: acc {m.test_acc:.4f} (eta {m.config.eta}), "
                  f"hf {m.hf_fraction_per_class[0]:.4f}, "
                  f"near-uniform {near_u}, near-one {near_one}")
        print(f"== {variant}: {np.mean(accs):.4f} +/- {np.std(accs):.4f}")

    summary = os.path.join(args.out_dir, "summary.csv")
    with open(summary, "w", encoding="utf-8", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)
    print(f"{len(rows)} runs in {time.perf_counter() - t0:.0f}s; summary at {summary}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
