"""Print key-storage figures for uniform deployments and write the curve CSVs."""

import argparse
import os

from wcds.analysis import (
    distinct_key_curve,
    er_degree_curve,
    gd_storage_curve,
    points_to_rows,
    write_csv,
)
from wcds.keys import uniform_storage_bits


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", default="results")
    ap.add_argument("--kbits", type=int, default=128)
    args = ap.parse_args()

    print(f"{'alpha':>6} {'beta':>6} {'eta':>4} {'per_gd':>8} {'per_os':>8} {'total':>9}")
    for alpha, eta in ((5, 10), (10, 9), (20, 4)):
        beta = alpha * eta
        rep = uniform_storage_bits(alpha, beta, eta, args.kbits)
        print(
            f"{alpha:>6} {beta:>6} {eta:>4}"
            f" {rep.per_gd[0]:>8} {rep.per_os:>8} {rep.total:>9}"
        )

    os.makedirs(args.out_dir, exist_ok=True)
    write_csv(
        os.path.join(args.out_dir, "distinct_keys.csv"),
        points_to_rows(distinct_key_curve(range(0, 201, 5), 9), "keys", eta=9),
    )
    write_csv(
        os.path.join(args.out_dir, "gd_storage.csv"),
        points_to_rows(
            gd_storage_curve(range(0, 31), [64, 128, 256]), "gd_bits", eta_from_x=True
        ),
    )
    write_csv(
        os.path.join(args.out_dir, "er_degree.csv"),
        points_to_rows(er_degree_curve(range(20, 201, 10), [0.9, 0.99, 0.999]), "er_degree"),
    )
    print(f"curve CSVs under {args.out_dir}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
