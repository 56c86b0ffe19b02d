"""DAG size against bisection grammar size on caterpillars t_{2^k}."""

import argparse
import csv
import math
import sys
from dataclasses import dataclass

from tslpcode import CompressorId, build_minimal_dag, caterpillar, compress, dag_size


@dataclass
class Config:
    k_min: int = 4
    k_max: int = 14
    out: str | None = None


def run(cfg: Config) -> list[dict]:
    rows = []
    for k in range(cfg.k_min, cfg.k_max + 1):
        n = 2 ** k
        t = caterpillar(n)
        rows.append({"n": n, "dag_size": dag_size(build_minimal_dag(t)),
                     "bisection": compress(t, CompressorId.BISECTION).size,
                     "dag_route": compress(t, CompressorId.DAG_ROUTE).size,
                     "64log2n": round(64 * math.log2(n), 1)})
    return rows


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--k-min", type=int, default=Config.k_min)
    p.add_argument("--k-max", type=int, default=Config.k_max)
    p.add_argument("--out")
    cfg = Config(**vars(p.parse_args(argv)))
    rows = run(cfg)
    w = csv.DictWriter(open(cfg.out, "w", newline="") if cfg.out else sys.stdout,
                       fieldnames=list(rows[0]), delimiter="," if cfg.out else "\t")
    w.writeheader()
    w.writerows(rows)


if __name__ == "__main__":
    main()
