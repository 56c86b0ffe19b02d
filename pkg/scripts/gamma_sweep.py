"""Exact gamma(n) = max |G_t| / n over T_n for both compressors."""

import argparse
from dataclasses import dataclass

from tslpcode import CompressorId
from tslpcode.compressor import gamma
from tslpcode.trees import serialize_term


@dataclass
class Config:
    n_min: int = 1
    n_max: int = 12


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--n-min", type=int, default=Config.n_min)
    p.add_argument("--n-max", type=int, default=Config.n_max)
    cfg = Config(**vars(p.parse_args(argv)))
    print("n\tbisection\tdag_route\tbisection_witness")
    for n in range(cfg.n_min, cfg.n_max + 1):
        b = gamma(CompressorId.BISECTION, n)
        d = gamma(CompressorId.DAG_ROUTE, n)
        print(f"{n}\t{b.value:.4f}\t{d.value:.4f}\t{serialize_term(b.witness)}")


if __name__ == "__main__":
    main()
