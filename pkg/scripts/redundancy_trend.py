"""Worst-case redundancy per class, exact for small classes and sampled beyond."""

import argparse
from dataclasses import dataclass, field

from tslpcode import parse_source
from tslpcode.harness import redundancy, report_row, write_rows


@dataclass
class Config:
    source: str = "bst"
    encoder: str = "tslp"
    exact_classes: list[int] = field(default_factory=lambda: list(range(2, 13)))
    sampled_classes: list[int] = field(default_factory=lambda: [2 ** 6, 2 ** 8, 2 ** 10, 2 ** 12])
    samples: int = 1000
    seed: int = 0
    out: str | None = None


def run(cfg: Config):
    src = parse_source(cfg.source)
    reports = [redundancy(cfg.encoder, src, i) for i in cfg.exact_classes]
    reports += [redundancy(cfg.encoder, src, i, exact=False, samples=cfg.samples, seed=cfg.seed)
                for i in cfg.sampled_classes]
    return reports


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--source", default=Config.source)
    p.add_argument("--encoder", default=Config.encoder, choices=["tslp", "dag"])
    p.add_argument("--exact-classes", type=int, nargs="*")
    p.add_argument("--sampled-classes", type=int, nargs="*")
    p.add_argument("--samples", type=int, default=Config.samples)
    p.add_argument("--seed", type=int, default=Config.seed)
    p.add_argument("--out")
    args = {k: v for k, v in vars(p.parse_args(argv)).items() if v is not None}
    cfg = Config(**args)
    reports = run(cfg)
    print("i\tmode\tR\twitness_size")
    for r in reports:
        print(f"{r.i}\t{r.mode}\t{r.label} {r.value:.4f}\t{r.witness.size}")
    if cfg.out:
        write_rows(cfg.out, [report_row(r) for r in reports])


if __name__ == "__main__":
    main()
