"""Randomized probe for a localization gap, over several seeds."""
import argparse
import json
from dataclasses import dataclass

from viabhedge._rational import fmt
from viabhedge.superhedge.search import SearchParams, reverify, search_local_viability_gap


@dataclass
class Config:
    seeds: int = 5
    budget: int = 40
    family: str = "random"
    arbitrage_rate: float = 0.3


def main(cfg):
    params = SearchParams(family=cfg.family, arbitrage_rate=cfg.arbitrage_rate)
    summary = []
    for seed in range(cfg.seeds):
        rep = search_local_viability_gap(params, cfg.budget, seed)
        row = {"seed": seed, "evaluated": rep.evaluated, "admissible": rep.admissible, "best_gap": fmt(rep.best_gap)}
        if rep.best is not None:
            gap, na = reverify(rep)
            row.update(reverified=gap == rep.best_gap and na,
                       reach=fmt(rep.best.localizing.times[-1].reaches_horizon(rep.best.model)))
        summary.append(row)
        print(json.dumps(row, sort_keys=True))


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=Config.seeds)
    ap.add_argument("--budget", type=int, default=Config.budget)
    ap.add_argument("--family", choices=("random", "binomial"), default=Config.family)
    ap.add_argument("--arbitrage-rate", type=float, default=Config.arbitrage_rate)
    a = ap.parse_args()
    main(Config(a.seeds, a.budget, a.family, a.arbitrage_rate))
