"""Exact vs float pricing on random trees: timings and duality gaps."""
import argparse
import random
import statistics
import time
from dataclasses import dataclass

from viabhedge import market_tree as mt
from viabhedge.superhedge import HedgeQuery, price_american


@dataclass
class Config:
    trees: int = 20
    seed: int = 0
    periods: int = 4
    max_leaves: int = 16


def main(cfg):
    rng = random.Random(cfg.seed)
    t_ex, t_fl, worst = [], [], 0.0
    for _ in range(cfg.trees):
        m = mt.generate_random(rng, cfg.periods, 3, rng.randint(1, 2), cfg.max_leaves)
        pay = mt.random_payoff(m, rng, "american")
        seq = mt.random_localizing_sequence(m, rng, 2)
        t0 = time.perf_counter()
        ex = price_american(HedgeQuery(m, pay, seq=seq))
        t1 = time.perf_counter()
        fl = price_american(HedgeQuery(m, pay, seq=seq, mode="float"))
        t2 = time.perf_counter()
        assert ex.gap == 0 and ex.verification.ok
        worst = max(worst, abs(fl.price - float(ex.price)), abs(fl.gap))
        t_ex.append(t1 - t0)
        t_fl.append(t2 - t1)
    print(f"trees {cfg.trees}  exact median {statistics.median(t_ex) * 1e3:.1f} ms"
          f"  float median {statistics.median(t_fl) * 1e3:.1f} ms  max float error {worst:.2e}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trees", type=int, default=Config.trees)
    ap.add_argument("--seed", type=int, default=Config.seed)
    ap.add_argument("--periods", type=int, default=Config.periods)
    a = ap.parse_args()
    main(Config(a.trees, a.seed, a.periods))
