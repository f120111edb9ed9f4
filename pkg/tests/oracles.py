"""Independent oracles.

Nothing here calls the LP engine or the tree helpers of the package; each
oracle works from raw node records (id, parent, t, prob, prices) so that a
bug in the package cannot leak into the expected values.
"""
from fractions import Fraction
from itertools import combinations

F = Fraction


def replicate_2x2(s0, su, sd, gu, gd):
    """Solve z + h(su - s0) = gu, z + h(sd - s0) = gd by Cramer's rule."""
    a, b = F(su) - F(s0), F(sd) - F(s0)
    det = b - a
    z = (F(gu) * b - F(gd) * a) / det
    h = (F(gd) - F(gu)) / det
    return z, h


def binomial_q(up, down):
    """Risk-neutral up probability at zero rate."""
    return (1 - F(down)) / (F(up) - F(down))


def snell_binomial(s0, up, down, periods, exercise):
    """American value by backward induction over the recombining lattice."""
    q = binomial_q(up, down)
    s0, up, down = F(s0), F(up), F(down)
    vals = [exercise(s0 * up ** j * down ** (periods - j)) for j in range(periods + 1)]
    for t in range(periods - 1, -1, -1):
        vals = [
            max(exercise(s0 * up ** j * down ** (t - j)), q * vals[j + 1] + (1 - q) * vals[j])
            for j in range(t + 1)
        ]
    return vals[0]


def european_binomial(s0, up, down, periods, payoff):
    q = binomial_q(up, down)
    s0, up, down = F(s0), F(up), F(down)
    total = F(0)
    for j in range(periods + 1):
        n_paths = _binom(periods, j)
        total += n_paths * q ** j * (1 - q) ** (periods - j) * payoff(s0 * up ** j * down ** (periods - j))
    return total


def _binom(n, k):
    out = 1
    for i in range(k):
        out = out * (n - i) // (i + 1)
    return out


# ---------------------------------------------------------------- raw records


def records(model):
    """(id, parent, t, prob, prices) tuples read straight off the node list."""
    return [(n.id, n.parent, n.t, F(n.prob), tuple(F(p) for p in n.prices)) for n in model.nodes]


def _index(recs):
    by = {r[0]: r for r in recs}
    kids = {r[0]: [] for r in recs}
    for r in recs:
        if r[1] is not None:
            kids[r[1]].append(r[0])
    return by, kids


def root_paths(recs):
    """leaf id -> list of node ids from root to leaf, via parent pointers."""
    by, kids = _index(recs)
    out = {}
    for nid in by:
        if kids[nid]:
            continue
        path = [nid]
        while by[path[-1]][1] is not None:
            path.append(by[path[-1]][1])
        out[nid] = path[::-1]
    return out


def atom_probs(recs):
    by, _ = _index(recs)
    out = {}
    for leaf, path in root_paths(recs).items():
        p = F(1)
        for nid in path[1:]:
            p *= by[nid][3]
        out[leaf] = p
    return out


def atom_sum_condexp(recs, leaf_values, node):
    """E[X | node] as a ratio of probability-weighted atom sums over leaves through ``node``."""
    probs = atom_probs(recs)
    num = den = F(0)
    for leaf, path in root_paths(recs).items():
        if node in path:
            num += probs[leaf] * F(leaf_values[leaf])
            den += probs[leaf]
    return num / den


def count_stopping_times_bruteforce(recs):
    """Count node subsets hitting every root-to-leaf path exactly once."""
    ids = [r[0] for r in recs]
    paths = [set(p) for p in root_paths(recs).values()]
    count = 0
    for size in range(1, len(ids) + 1):
        for subset in combinations(ids, size):
            s = set(subset)
            if all(len(s & p) == 1 for p in paths):
                count += 1
    return count


def stopping_sets_bruteforce(recs):
    ids = [r[0] for r in recs]
    paths = [set(p) for p in root_paths(recs).values()]
    out = []
    for size in range(1, len(ids) + 1):
        for subset in combinations(ids, size):
            if all(len(set(subset) & p) == 1 for p in paths):
                out.append(frozenset(subset))
    return out


def path_sum_wealth(recs, position, z=0):
    """leaf -> z + sum over path edges of position(node) . (S(child) - S(node))."""
    by, _ = _index(recs)
    out = {}
    for leaf, path in root_paths(recs).items():
        w = F(z)
        for a, b in zip(path, path[1:]):
            h = position(a)
            w += sum(F(hi) * (sb - sa) for hi, sb, sa in zip(h, by[b][4], by[a][4]))
        out[leaf] = w
    return out


def hand_frozen(recs, stop_set):
    """node id -> prices with everything below a stop node frozen at that node."""
    by, _ = _index(recs)
    out = {}
    for nid in by:
        chain = [nid]
        while by[chain[-1]][1] is not None:
            chain.append(by[chain[-1]][1])
        chain = chain[::-1]
        frozen = next((c for c in chain if c in stop_set), None)
        out[nid] = by[frozen if frozen is not None else nid][4]
    return out
