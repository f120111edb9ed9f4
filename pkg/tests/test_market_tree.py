import json
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

import oracles
from conftest import single_path
from viabhedge import market_tree as mt
from viabhedge.errors import CapExceeded, DimensionError, InvalidStoppingTime, InvariantError, ParamError, SchemaError


def _doc(nodes, d=1, T=1):
    return json.dumps({"d": d, "T": T, "nodes": nodes}).encode()


MINIMAL = [
    {"id": "r", "parent": None, "t": 0, "prob": "1", "prices": ["1"]},
    {"id": "u", "parent": "r", "t": 1, "prob": "1/2", "prices": ["2"]},
    {"id": "d", "parent": "r", "t": 1, "prob": "0.5", "prices": ["0.5"]},
]


def trinomial_doc():
    nodes = [{"id": "r", "parent": None, "t": 0, "prob": "1", "prices": ["10"]}]
    for a, pa in zip("abc", ("1/6", "1/3", "1/2")):
        nodes.append({"id": a, "parent": "r", "t": 1, "prob": pa, "prices": ["10"]})
        for b, pb in zip("xyz", ("0.2", "0.3", "1/2")):
            nodes.append({"id": a + b, "parent": a, "t": 2, "prob": pb, "prices": ["7"]})
    return _doc(nodes, T=2)


# ------------------------------------------------------------------ parsing


def test_minimal_document_parses_to_three_nodes():
    m = mt.parse_model(_doc(MINIMAL))
    assert len(m.nodes) == 3
    assert m.prices("d") == (F(1, 2),)
    assert m.by_id["u"].prob == F(1, 2)


def test_sibling_probability_sum_rejected():
    bad = [dict(n) for n in MINIMAL]
    bad[1]["prob"], bad[2]["prob"] = "0.6", "0.5"
    with pytest.raises(InvariantError) as exc:
        mt.parse_model(_doc(bad))
    assert "probability sum" in str(exc.value)
    assert exc.value.node == "r"


def test_trinomial_atoms_sum_to_one():
    m = mt.parse_model(trinomial_doc())
    assert len(m.nodes) == 13
    probs = oracles.atom_probs(oracles.records(m))
    assert sum(probs.values()) == 1
    for leaf in m.leaves:
        assert m.atom_prob[leaf] == probs[leaf]


@pytest.mark.parametrize(
    "mutate, exc",
    [
        (lambda d: d.pop("nodes"), SchemaError),
        (lambda d: d.__setitem__("d", "one"), SchemaError),
        (lambda d: d["nodes"][1].__setitem__("prices", ["1", "2"]), InvariantError),
        (lambda d: d["nodes"][1].__setitem__("t", 2), InvariantError),
        (lambda d: d["nodes"][1].__setitem__("prices", ["-1"]), InvariantError),
        (lambda d: d["nodes"][1].__setitem__("prob", "abc"), SchemaError),
        (lambda d: d["nodes"][2].__setitem__("parent", "zz"), InvariantError),
    ],
)
def test_malformed_documents(mutate, exc):
    data = {"d": 1, "T": 1, "nodes": [dict(n) for n in MINIMAL]}
    mutate(data)
    with pytest.raises(exc):
        mt.parse_model(json.dumps(data))


def test_leaf_before_horizon_rejected():
    with pytest.raises(InvariantError, match="leaf before horizon"):
        mt.parse_model(_doc(MINIMAL, T=2))


def test_malformed_json():
    with pytest.raises(SchemaError):
        mt.parse_model(b"{not json")


def test_document_blocks_roundtrip(binom2):
    doc = mt.ModelFile(
        binom2,
        mt.LocalizingSequence((mt.StoppingTime({"ru", "rdu", "rdd"}), mt.StoppingTime.terminal(binom2)), True),
        mt.Payoff.american(binom2, lambda s: max(6 - s[0], 0)),
        mt.Cone.no_short(1, 1),
    )
    back = mt.parse_document(json.dumps(mt.serialize_document(doc)))
    assert back == doc


@given(st.integers(0, 10_000))
def test_serialize_parse_identity(seed):
    rng = random.Random(seed)
    m = mt.generate_random(rng, rng.randint(1, 3), 3, rng.randint(1, 2), 10)
    assert mt.parse_model(json.dumps(mt.serialize_model(m))) == m


# ------------------------------------------------------------------ stopping


def test_stop_at_terminal_is_identity(binom2):
    assert mt.stopped_prices(binom2, mt.StoppingTime.terminal(binom2)) == binom2


def test_stop_at_time_one_freezes(binom2):
    s = mt.stopped_prices(binom2, mt.StoppingTime.constant(binom2, 1))
    for leaf in s.leaves:
        assert s.prices(leaf) == s.prices(s.ancestor(leaf, 1))


def test_stop_on_down_node_only(binom2):
    stop = {"rd", "ruu", "rud"}
    s = mt.stopped_prices(binom2, mt.StoppingTime(stop))
    frozen = oracles.hand_frozen(oracles.records(binom2), stop)
    for v in binom2.order:
        assert s.prices(v) == frozen[v]
    assert s.prices("ruu") == binom2.prices("ruu")
    assert s.prices("rdu") == s.prices("rdd") == (F(2),)


def test_invalid_stopping_time(binom2):
    with pytest.raises(InvalidStoppingTime):
        mt.stopped_prices(binom2, mt.StoppingTime({"r", "ru"}))
    with pytest.raises(InvalidStoppingTime):
        mt.StoppingTime({"ru"}).validate(binom2)


@given(st.integers(0, 10_000))
def test_stopping_idempotent(seed):
    rng = random.Random(seed)
    m = mt.generate_random(rng, rng.randint(1, 3), 3, 1, 10)
    tau = mt.random_stopping_time(m, rng)
    once = mt.stopped_prices(m, tau)
    assert mt.stopped_prices(once, tau) == once


def test_localizing_sequence_rules(binom2):
    t1 = mt.StoppingTime.constant(binom2, 1)
    with pytest.raises(InvariantError):
        mt.LocalizingSequence((mt.StoppingTime.terminal(binom2), t1)).validate(binom2)
    with pytest.raises(InvariantError):
        mt.LocalizingSequence((t1,), exhaustive=True).validate(binom2)
    mt.LocalizingSequence((t1, mt.StoppingTime.terminal(binom2)), True).validate(binom2)
    assert t1.reaches_horizon(binom2) == 0
    assert mt.StoppingTime({"rd", "ruu", "rud"}).reaches_horizon(binom2) == F(1, 2)


# ------------------------------------------------------------------ condexp


def test_condexp_constants(binom2):
    out = mt.condexp(binom2, {leaf: F(7) for leaf in binom2.leaves}, 1)
    assert set(out.values()) == {7}


def test_condexp_symmetric(call_tree):
    assert mt.condexp(call_tree, {"ru": 1, "rd": 0}, 0) == {"r": F(1, 2)}


def test_condexp_against_atom_sum():
    m = mt.generate_binomial(4, 2, F(1, 2), F(1, 3), 2)
    vals = dict(zip(["ruu", "rud", "rdu", "rdd"], map(F, (9, 3, 3, 0))))
    root = mt.condexp(m, vals, 0)["r"]
    assert root == oracles.atom_sum_condexp(oracles.records(m), vals, "r")
    assert root == F(1, 9) * 9 + F(2, 9) * 3 + F(2, 9) * 3
    for v, x in mt.condexp(m, vals, 1).items():
        assert x == oracles.atom_sum_condexp(oracles.records(m), vals, v)


def test_condexp_dimension_error(binom2):
    with pytest.raises(DimensionError):
        mt.condexp(binom2, [1, 2, 3], 0)


@given(st.integers(0, 10_000), st.data())
def test_condexp_tower_and_endpoints(seed, data):
    rng = random.Random(seed)
    m = mt.generate_random(rng, rng.randint(1, 3), 3, 1, 10)
    vals = {leaf: F(rng.randint(-9, 9), rng.randint(1, 4)) for leaf in m.leaves}
    assert mt.condexp(m, vals, m.T) == vals
    assert mt.condexp(m, vals, 0)[m.root] == sum(m.atom_prob[l] * vals[l] for l in m.leaves)
    t1 = data.draw(st.integers(0, m.T))
    t2 = data.draw(st.integers(t1, m.T))
    inner = mt.condexp(m, vals, t2)
    lifted = {leaf: inner[m.ancestor(leaf, t2)] for leaf in m.leaves}
    assert mt.condexp(m, lifted, t1) == mt.condexp(m, vals, t1)


# ------------------------------------------------------------------ enumeration


def test_enumerate_one_period(call_tree):
    taus = mt.enumerate_stopping_times(call_tree, 10)
    assert [t.stop_set for t in taus] == [frozenset({"r"}), frozenset({"rd", "ru"})]


def test_enumerate_single_path():
    taus = mt.enumerate_stopping_times(single_path([1, 1, 1]), 10)
    assert len(taus) == 3
    assert sorted(len(t.stop_set) for t in taus) == [1, 1, 1]


def test_enumerate_binomial_matches_bruteforce(binom2):
    taus = mt.enumerate_stopping_times(binom2, 64)
    expected = oracles.stopping_sets_bruteforce(oracles.records(binom2))
    assert len(taus) == len(expected) == 5
    assert {t.stop_set for t in taus} == set(expected)
    assert [t.sorted_ids() for t in taus] == sorted(t.sorted_ids() for t in taus)


def test_enumerate_cap(binom2):
    with pytest.raises(CapExceeded) as exc:
        mt.enumerate_stopping_times(binom2, 4)
    assert exc.value.count_lower_bound >= 5


@given(st.integers(0, 10_000))
def test_count_matches_bruteforce(seed):
    rng = random.Random(seed)
    m = mt.generate_random(rng, rng.randint(1, 3), 2, 1, 6)
    assert mt.count_stopping_times(m) == oracles.count_stopping_times_bruteforce(oracles.records(m))


# ------------------------------------------------------------------ generators


def test_binomial_one_period():
    m = mt.generate_binomial(1, 2, F(1, 2), F(1, 2), 1)
    assert sorted(m.prices(l)[0] for l in m.leaves) == [F(1, 2), 2]


def test_binomial_two_periods():
    m = mt.generate_binomial(4, 2, F(1, 2), F(1, 2), 2)
    assert [m.prices(l)[0] for l in ("ruu", "rud", "rdu", "rdd")] == [16, 4, 4, 1]
    assert len(m.nodes) == 7  # non-recombining node set


@pytest.mark.parametrize("args", [(1, 1, F(1, 2), F(1, 2), 1), (1, 2, 1, F(1, 2), 1), (1, 2, F(1, 2), 1, 1)])
def test_binomial_param_errors(args):
    with pytest.raises(ParamError):
        mt.generate_binomial(*args)


@given(st.integers(0, 10_000), st.booleans())
def test_generated_models_validate(seed, af):
    rng = random.Random(seed)
    m = mt.generate_random(rng, rng.randint(1, 4), 3, rng.randint(1, 2), 12, arbitrage_free=af)
    assert len(m.leaves) <= 12
    again = mt.parse_model(json.dumps(mt.serialize_model(m)))
    assert sum(again.atom_prob[l] for l in again.leaves) == 1
    for v in again.nonterminal:
        assert sum(again.by_id[c].prob for c in again.children[v]) == 1


def test_arbitrage_demo():
    m = mt.generate_arbitrage_demo()
    assert len(m.leaves) == 1 and m.atom_prob[m.leaves[0]] == 1
    assert [m.prices(v)[0] for v in m.order] == [1, 2, 3]


# ------------------------------------------------------------------ cones


def test_cone_rays():
    assert set(mt.Cone.unconstrained(2).generating_rays) == {(1, 0), (-1, 0), (0, 1), (0, -1)}
    assert set(mt.Cone.no_short(2, 1).generating_rays) == {(1, 0), (0, 1), (0, -1)}
    assert mt.Cone.no_short(2, 1).contains((0, -3))
    assert not mt.Cone.no_short(2, 1).contains((-1, 0))


def test_parse_cone_forms():
    assert mt.parse_cone("no-short:1", 2) == mt.Cone.no_short(2, 1)
    assert mt.parse_cone({"no_short": 1}, 2) == mt.Cone.no_short(2, 1)
    assert mt.parse_cone("unconstrained", 2) == mt.Cone.unconstrained(2)
    with pytest.raises((ParamError, SchemaError)):
        mt.parse_cone("no-short:3", 2)


def test_polyhedral_rays_span_cone():
    # h1 >= 0, h1 - h2 >= 0 in R^2
    c = mt.Cone.polyhedral([[1, 0], [1, -1]])
    rays = c.generating_rays
    assert all(c.contains(r) for r in rays)
    assert c.contains((1, 1)) and not c.contains((0, 1))
