import random
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

import oracles
from conftest import drift_down
from viabhedge import market_tree as mt
from viabhedge.errors import DimensionError, ParamError, UnsupportedCone
from viabhedge.strategy import GeneralizedStrategy, wealth
from viabhedge.viability import (
    PricingSystem,
    check_local_na,
    check_na,
    constant_system,
    deflated_value,
    dual_witness,
    find_pricing_system,
    is_arbitrage,
    verify_pricing_system,
    verify_state_prices,
)

UNC = mt.Cone.unconstrained(1)


def terminal_seq(model):
    return mt.LocalizingSequence.trivial(model)


# ------------------------------------------------------------------ check_na


@pytest.mark.parametrize("p", [F(1, 2), F(1, 10), F(9, 10)])
def test_binomial_state_prices(p):
    m = mt.generate_binomial(1, 2, F(1, 2), p, 1)
    v = check_na(m, UNC)
    assert v.holds and v.witness is None
    q = oracles.binomial_q(2, F(1, 2))
    assert q == F(1, 3)
    assert v.certificate == {"ru": q, "rd": 1 - q}


def test_demo_witness(demo):
    v = check_na(demo, UNC)
    assert not v.holds and v.certificate is None
    H = v.witness
    assert all(h == (1,) for h in H.pre.values()) and set(H.pre) == {"n0", "n1"}
    w = wealth(demo, H)
    assert [w[n] for n in ("n0", "n1", "n2")] == [0, 1, 2]
    assert is_arbitrage(demo, H, UNC)


def test_drift_down_cone_semantics():
    m = drift_down()
    v = check_na(m, UNC)
    assert not v.holds
    assert v.witness.pre["r"] == (-1,)
    assert is_arbitrage(m, v.witness, UNC)
    ns = check_na(m, mt.Cone.no_short(1, 1))
    assert ns.holds
    assert verify_state_prices(m, ns.certificate, mt.Cone.no_short(1, 1), 0) == []
    # strictly a supermartingale: E_q[S_1] < S_0
    assert sum(ns.certificate[l] * m.prices(l)[0] for l in m.leaves) < 1


def test_polyhedral_needs_flag(call_tree):
    cone = mt.Cone.polyhedral([[1]])
    with pytest.raises(UnsupportedCone):
        check_na(call_tree, cone)
    v = check_na(call_tree, cone, allow_experimental=True)
    assert v.experimental and v.holds


def test_nupbr_note_present(call_tree):
    assert any("NUPBR" in n for n in check_na(call_tree).notes)


@given(st.integers(0, 10_000), st.booleans())
def test_verdict_dichotomy(seed, af):
    rng = random.Random(seed)
    m = mt.generate_random(rng, rng.randint(1, 3), 3, rng.randint(1, 2), 10, arbitrage_free=af)
    cone = mt.Cone.unconstrained(m.d) if rng.random() < 0.5 else mt.Cone.no_short(m.d, 1)
    v = check_na(m, cone)
    assert (v.witness is None) != (v.certificate is None)
    if v.holds:
        assert verify_state_prices(m, v.certificate, cone, 0) == []
    else:
        assert is_arbitrage(m, v.witness, cone)
        dw = dual_witness(m, cone)
        assert dw is not None and is_arbitrage(m, dw, cone)
    if af:
        assert v.holds


# ------------------------------------------------------------------ local NA


def test_local_binomial(binom2):
    seq = mt.LocalizingSequence((mt.StoppingTime.constant(binom2, 1), mt.StoppingTime.terminal(binom2)), True)
    v = check_local_na(binom2, seq, UNC)
    assert v.holds and [x.holds for x in v.per_k] == [True, True]


def test_local_demo_fails_at_first(demo):
    seq = mt.LocalizingSequence((mt.StoppingTime({"n1"}), mt.StoppingTime.terminal(demo)), True)
    v = check_local_na(demo, seq, UNC)
    assert not v.holds and not v.per_k[0].holds
    assert v.witness is not None


def test_local_constant_at_zero(demo):
    v = check_local_na(demo, mt.LocalizingSequence((mt.StoppingTime({"n0"}),)), UNC)
    assert v.holds


# ------------------------------------------------------------------ pricing systems


def test_find_binomial_up_atom(call_tree):
    seq = terminal_seq(call_tree)
    res = find_pricing_system(call_tree, seq, (1,), (1,), "ru", (1, 1))
    assert res.objective == F(1, 3) and res.positive
    assert res.system.densities[1, 1] == {"ru": F(2, 3), "rd": F(4, 3)}
    assert verify_pricing_system(call_tree, seq, res.system, UNC, 0).ok


def test_find_demo_zero(demo):
    for atom in demo.leaves:
        res = find_pricing_system(demo, terminal_seq(demo), (1,), (2,), atom, (1, 2))
        assert res.objective == 0 and not res.positive


def test_find_constant_prices():
    from conftest import single_path

    m = mt.generate_binomial(1, 2, F(1, 2), F(1, 3), 2).with_prices(
        {v: (F(5),) for v in mt.generate_binomial(1, 2, F(1, 2), F(1, 3), 2).by_id}
    )
    seq = terminal_seq(m)
    for atom in m.leaves:
        res = find_pricing_system(m, seq, (1,), (m.T,), atom, (1, m.T))
        # the LP may put all mass on the atom; the constant density already reaches P(A)
        assert res.objective >= m.atom_prob[atom] and res.positive
        assert verify_pricing_system(m, seq, res.system, UNC, 0).ok
    assert verify_pricing_system(m, seq, constant_system(m, 1), UNC, 0).ok
    single = single_path([3, 3])
    assert find_pricing_system(single, terminal_seq(single), (1,), (1,), "n1", (1, 1)).objective == 1


def test_gamma_must_contain_T(call_tree):
    with pytest.raises(ParamError):
        find_pricing_system(call_tree, terminal_seq(call_tree), (1,), (0,), "ru", (1, 0))


def test_verify_constant_on_martingale(binom2):
    rep = verify_pricing_system(binom2, terminal_seq(binom2), constant_system(binom2, 1), UNC, 0)
    # p = 1/2 is not the martingale measure for u=2, d=1/2
    assert not rep.ok
    mart = mt.generate_binomial(4, 2, F(1, 2), F(1, 3), 2)
    assert verify_pricing_system(mart, terminal_seq(mart), constant_system(mart, 1), UNC, 0).ok


def test_verify_demo_violation_at_root(demo):
    rep = verify_pricing_system(demo, terminal_seq(demo), constant_system(demo, 1), UNC, 0)
    assert not rep.ok
    assert any(u == (1,) and v == "n0" for u, _, v, _ in rep.violations)


def test_verify_dimension_error(call_tree):
    bad = PricingSystem((1,), (1,), {(1, 1): {"ru": F(1)}})
    with pytest.raises(DimensionError):
        verify_pricing_system(call_tree, terminal_seq(call_tree), bad, UNC, 0)


@given(st.integers(0, 10_000), st.integers(1, 50))
def test_scaling_invariance(seed, c):
    rng = random.Random(seed)
    m = mt.generate_random(rng, rng.randint(1, 3), 3, 1, 10)
    seq = mt.random_localizing_sequence(m, rng, 2)
    atom = rng.choice(m.leaves)
    res = find_pricing_system(m, seq, (1, 2), (m.T,), atom, (2, m.T))
    base = verify_pricing_system(m, seq, res.system, UNC, 0).ok
    again = res.system.scaled(F(c)).normalized(m)
    assert verify_pricing_system(m, seq, again, UNC, 0).ok == base


@given(st.integers(0, 10_000))
def test_one_step_implies_stopping_time_form(seed):
    """Random (sigma <= tau, B in F_sigma) spot checks of the unconditional inequality."""
    rng = random.Random(seed)
    m = mt.generate_random(rng, rng.randint(1, 3), 3, 1, 10)
    seq = mt.random_localizing_sequence(m, rng, 2)
    res = find_pricing_system(m, seq, (2,), (m.T,), rng.choice(m.leaves), (2, m.T))
    Z = res.system
    assert verify_pricing_system(m, seq, Z, UNC, 0).ok
    Sk = mt.stopped_prices(m, seq.times[1])
    sigma = mt.random_stopping_time(m, rng)
    tau = mt.random_stopping_time(m, rng, sigma)
    smap, tmap = sigma.stop_map(m), tau.stop_map(m)
    B = {s for s in sigma.stop_set if rng.random() < 0.5}
    z = Z.densities[2, m.T]
    for u in (1, -1):
        lhs = sum(m.atom_prob[l] * z[l] * u * Sk.prices(tmap[l])[0] for l in m.leaves if smap[l] in B)
        rhs = sum(m.atom_prob[l] * z[l] * u * Sk.prices(smap[l])[0] for l in m.leaves if smap[l] in B)
        assert lhs == rhs  # unconstrained cone: martingale, both rays


# ------------------------------------------------------------------ deflated value


def test_deflated_zero_strategy(call_tree):
    Z = constant_system(call_tree, 1)
    assert deflated_value(call_tree, terminal_seq(call_tree), Z, GeneralizedStrategy(1)) == 0


def test_deflated_buy_and_hold_martingale():
    m = mt.generate_binomial(1, 2, F(1, 2), F(1, 3), 2)
    H = GeneralizedStrategy(1, {v: (1,) for v in m.nonterminal})
    assert deflated_value(m, terminal_seq(m), constant_system(m, 1), H) == 0


def test_deflated_dimension_error(call_tree):
    with pytest.raises(DimensionError):
        deflated_value(call_tree, terminal_seq(call_tree), constant_system(call_tree, 1), GeneralizedStrategy(2))


# ------------------------------------------------------------------ FTAP cross-check (smaller variant)


@given(st.integers(0, 10_000))
def test_ftap_equivalence(seed):
    rng = random.Random(seed)
    m = mt.generate_random(rng, rng.randint(1, 3), 3, 1, 8, arbitrage_free=rng.random() < 0.5)
    seq = mt.random_localizing_sequence(m, rng, 2)
    holds = check_local_na(m, seq, UNC).holds
    K = len(seq.times)
    every = all(
        find_pricing_system(m, seq, tuple(range(1, K + 1)), (m.T,), a, (k, m.T)).positive
        for k in range(1, K + 1)
        for a in m.leaves
    )
    assert holds == every
