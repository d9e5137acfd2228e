from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from aitthermo.core import FiniteSpectrum, KraftTail, RuleSpectrum, power_law_spectrum, unary_spectrum
from aitthermo.errors import BudgetExhausted, NoConvergenceCertificate, ZoneError
from aitthermo.machines import builtin
from aitthermo.rigor import DyadicInterval
from aitthermo.thermo import (
    Temperature,
    detect_divergence,
    detect_divergence_witness,
    eval_E,
    eval_F,
    eval_S,
    eval_Z,
    evaluate,
    generic_tail_bound,
    parse_rational,
    partial_Z,
    sweep,
    tail_bound_Z,
)

from oracles import closed_form, contains_bracket, mp_bounds, mp_log2

B = FiniteSpectrum({1: 1, 2: 1})
O = unary_spectrum()
HEAVY = power_law_spectrum()
SINGLE = FiniteSpectrum({1: 1})
EPS = Fraction(1, 10**9)
half = Fraction(1, 2)


def test_temperature_parsing():
    assert Temperature("3/4").value == Fraction(3, 4)
    assert Temperature("1").zone == "unit"
    assert Temperature(Fraction(1, 3)).zone == "sub_unit"
    assert Temperature(2).zone == "super_unit"
    assert parse_rational("2^-10") == Fraction(1, 1024)
    with pytest.raises(ValueError):
        Temperature(0)


def test_partial_Z_examples():
    assert partial_Z(B, 1, 2, 0) == DyadicInterval.point(Fraction(3, 4))
    assert partial_Z(B, half, 2, 0) == DyadicInterval.point(Fraction(5, 16))
    assert partial_Z(HEAVY, half, 6, EPS) == partial_Z(HEAVY, half, 1, EPS)
    assert partial_Z(FiniteSpectrum({5: 1}), half, 4, 0) == DyadicInterval.point(0)


def test_partial_Z_is_monotone_in_L():
    for spec in (O, HEAVY):
        prev = Fraction(0)
        for L in range(1, 60):
            z = partial_Z(spec, Fraction(2, 3), L, Fraction(1, 2**80))
            assert z.hi >= prev
            prev = z.lo


def test_tail_bound_examples():
    assert tail_bound_Z(O, half, 20) >= Fraction(1, 4**20) * Fraction(4, 3)
    assert generic_tail_bound(half, 1) == 1
    assert tail_bound_Z(RuleSpectrum(lambda n: 1, KraftTail(), "ones", {}), half, 1) == 1
    with pytest.raises(ZoneError):
        tail_bound_Z(O, 1, 5)


def test_tail_bound_valid_for_unary_up_to_64():
    for L in range(1, 65):
        assert tail_bound_Z(O, half, L) >= Fraction(1, 4**L) * Fraction(4, 3)


def test_tail_bound_tends_to_zero():
    vals = [tail_bound_Z(HEAVY, Fraction(9, 10), L) for L in (10, 100, 1000)]
    assert vals[0] > vals[1] > vals[2] and vals[2] < Fraction(1, 10**20)


def test_eval_Z_examples():
    assert 1 / Fraction(3) in eval_Z(O, half, EPS)
    assert eval_Z(B, 1, 0) == DyadicInterval.point(Fraction(3, 4))
    z = eval_Z(O, 1, EPS)
    assert 1 in z and z.width <= EPS


def test_eval_F_examples():
    f = eval_F(B, 1, EPS)
    lo, hi = mp_bounds(mp_log2(Fraction(3, 4)))
    assert contains_bracket(f, -hi, -lo)
    f = eval_F(O, half, EPS)
    lo, hi = mp_bounds(mp_log2(3))
    assert contains_bracket(f, lo / 2, hi / 2)
    for T in (Fraction(1, 5), half, Fraction(7, 8)):
        assert 1 in eval_F(SINGLE, T, EPS)


def test_eval_E_examples():
    assert 2 in eval_E(O, 1, EPS)
    assert Fraction(6, 5) in eval_E(B, half, EPS)
    for T in (Fraction(1, 5), half, 1):
        assert 1 in eval_E(SINGLE, T, EPS)


def test_eval_S_examples():
    for T in (Fraction(1, 5), half):
        assert 0 in eval_S(SINGLE, T, EPS)
    for name, spec in (("B", B), ("O", O)):
        ref = closed_form(name, half)["S"]
        assert contains_bracket(eval_S(spec, half, EPS), *ref)


def test_widths_meet_eps():
    for spec in (B, O, HEAVY):
        rep = evaluate(spec, Fraction(3, 5), EPS)
        for q in "ZFES":
            assert rep[q].width <= EPS


def test_heavy_tail_energy_diverges_at_unit_temperature():
    with pytest.raises(NoConvergenceCertificate):
        eval_E(HEAVY, 1, Fraction(1, 1000))
    with pytest.raises(NoConvergenceCertificate):
        eval_Z(HEAVY, Fraction(5, 4), Fraction(1, 1000))


grid = st.integers(1, 49).map(lambda k: Fraction(k, 50))


@given(grid, st.sampled_from(["B", "O", "heavy_tail"]))
@settings(max_examples=40, deadline=None)
def test_cross_identities(T, name):
    spec = builtin(name).spectrum()
    rep = evaluate(spec, T, EPS)
    assert rep.check_identities()


def test_sweep_matches_evaluate():
    temps = [Fraction(1, 4), Fraction(1, 2)]
    reps = sweep(O, temps, EPS, ("Z",))
    assert [r.T for r in reps] == temps
    assert reps[1].Z == evaluate(O, half, EPS, ("Z",)).Z


def test_detect_divergence_examples():
    assert detect_divergence(HEAVY, Fraction(5, 4), 10) <= 200
    assert detect_divergence(HEAVY, Fraction(5, 4), 0) == 1
    with pytest.raises(BudgetExhausted) as exc:
        detect_divergence(O, Fraction(5, 4), 10**6)
    assert exc.value.certificate is not None


def test_divergence_witness_is_a_true_lower_bound():
    w = detect_divergence_witness(HEAVY, Fraction(5, 4), 1000)
    exact = partial_Z(HEAVY, Fraction(5, 4), w.L, Fraction(1, 2**200))
    assert exact.lo > 1000 and w.lower_bound <= exact.hi
    before = partial_Z(HEAVY, Fraction(5, 4), w.L - 1, Fraction(1, 2**200))
    assert before.lo <= 1000


def test_divergence_needs_super_unit_temperature():
    with pytest.raises(ZoneError):
        detect_divergence(HEAVY, 1, 10)
