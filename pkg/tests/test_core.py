from fractions import Fraction
from itertools import permutations

import pytest
from hypothesis import given, settings, strategies as st

from aitthermo.core import (
    BitString,
    RuleSpectrum,
    FiniteSpectrum,
    GeometricTail,
    KraftTail,
    PowerLawTail,
    PrefixSet,
    all_strings,
    canonical_key,
    is_prefix_free,
    kraft_sum,
    power_law_spectrum,
    spectrum_from_dict,
    spectrum_of,
    unary_spectrum,
    weighted_sums,
)
from aitthermo.errors import NoConvergenceCertificate, SpecParseError, TailUnbounded
from aitthermo.rigor import DyadicInterval

PI2_12_UPPER = Fraction(822467034, 10**9)
bitstrings = st.text(alphabet="01", min_size=1, max_size=10)


def prefix_free_sets():
    """Random prefix-free sets: leaves of a random binary tree."""
    @st.composite
    def build(draw):
        leaves, frontier = [], [""]
        while frontier and len(leaves) < 12:
            node = frontier.pop(0)
            if len(node) < 7 and draw(st.booleans()):
                frontier += [node + "0", node + "1"]
            elif node:
                if draw(st.booleans()):
                    leaves.append(node)
        return leaves
    return build()


def brute_prefix_free(strings):
    return not any(a != b and b.startswith(a) for a in strings for b in strings)


def test_is_prefix_free_examples():
    assert is_prefix_free(["1", "01"])
    assert not is_prefix_free(["0", "01"])
    assert is_prefix_free([])


@given(st.lists(bitstrings, max_size=8, unique=True))
@settings(max_examples=300, deadline=None)
def test_is_prefix_free_matches_pairwise_check(strings):
    assert is_prefix_free(strings) == brute_prefix_free(strings)


@given(st.lists(bitstrings, max_size=6, unique=True))
@settings(max_examples=50, deadline=None)
def test_is_prefix_free_is_order_insensitive(strings):
    results = {is_prefix_free(list(p)) for p in permutations(strings)}
    assert len(results) == 1


def test_bitstring_validation():
    assert BitString("0101").length == 4
    with pytest.raises(ValueError):
        BitString("012")


def test_prefix_set_rules():
    s = PrefixSet(["01", "1"])
    assert list(s) == ["1", "01"]
    with pytest.raises(ValueError):
        PrefixSet(["0", "01"])
    with pytest.raises(ValueError):
        PrefixSet([""])
    with pytest.raises(ValueError):
        PrefixSet(["1", "1"])


def test_canonical_order():
    strings = list(all_strings(3))
    assert strings[:7] == ["", "0", "1", "00", "01", "10", "11"]
    assert strings == sorted(strings, key=canonical_key)


def test_spectrum_of_examples():
    assert spectrum_of(["1", "01"]) == {1: 1, 2: 1}
    assert spectrum_of(["1", "01", "001"]) == {1: 1, 2: 1, 3: 1}
    assert spectrum_of([""]) == {}


def test_kraft_sum_examples():
    assert kraft_sum(spectrum_of(["1", "01"]), 0) == DyadicInterval.point(Fraction(3, 4))
    r = kraft_sum(unary_spectrum(), Fraction(1, 10**9))
    assert 1 in r and r.width <= Fraction(1, 10**9)
    assert kraft_sum(FiniteSpectrum({}), 0) == DyadicInterval.point(0)


@given(prefix_free_sets())
@settings(max_examples=200, deadline=None)
def test_kraft_inequality_and_total(members):
    spec = spectrum_of(members)
    k = kraft_sum(spec, 0)
    assert k.is_exact and k.hi <= 1
    assert k.lo == sum(Fraction(1, 2 ** len(p)) for p in members)
    assert spec.total() == len(members)


def test_finite_spectrum_rejects_impossible_counts():
    with pytest.raises(ValueError):
        FiniteSpectrum({1: 3})
    with pytest.raises(ValueError):
        FiniteSpectrum({1: 2, 2: 1})  # Kraft sum 5/4
    with pytest.raises(ValueError):
        FiniteSpectrum({0: 1})


def test_heavy_tail_values():
    spec = power_law_spectrum()
    vals = spec.values(8)
    assert {n + 1: v for n, v in enumerate(vals) if v} == {1: 1, 7: 1, 8: 2}
    assert vals[1:6] == [0] * 5


def test_heavy_tail_kraft_certificate():
    # pi^2/12 = 0.82246703342411...; allow 1e-9 on top
    spec = power_law_spectrum()
    L = 10_000
    vals = spec.values(L)
    acc = 0
    for n, m in enumerate(vals, start=1):
        acc += m << (L - n)
    total = Fraction(acc, 1 << L)
    assert total <= PI2_12_UPPER + Fraction(1, 10**9)


def test_kraft_sum_rule_spectra():
    k = kraft_sum(power_law_spectrum(), Fraction(1, 10**9))
    assert k.width <= Fraction(1, 10**9)
    assert k.hi <= PI2_12_UPPER + Fraction(1, 10**9)


def test_tail_majorants_dominate_exact_tails():
    T = Fraction(1, 2)
    for L in range(1, 65):
        exact = Fraction(1, 4 ** L) * Fraction(4, 3)
        assert GeometricTail().z_tail(L, T, 80).hi >= exact
        assert KraftTail().z_tail(L, T, 80).hi >= exact
    # power-law tail at T < 1 against a long explicit partial sum
    spec = power_law_spectrum()
    T = Fraction(3, 4)
    L = 20
    s_far = weighted_sums(spec, T, 400, 120)
    s_near = weighted_sums(spec, T, L - 1, 120)
    assert PowerLawTail(2, 2).z_tail(L, T, 100).hi >= s_far.z_lo - s_near.z_hi


def test_kraft_tail_needs_subunit_temperature():
    with pytest.raises(NoConvergenceCertificate):
        KraftTail().z_tail(5, Fraction(1), 64)


def test_spectrum_dict_round_trip():
    for spec in [unary_spectrum(), power_law_spectrum(3, 2), FiniteSpectrum({1: 1, 3: 2})]:
        again = spectrum_from_dict(spec.to_dict())
        assert again.values(30) == spec.values(30)


def test_spectrum_dict_errors():
    with pytest.raises(SpecParseError):
        spectrum_from_dict({"rule": {"name": "nope"}, "tail_majorant": {"name": "kraft"}})
    with pytest.raises(SpecParseError):
        spectrum_from_dict({"rule": {"name": "unary"}})
    with pytest.raises(SpecParseError):
        spectrum_from_dict({"rule": {"name": "unary"}, "tail_majorant": {"name": "power_law"}})


def test_kraft_sum_without_certificate():
    class NoTail(KraftTail):
        def z_tail(self, L, T, bits):
            raise NoConvergenceCertificate("none")
    spec = RuleSpectrum(lambda n: 1, NoTail(), "ones", {})
    with pytest.raises(TailUnbounded):
        kraft_sum(spec, Fraction(1, 1000))
