import json
import os
import subprocess
import sys
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from aitthermo import _kernels as K
from aitthermo.core import FiniteSpectrum, all_strings, is_prefix_free, kraft_sum
from aitthermo.errors import NotFound, UnknownMachine
from aitthermo.machines import (
    HALTED,
    NO_HALT,
    NOT_IN_DOMAIN,
    EnumerationState,
    SpectrumMachine,
    TableMachine,
    UniversalMachine,
    builtin,
    check_predicates,
    complexity_upper,
    enumerate_domain,
    run,
)
from aitthermo.thermo import partial_Z

U = UniversalMachine()


def test_builtin_catalog():
    assert kraft_sum(builtin("B").spectrum(), 0).lo == Fraction(3, 4)
    assert builtin("O").spectrum().values(4) == [1, 1, 1, 1]
    vals = builtin("heavy_tail", 2, 2).spectrum().values(8)
    assert {n: v for n, v in enumerate(vals, 1) if v} == {1: 1, 7: 1, 8: 2}
    with pytest.raises(UnknownMachine):
        builtin("nope")


def test_table_machine_validation():
    with pytest.raises(ValueError):
        TableMachine("bad", {"0": "", "01": ""})
    with pytest.raises(ValueError):
        TableMachine("empty", {})


def test_run_table():
    B = builtin("B")
    assert run(B, "1").kind == HALTED and run(B, "1").output == ""
    assert run(B, "01").output == "0"
    assert run(B, "00").kind == NOT_IN_DOMAIN


def test_run_universal_hand_encoded_programs():
    # "1" selects the interpreter, "0" ends an empty listing: emits the empty string
    assert run(U, "10", 10**6) == (HALTED, "", 2)
    # "01" selects table B, then B's program "1"
    assert run(U, "011", 100).output == ""
    assert run(U, "0101", 100).output == "0"
    # interpreter listing: one OUT0 instruction
    assert run(U, "110000", 100).output == "0"
    for p in ["1", "00", "001", "100", "0100"]:
        assert run(U, p, 100).kind == NOT_IN_DOMAIN


def test_run_universal_reports_timeouts():
    # JMP 0 forever: "1" + "1 101 0" + "0"
    loop = "1" + "11010" + "0"
    assert run(U, loop, 1000).kind == NO_HALT
    assert run(U, "10", 1).kind == NO_HALT


def test_universal_domain_is_prefix_free_up_to_length_12():
    halting = [p for p in all_strings(12, 1) if run(U, p, 256).halted]
    assert "10" in halting
    assert is_prefix_free(halting)


def test_enumeration_examples():
    s0 = enumerate_domain(U, None, 0)
    assert s0.discovered == ()
    small = enumerate_domain(U, None, 100)
    large = enumerate_domain(U, None, 10_000)
    assert set(small.discovered) <= set(large.discovered)
    assert "10" in large.outputs()
    assert is_prefix_free(p for p, _ in large.discovered)


def test_enumeration_budget_is_additive():
    a = enumerate_domain(U, enumerate_domain(U, None, 300), 700)
    b = enumerate_domain(U, None, 1000)
    assert a == b


def test_enumeration_checkpoint_round_trip():
    s = enumerate_domain(U, None, 5000)
    d = json.loads(json.dumps(s.to_dict()))
    assert EnumerationState.from_dict(d) == s


def test_enumeration_honesty():
    s = enumerate_domain(U, None, 20_000)
    for p, out in s.discovered:
        r = run(U, p, 1 << 20)
        assert r.halted and r.output == out


@given(st.lists(st.integers(0, 30_000), min_size=2, max_size=5))
@settings(max_examples=20, deadline=None)
def test_discovered_sets_grow_with_budget(budgets):
    budgets = sorted(budgets)
    sets = [set(enumerate_domain(U, None, b).discovered) for b in budgets]
    for x, y in zip(sets, sets[1:]):
        assert x <= y


def test_two_schedules_give_monotone_lower_bounds():
    # schedule 1: the dovetailer; schedule 2: run every program up to a length
    # with a fixed grant.  Both lower bounds grow with their budgets.
    T = Fraction(1, 2)
    z1 = [partial_Z(UniversalMachine(budget=b).spectrum(), T, 30, 0).lo for b in (200, 2000, 20000)]
    assert z1 == sorted(z1)
    z2 = []
    for grant in (16, 64, 256):
        found = [p for p in all_strings(10, 1) if run(U, p, grant).halted]
        z2.append(sum(Fraction(1, 4 ** len(p)) for p in found))
    assert z2 == sorted(z2)


def test_complexity_upper_examples():
    m = TableMachine("t", {"1": "", "01": "0"})
    assert complexity_upper(m, "", 2) == 1
    assert complexity_upper(m, "0", 2) == 2
    with pytest.raises(NotFound):
        complexity_upper(m, "11", 2)


def test_complexity_upper_on_universal():
    assert complexity_upper(U, "", 8, 64) == 2
    assert complexity_upper(U, "0", 8, 64) == 4
    with pytest.raises(NotFound):
        complexity_upper(U, "0000", 3, 64)


@given(st.sampled_from(["", "0", "1", "00", "01", "10", "11", "000"]))
@settings(max_examples=8, deadline=None)
def test_complexity_nonincreasing_in_window(s):
    INF = 10**9

    def h(max_len, steps):
        try:
            return complexity_upper(U, s, max_len, steps)
        except NotFound:
            return INF
    for steps in (8, 32, 128):
        vals = [h(L, steps) for L in (6, 9, 12)]
        assert vals == sorted(vals, reverse=True)
    vals = [h(12, steps) for steps in (8, 32, 128)]
    assert vals == sorted(vals, reverse=True)


def test_check_predicates_examples():
    assert check_predicates(builtin("B")) == (True, True)
    assert check_predicates(builtin("O")) == (True, True)
    assert check_predicates(SpectrumMachine("five", FiniteSpectrum({5: 7}))) == (False, True)
    pr = check_predicates(UniversalMachine(budget=10_000))
    assert pr.physically_reasonable is True and pr.computable_measure is None


# ---------------------------------------------------------------------------
# kernels


def _kernel_args(p, machine=U):
    n = len(p)
    prog = np.array([int(c) for c in p] or [0], dtype=np.uint8)
    out = np.zeros(K.OUT_CAP + 1, np.uint8)
    scratch = [np.zeros(n + 1, np.int64) for _ in range(3)]
    return prog, n, machine._arrays, out, scratch


programs = st.one_of(st.text(alphabet="01", max_size=24),
                     st.text(alphabet="01", max_size=40).map(lambda s: "1" + s))


@given(programs, st.integers(0, 400))
@settings(max_examples=400, deadline=None)
def test_interpreted_and_compiled_kernels_agree(p, steps):
    prog, n, arrays, out1, s1 = _kernel_args(p)
    _, _, _, out2, s2 = _kernel_args(p)
    a = K._simulate_py(prog, n, steps, *arrays, out1, *s1)
    b = K.simulate(prog, n, steps, *arrays, out2, *s2)
    assert tuple(int(x) for x in a) == tuple(int(x) for x in b)
    assert (out1[: a[2]] == out2[: b[2]]).all()


def test_fallback_selected_by_environment():
    code = ("from aitthermo import _kernels as K; from aitthermo.machines import UniversalMachine;"
            "U = UniversalMachine(); st, used = U.simulate_length(9, 128);"
            "print(K.USE_NUMBA, int(st.sum()), int(used.sum()))")
    outs = {}
    for flag in ("1", "0"):
        env = dict(os.environ, AITTHERMO_DISABLE_NUMBA=flag)
        r = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
        outs[flag] = r.stdout.split()
    assert outs["1"][0] == "False" and outs["0"][0] == "True"
    assert outs["1"][1:] == outs["0"][1:]
