"""Machine catalog, execution, domain enumeration and program-size probes.

Three presentations are supported:

* :class:`TableMachine` - a finite map from a prefix-free key set to outputs.
* :class:`SpectrumMachine` - only a length spectrum (no outputs); enough for
  every thermodynamic quantity.
* :class:`UniversalMachine` - the bundled optimal machine, simulated under a
  step budget (see :mod:`aitthermo._kernels` for the program layout).

Optimality of the universal machine: the interpreter (index 1) can simulate
any prefix-free machine ``C`` by a fixed listing ``q_C`` that pulls ``C``'s
program one bit at a time with ``READ``, so ``U(1 q_C p) = C(p)`` and
``|1 q_C p| = |p| + d_C``.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple

import numpy as np

from . import _kernels as K
from .core import (
    BitString,
    FiniteSpectrum,
    LengthSpectrum,
    PrefixSet,
    canonical_key,
    power_law_spectrum,
    spectrum_of,
    unary_spectrum,
)
from .errors import NotFound, UnknownMachine

DEFAULT_BUDGET = 1 << 16
MAX_ROUNDS = 24


# ---------------------------------------------------------------------------
# outcomes


class Outcome(NamedTuple):
    kind: str                       # "halted" | "no_halt_within_budget" | "not_in_domain"
    output: BitString | None = None
    steps: int = 0

    @property
    def halted(self) -> bool:
        return self.kind == "halted"


HALTED = "halted"
NO_HALT = "no_halt_within_budget"
NOT_IN_DOMAIN = "not_in_domain"


# ---------------------------------------------------------------------------
# machines


class Machine:
    name: str
    kind: str

    def spectrum(self) -> LengthSpectrum:
        raise NotImplementedError

    @property
    def is_lower_bound(self) -> bool:
        """True when the spectrum only covers a budget-limited part of the domain."""
        return False

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class TableMachine(Machine):
    name: str
    table: Mapping[str, str]
    kind: str = field(default="table", init=False)

    def __post_init__(self):
        tab = {BitString(k): BitString(v) for k, v in dict(self.table).items()}
        if not tab:
            raise ValueError("a computer's domain must be nonempty")
        PrefixSet(tab)  # validates prefix-freeness and rejects λ
        object.__setattr__(self, "table", dict(sorted(tab.items(), key=lambda kv: canonical_key(kv[0]))))

    @classmethod
    def from_domain(cls, name: str, domain: Iterable[str], outputs: Iterable[str] | None = None):
        domain = list(domain)
        outs = [""] * len(domain) if outputs is None else list(outputs)
        if len(outs) != len(domain):
            raise ValueError("domain and outputs differ in length")
        return cls(name, dict(zip(domain, outs)))

    @property
    def domain(self) -> PrefixSet:
        return PrefixSet(self.table)

    def spectrum(self):
        return spectrum_of(self.table)

    def to_dict(self):
        return {"kind": "table", "name": self.name,
                "domain": list(self.table), "outputs": list(self.table.values())}


@dataclass(frozen=True, eq=False)
class SpectrumMachine(Machine):
    name: str
    spec: LengthSpectrum
    kind: str = field(default="spectrum", init=False)

    def spectrum(self):
        return self.spec

    def to_dict(self):
        return {"kind": "spectrum", "name": self.name, **self.spec.to_dict()}


#: B: the two-level system, domain {1, 01}; outputs are our choice.
def machine_B() -> TableMachine:
    return TableMachine("B", {"1": "", "01": "0"})


@dataclass(frozen=True, eq=False)
class UniversalMachine(Machine):
    """``U(0**(i-1) 1 p) = M_i(p)``: ``M_1`` is the interpreter, ``M_{i+2}`` is ``tables[i]``."""

    name: str = "U"
    tables: tuple = ()
    budget: int = DEFAULT_BUDGET
    kind: str = field(default="universal", init=False)

    def __post_init__(self):
        tabs = tuple(self.tables) or (machine_B(),)
        object.__setattr__(self, "tables", tabs)
        object.__setattr__(self, "_arrays", _compile_tables(tabs))

    # execution -------------------------------------------------------------

    def _run_bits(self, p: str, steps: int):
        n = len(p)
        prog = np.frombuffer(p.encode(), np.uint8) - ord("0") if n else np.zeros(1, np.uint8)
        prog = np.ascontiguousarray(prog, dtype=np.uint8)
        out = np.zeros(min(max(steps, 0), K.OUT_CAP) + 1, np.uint8)
        scratch = [np.zeros(n + 1, np.int64) for _ in range(3)]
        st, used, olen = K.simulate(prog, n, steps, *self._arrays, out, *scratch)
        output = BitString("".join("1" if b else "0" for b in out[:olen])) if st == K.HALTED else None
        return int(st), int(used), output

    def run(self, p: str, steps: int) -> Outcome:
        st, used, output = self._run_bits(BitString(p), steps)
        if st == K.HALTED:
            return Outcome(HALTED, output, used)
        if st in (K.TIMEOUT, K.OUT_FULL):
            return Outcome(NO_HALT, None, used)
        return Outcome(NOT_IN_DOMAIN, None, used)

    def simulate_length(self, length: int, steps: int) -> tuple[np.ndarray, np.ndarray]:
        """Status and step counts for every program of ``length`` bits, index order = lexicographic."""
        status = np.zeros(1 << length, np.int64)
        used = np.zeros(1 << length, np.int64)
        K.simulate_length(length, steps, *self._arrays, status, used)
        return status, used

    # enumeration ------------------------------------------------------------

    @functools.lru_cache(maxsize=32)
    def _round(self, r: int):
        grant = 1 << r
        parts = [self.simulate_length(length, grant) for length in range(1, r + 2)]
        status = np.concatenate([p[0] for p in parts])
        cost = np.concatenate([p[1] for p in parts])
        return status, cost

    def spectrum(self) -> FiniteSpectrum:
        """Spectrum of the programs discovered within ``budget`` steps (a lower bound)."""
        return _budget_spectrum(self, self.budget)

    @property
    def is_lower_bound(self):
        return True

    def to_dict(self):
        return {"kind": "universal", "name": self.name, "budget": self.budget,
                "tables": [t.to_dict() for t in self.tables]}


def _compile_tables(tables):
    child: list[list[int]] = []
    leaf: list[int] = []
    roots, bits, offs = [], [], [0]
    for t in tables:
        roots.append(len(child))
        child.append([-1, -1])
        leaf.append(-1)
        for key, out in t.table.items():
            node = roots[-1]
            for c in key:
                b = c == "1"
                if child[node][b] < 0:
                    child[node][b] = len(child)
                    child.append([-1, -1])
                    leaf.append(-1)
                node = child[node][b]
            leaf[node] = len(offs) - 1
            bits.extend(int(c) for c in out)
            offs.append(len(bits))
    return (
        np.array(child, np.int64).reshape(-1, 2),
        np.array(leaf, np.int64),
        np.array(roots, np.int64),
        np.array(bits or [0], np.uint8),
        np.array(offs, np.int64),
    )


def _candidate(r: int, j: int) -> BitString:
    # j-th program of round r: lengths 1..r+1, lexicographic within a length
    length = 1
    while j >= 1 << length:
        j -= 1 << length
        length += 1
    return BitString(format(j, f"0{length}b"))


@dataclass(frozen=True)
class EnumerationState:
    """Resumable dovetailing state.

    Round ``r`` runs every program of length ``1..r+1`` in canonical order with
    a grant of ``2**r`` steps.  Each run is charged the steps it used; a run is
    only performed if its charge fits in the remaining budget, so advancing by
    ``a`` then ``b`` steps equals advancing by ``a + b``.
    """

    budget_steps: int = 0
    spent: int = 0
    round: int = 0
    index: int = 0
    discovered: tuple = ()   # ((program, output), ...) in discovery order

    @property
    def programs(self) -> PrefixSet:
        return PrefixSet(p for p, _ in self.discovered)

    def outputs(self) -> dict[BitString, BitString]:
        return {BitString(p): BitString(o) for p, o in self.discovered}

    def to_dict(self, machine: str = "U") -> dict:
        return {"machine": machine, "budget": self.budget_steps, "spent": self.spent,
                "round": self.round, "index": self.index,
                "discovered": [[p, o] for p, o in self.discovered]}

    @classmethod
    def from_dict(cls, d: Mapping) -> "EnumerationState":
        return cls(int(d["budget"]), int(d["spent"]), int(d["round"]), int(d["index"]),
                   tuple((BitString(p), BitString(o)) for p, o in d["discovered"]))


def enumerate_domain(m: UniversalMachine, state: EnumerationState | None = None, extra_steps: int = 0) -> EnumerationState:
    """Advance dovetailed enumeration of ``Dom m`` by ``extra_steps`` simulation steps."""
    if not isinstance(m, UniversalMachine):
        raise TypeError("enumerate_domain needs a universal machine")
    state = state or EnumerationState()
    budget = state.budget_steps + int(extra_steps)
    avail = budget - state.spent
    spent, r, i = state.spent, state.round, state.index
    disc = list(state.discovered)
    seen = {p for p, _ in disc}
    while r <= MAX_ROUNDS and avail > 0:
        status, cost = m._round(r)
        cum = np.cumsum(cost[i:])
        k = int(np.searchsorted(cum, avail, side="right"))
        for j in np.flatnonzero(status[i:i + k] == K.HALTED):
            p = _candidate(r, i + int(j))
            if p not in seen:
                out = m.run(p, 1 << r)
                disc.append((p, out.output))
                seen.add(p)
        if k:
            spent += int(cum[k - 1])
            avail -= int(cum[k - 1])
        i += k
        if i < len(cost):
            break
        r, i = r + 1, 0
    return EnumerationState(budget, spent, r, i, tuple(disc))


@functools.lru_cache(maxsize=64)
def _budget_spectrum(m: UniversalMachine, budget: int) -> FiniteSpectrum:
    return spectrum_of(p for p, _ in enumerate_domain(m, None, budget).discovered)


# ---------------------------------------------------------------------------
# catalog


def builtin(name: str, *params, **kw) -> Machine:
    """``B``, ``O``, ``heavy_tail(a=2, b=2)`` or ``U(budget=...)``."""
    if name == "B":
        return machine_B()
    if name == "O":
        return SpectrumMachine("O", unary_spectrum())
    if name == "heavy_tail":
        spec = power_law_spectrum(*params, **kw)
        a, b = spec.params["a"], spec.params["b"]
        return SpectrumMachine("heavy_tail" if (a, b) == (2, 2) else f"heavy_tail({a},{b})", spec)
    if name == "U":
        return UniversalMachine(*params, **kw)
    raise UnknownMachine(f"unknown machine {name!r}")


# ---------------------------------------------------------------------------
# running and complexity


def run(m: Machine, p: str, steps: int = DEFAULT_BUDGET) -> Outcome:
    p = BitString(p)
    if isinstance(m, UniversalMachine):
        return m.run(p, steps)
    if isinstance(m, TableMachine):
        if p in m.table:
            return Outcome(HALTED, m.table[p], 0)
        return Outcome(NOT_IN_DOMAIN)
    runner = getattr(m, "run", None)
    if runner is None:
        raise TypeError(f"{m.kind} machines have no outputs to run")
    return runner(p, steps)


def complexity_upper(m: Machine, s: str, max_len: int, steps: int = DEFAULT_BUDGET) -> int:
    """Least ``|p| <= max_len`` with ``m(p) = s`` found within ``steps`` steps.

    Exact ``H_m(s)`` for tables whose whole domain fits in the window; an upper
    bound otherwise.  Raises :class:`NotFound` when nothing in the window works.
    """
    s = BitString(s)
    if isinstance(m, TableMachine):
        lens = [len(p) for p, o in m.table.items() if o == s and len(p) <= max_len]
        if lens:
            return min(lens)
    elif isinstance(m, UniversalMachine):
        for length in range(1, max_len + 1):
            status, _ = m.simulate_length(length, steps)
            for j in np.flatnonzero(status == K.HALTED):
                if m.run(format(int(j), f"0{length}b"), steps).output == s:
                    return length
    else:
        table = getattr(m, "materialize_table", None)
        if table is None:
            raise TypeError(f"{m.kind} machines have no outputs")
        return complexity_upper(TableMachine(m.name, table()), s, max_len, steps)
    raise NotFound(f"no program of length <= {max_len} outputs {str(s)!r} within {steps} steps")


# ---------------------------------------------------------------------------
# predicates


class Predicates(NamedTuple):
    physically_reasonable: bool | None   # None: unknown so far
    computable_measure: bool | None


_SCAN = 256


def check_predicates(m: Machine) -> Predicates:
    """Whether two program lengths differ, and whether the Kraft sum is computable."""
    if isinstance(m, UniversalMachine):
        lengths = set(m.spectrum().entries)
        return Predicates(True if len(lengths) >= 2 else None, None)
    spec = m.spectrum()
    if spec.is_finite:
        if len(spec.entries) >= 2:
            reasonable = True
        else:
            reasonable = None if m.is_lower_bound else False
        return Predicates(reasonable, None if m.is_lower_bound else True)
    distinct = len(spec.lengths(_SCAN))
    reasonable = True if distinct >= 2 else None
    return Predicates(reasonable, None if m.is_lower_bound else True)
