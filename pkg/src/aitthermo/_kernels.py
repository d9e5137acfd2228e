"""Simulation kernels for the bundled universal machine.

The kernels are plain Python over numpy arrays.  When numba is importable and
``AITTHERMO_DISABLE_NUMBA`` is unset (or ``0``), they are compiled with
``@njit``; otherwise the same source runs interpreted.  ``USE_NUMBA`` reports
which path is live.

Program layout read by :func:`simulate` (every input bit read costs one step,
every executed instruction costs one step)::

    0**(i-1) 1      machine index i
    i == 1          interpreter: instruction listing, then runtime input
    i >= 2          table machine number i-2, walked bit by bit through a trie

Instruction listing: each instruction is ``1`` followed by a 3-bit opcode and
its operands; a single ``0`` ends the listing.  Registers are 2-bit indices,
jump targets are unary ``1**t 0``.

    000 OUT0        001 OUT1        010 INC r       011 DEC r t
    100 READ r      101 JMP t       110 OUTR r      111 HALT

``DEC r t`` jumps to ``t`` when register ``r`` is zero and otherwise
decrements it.  ``READ`` loads the next input bit.  Execution stops on HALT or
when ``pc`` leaves the listing.  A program is in the domain only if the
machine halts having read exactly all of its bits; since no decision depends
on unread bits, the domain is prefix-free.
"""
import os

import numpy as np

HALTED = 0
NEED_MORE = 1      # asked for a bit past the end of the program
EXTRA_INPUT = 2    # halted with unread bits left
TIMEOUT = 3
REJECTED = 4       # no machine with that index, or not in the table's domain
OUT_FULL = 5       # output buffer exhausted; reported like a timeout

OUT0, OUT1, INC, DEC, READ, JMP, OUTR, HALT = range(8)
NREGS = 4
OUT_CAP = 1 << 16

_flag = os.environ.get("AITTHERMO_DISABLE_NUMBA", "").strip().lower()
USE_NUMBA = _flag in ("", "0", "false", "no")
if USE_NUMBA:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - numba is a declared dependency
        USE_NUMBA = False


def _simulate_py(prog, n, max_steps, trie, trie_out, roots, tab_bits, tab_off, out, ops, ra, ta):
    """Run one program; returns ``(status, steps, output_length)``."""
    pos = 0
    steps = 0
    idx = 1
    while True:
        if pos >= n:
            return NEED_MORE, steps, 0
        if steps >= max_steps:
            return TIMEOUT, steps, 0
        b = prog[pos]
        pos += 1
        steps += 1
        if b == 1:
            break
        idx += 1

    if idx >= 2:
        t = idx - 2
        if t >= roots.shape[0]:
            return REJECTED, steps, 0
        node = roots[t]
        while trie_out[node] < 0:
            if pos >= n:
                return NEED_MORE, steps, 0
            if steps >= max_steps:
                return TIMEOUT, steps, 0
            b = prog[pos]
            pos += 1
            steps += 1
            node = trie[node, b]
            if node < 0:
                return REJECTED, steps, 0
        if pos != n:
            return EXTRA_INPUT, steps, 0
        k = trie_out[node]
        olen = tab_off[k + 1] - tab_off[k]
        for j in range(olen):
            out[j] = tab_bits[tab_off[k] + j]
        return HALTED, steps, olen

    # loader
    ninstr = 0
    while True:
        if pos >= n:
            return NEED_MORE, steps, 0
        if steps >= max_steps:
            return TIMEOUT, steps, 0
        c = prog[pos]
        pos += 1
        steps += 1
        if c == 0:
            break
        op = 0
        for _ in range(3):
            if pos >= n:
                return NEED_MORE, steps, 0
            if steps >= max_steps:
                return TIMEOUT, steps, 0
            op = 2 * op + prog[pos]
            pos += 1
            steps += 1
        r = 0
        if op == INC or op == DEC or op == READ or op == OUTR:
            for _ in range(2):
                if pos >= n:
                    return NEED_MORE, steps, 0
                if steps >= max_steps:
                    return TIMEOUT, steps, 0
                r = 2 * r + prog[pos]
                pos += 1
                steps += 1
        t = 0
        if op == DEC or op == JMP:
            while True:
                if pos >= n:
                    return NEED_MORE, steps, 0
                if steps >= max_steps:
                    return TIMEOUT, steps, 0
                u = prog[pos]
                pos += 1
                steps += 1
                if u == 0:
                    break
                t += 1
        ops[ninstr] = op
        ra[ninstr] = r
        ta[ninstr] = t
        ninstr += 1

    # execution
    regs = np.zeros(NREGS, np.int64)
    pc = 0
    olen = 0
    while pc < ninstr:
        if steps >= max_steps:
            return TIMEOUT, steps, 0
        steps += 1
        op = ops[pc]
        if op == OUT0 or op == OUT1 or op == OUTR:
            if olen >= out.shape[0]:
                return OUT_FULL, steps, 0
            if op == OUTR:
                out[olen] = 1 if regs[ra[pc]] != 0 else 0
            else:
                out[olen] = op
            olen += 1
            pc += 1
        elif op == INC:
            regs[ra[pc]] += 1
            pc += 1
        elif op == DEC:
            if regs[ra[pc]] == 0:
                pc = ta[pc]
            else:
                regs[ra[pc]] -= 1
                pc += 1
        elif op == READ:
            if pos >= n:
                return NEED_MORE, steps, 0
            regs[ra[pc]] = prog[pos]
            pos += 1
            pc += 1
        elif op == JMP:
            pc = ta[pc]
        else:
            break
    if pos != n:
        return EXTRA_INPUT, steps, 0
    return HALTED, steps, olen


def _simulate_length_py(length, max_steps, trie, trie_out, roots, tab_bits, tab_off, status, used):
    """Run all ``2**length`` programs of one length (index ``i`` read MSB first)."""
    prog = np.zeros(length + 1, np.uint8)
    out = np.zeros(min(max_steps, OUT_CAP) + 1, np.uint8)
    ops = np.zeros(length + 1, np.int64)
    ra = np.zeros(length + 1, np.int64)
    ta = np.zeros(length + 1, np.int64)
    for i in range(1 << length):
        for j in range(length):
            prog[j] = (i >> (length - 1 - j)) & 1
        st, sp, _ = simulate(prog, length, max_steps, trie, trie_out, roots, tab_bits, tab_off, out, ops, ra, ta)
        status[i] = st
        used[i] = sp


if USE_NUMBA:
    simulate = njit(cache=True)(_simulate_py)
    simulate_length = njit(cache=True)(_simulate_length_py)
else:
    simulate = _simulate_py
    simulate_length = _simulate_length_py
