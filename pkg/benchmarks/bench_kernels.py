"""Compare the compiled and interpreted simulation kernels of the universal machine.

Each backend runs in its own process because the choice is made at import
time from AITTHERMO_DISABLE_NUMBA.  Both must report identical status and step
arrays; the timings exclude numba compilation (one warm-up call).

    python3 benchmarks/bench_kernels.py [--max-length 14] [--grant 256]
"""
import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import hashlib, json, sys, time
from aitthermo import _kernels as K
from aitthermo.machines import UniversalMachine
lmax, grant = int(sys.argv[1]), int(sys.argv[2])
U = UniversalMachine()
U.simulate_length(3, grant)  # warm-up / compile
h = hashlib.sha256()
t0 = time.perf_counter()
for n in range(1, lmax + 1):
    st, used = U.simulate_length(n, grant)
    h.update(st.tobytes()); h.update(used.tobytes())
dt = time.perf_counter() - t0
print(json.dumps({"numba": K.USE_NUMBA, "seconds": dt, "digest": h.hexdigest()}))
"""


def run(disable: bool, lmax: int, grant: int) -> dict:
    env = dict(os.environ, AITTHERMO_DISABLE_NUMBA="1" if disable else "0")
    out = subprocess.run([sys.executable, "-c", WORKER, str(lmax), str(grant)],
                         env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--max-length", type=int, default=14)
    ap.add_argument("--grant", type=int, default=256)
    a = ap.parse_args()
    fast = run(False, a.max_length, a.grant)
    slow = run(True, a.max_length, a.grant)
    progs = (1 << (a.max_length + 1)) - 2
    print(f"programs: {progs}  grant: {a.grant} steps")
    for r in (fast, slow):
        label = "numba" if r["numba"] else "python"
        print(f"{label:>7}: {r['seconds']:.3f} s")
    print(f"speedup: {slow['seconds'] / fast['seconds']:.1f}x")
    print("outputs agree" if fast["digest"] == slow["digest"] else "OUTPUTS DIFFER")
    return 0 if fast["digest"] == slow["digest"] else 1


if __name__ == "__main__":
    sys.exit(main())
