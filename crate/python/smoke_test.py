"""Build the extension module and exercise it from Python.

    python3 python/smoke_test.py
"""

import cmath
import importlib
import os
import shutil
import subprocess
import sys
import tempfile

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def build():
    subprocess.run(
        ["cargo", "build", "--release", "-p", "symtest-py", "--features", "extension-module"],
        cwd=ROOT,
        check=True,
    )
    lib_dir = os.path.join(ROOT, "target", "release")
    for name in ("libsymtest_py.so", "libsymtest_py.dylib", "symtest_py.dll"):
        src = os.path.join(lib_dir, name)
        if os.path.exists(src):
            out = tempfile.mkdtemp(prefix="symtest_py_")
            ext = ".pyd" if name.endswith(".dll") else ".so"
            shutil.copy(src, os.path.join(out, "symtest_py" + ext))
            return out
    raise SystemExit("built library not found in " + lib_dir)


def close(a, b, tol=1e-10):
    return abs(a - b) <= tol


def main():
    sys.path.insert(0, build())
    st = importlib.import_module("symtest_py")

    singlet = st.State.load("singlet")
    swap = st.Group.load("sym:2", singlet.dims)
    r = st.bose_acceptance(singlet, swap)
    assert close(r.simulated, 0.0) and r.abs_diff < 1e-10, r

    mixed = st.State([[0.5, 0], [0, 0.5]])
    rho4 = st.State([[0.25 if i == j else 0 for j in range(4)] for i in range(4)], [2, 2])
    r = st.bose_acceptance(rho4, st.Group.load("sym:2", rho4.dims))
    assert close(r.simulated, 0.75), r

    nmr = st.Hamiltonian.load("nmr:1,2,0.5")
    assert close(st.covariance_acceptance(nmr, st.Group.load("z2xz2-pauli"), 0.5).simulated, 1.0)
    assert st.covariance_acceptance(nmr, st.Group.load("d3-cnot-swap"), 0.5).simulated < 1.0

    t_gate = [[1, 0], [0, cmath.exp(1j * cmath.pi / 4)]]
    lhs, rhs = st.dqc1_check(t_gate)
    assert close(lhs, rhs), (lhs, rhs)

    assert close(st.separability_acceptance(mixed, 10), 11 / 1024)
    assert [st.gate_count("sym", k) for k in (2, 3, 4, 5)] == [1, 3, 6, 10]
    print(st.cycle_index("sym", 3))

    bell = st.State.load("bell")
    ext = st.Group.load("kext:2", bell.dims)
    best = st.max_symmetric_fidelity(bell, ext, mode="gbse", restarts=2, seed=1)
    assert abs(best.value - 0.75) < 1e-6, best

    try:
        st.State.load("no-such-state")
    except ValueError as e:
        print("rejected:", e)
    else:
        raise AssertionError("bad spec accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
