"""Smoke test for the Python bindings.

Builds the extension with cargo, copies it next to this script as
tracelab.so, then exercises the main entry points.
"""

import shutil
import subprocess
import sys
from fractions import Fraction
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
HERE = Path(__file__).resolve().parent


def build():
    subprocess.run(
        ["cargo", "build", "--release", "-p", "tracelab-py", "--features", "extension-module"],
        cwd=ROOT,
        check=True,
    )
    target = ROOT / "target" / "release"
    for name in ("libtracelab.so", "libtracelab.dylib"):
        if (target / name).exists():
            shutil.copy(target / name, HERE / "tracelab.so")
            return
    sys.exit("extension library not found under target/release")


def main():
    build()
    sys.path.insert(0, str(HERE))
    import tracelab

    holds, residual = tracelab.hc1_check("A2")
    assert holds and residual == "0", residual

    th = tracelab.theta(5, 1, 4)
    assert th["value"] == "4/5" and th["torus_class"] == "unramified_quad", th
    assert tracelab.theta(5, 0, 4)["value"] == "6/5"

    hat = tracelab.theta_hat_zero(7, 4)
    assert Fraction(hat["mass_at_one"]) == 1 - Fraction(1, 49)

    assert tracelab.transversal_lemma(11, 4)["passed"]
    row = tracelab.torus_breakdown(5)
    assert row["p"] == 5

    dom = tracelab.dominant_product(100, 1.0)
    assert Fraction(dom["exact_gap"]) == 0

    x = tracelab.PAdic(5, "1/25", 4)
    y = tracelab.PAdic(5, "3", 4)
    assert x.valuation == -2 and abs(x.norm() - 25.0) < 1e-12
    assert Fraction((x * y).to_fraction()) == Fraction(3, 25)
    assert x + y == tracelab.PAdic(5, "76/25", 4)
    assert tracelab.PAdic(5, "1", 6).torus_class() == "unramified_quad"

    b, ok = tracelab.getz_decompose("inf,2", 0.5, {11: ("1/11", 3), 3: ("7/9", 2)})
    assert ok and Fraction(b) == Fraction(86, 99), b

    rec = tracelab.poisson("inf,2", 1.0, {2: 1})
    assert abs(rec["lhs"] - rec["rhs"]) <= rec["tail_bound"], rec

    chi = tracelab.Character(3, "t^2+1", 1)
    assert not chi.is_trivial
    euler = chi.euler_coeffs(5)
    sums = chi.divisor_sums(5)
    assert all(abs(a[0] - s[0]) + abs(a[1] - s[1]) < 1e-9 for a, s in zip(euler, sums))
    assert chi.symmetric_power_check(6)["passed"]

    report = tracelab.verify_all([1, 3, 5])
    assert report["passed"], report
    for c in report["criteria"]:
        print(f"[{'PASS' if c['passed'] else 'FAIL'}] {c['id']:>2} {c['name']}")
    print("python smoke test OK")


if __name__ == "__main__":
    main()
