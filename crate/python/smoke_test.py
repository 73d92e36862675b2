"""Smoke test for the Python bindings.

Build the extension and put it on the path first, e.g.

    cargo build --release -p twistmoments-py --features extension-module
    cp target/release/libtwistmoments_py.so python/twistmoments_py.so
    python3 python/smoke_test.py
"""

import math
import os
import sys
from fractions import Fraction

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import twistmoments_py as tm


def main():
    assert tm.kronecker(5, 3) == -1
    assert tm.factor(360) == [(2, 3), (3, 2), (5, 1)]
    assert tm.fundamental_discriminants(1, 30) == [1, 5, 13, 17, 21, 29]
    assert abs(tm.kloosterman(1, 1, 3) + 1.0) < 1e-12

    s = tm.twisted_kloosterman_sum(3, 3, 1, 1, 1)
    assert abs(s - (-3.0)) < 1e-9, s
    assert tm.twisted_kloosterman_sum(3, 6, 1, 1, 1, closed_form=True) == -6.0

    assert [tm.chebyshev_h(3, c) for c in range(4)] == [0, 2, 0, 1]
    tau = tm.ramanujan_tau(12)
    assert tau[1:6] == [1, -24, 252, -1472, 4830]

    assert abs(tm.afe_weight(6, 1e-6) - 1.0) < 0.01
    assert abs(tm.afe_weight(6, 1.0) - tm.afe_weight(6, 1.0, sigma=2.0)) < 1e-6

    cv = tm.central_value(5)
    assert cv["value"] > 0 and cv["d"] == 5, cv

    grid = tm.petersson_grid(size=4)
    assert grid["max_residual"] < 1e-8 and len(grid["cells"]) == 16

    rep = tm.density_check(1, 1, 20000.0)
    assert abs(rep["fitted_constant"] - 4 / math.pi**2) < 0.01, rep

    primes, thetas = tm.sato_tate_sample(7, 100)
    assert primes[:3] == [2, 3, 5] and all(0 < t < math.pi for t in thetas)
    assert tm.sato_tate_sample(7, 100) == (primes, thetas)

    assert Fraction(tm.exact_expectation([5, 5, 5, 5])) == 2
    assert Fraction(tm.exact_expectation([3, 5])) == 0

    assert tm.sign_change_detect([(0, 1.0), (1, -1.0)], 0.0, 1.0) == (True, 2.0)
    assert not tm.sign_change_detect([(0, 1.0), (1, 3.0)], 0.0, 1.0)[0]

    try:
        tm.kloosterman(1, 1, 0)
    except ValueError:
        pass
    else:
        raise AssertionError("c = 0 accepted")

    print("smoke test passed, version", tm.__version__)


if __name__ == "__main__":
    main()
