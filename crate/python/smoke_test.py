"""Smoke test for the fermat_bias extension module.

Build the module first, either with `maturin develop -m crates/py/Cargo.toml`
or with `cargo build -p fermat-bias-py` and then copying
target/debug/libfermat_bias_py.so to python/fermat_bias.so.
"""

import cmath
import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import fermat_bias as fb


def check(cond, what):
    if not cond:
        raise SystemExit(f"FAIL {what}")
    print(f"ok   {what}")


def main():
    z = fb.CycInt.zeta(5, 1)
    check((z ** 5).as_integer() == 1, "zeta^5 = 1")
    check(z.galois(2) == z * z, "sigma_2 zeta = zeta^2")
    check(abs(z.embed() - cmath.exp(2j * math.pi / 5)) < 1e-12, "embedding of zeta")

    j = fb.jacobi_sum(7, 3, 1, 1)
    check(j.abs_square().as_integer() == 7, "|J|^2 = p at p = 7, l = 3")
    sums = fb.jacobi_sums(11, 5)
    check(all(v.abs_square().as_integer() == 11 for v in sums.values()), "|J|^2 = p for every sum above 11")

    fermat = fb.Curve.fermat(3)
    check(fermat.genus == 1, "genus of x^3 + y^3 = 1")
    for p in [7, 13, 19, 31]:
        check(fermat.count_points(p) == p + 1 - fermat.ap(p), f"point count matches a_p at p = {p}")
    check(fermat.local_factor_over_q(5) == [1, 0, 5], "local factor at an inert prime")

    q = fb.Curve.quotient(5, 1)
    factors = q.local_factors_over_f(11)
    check(len(factors) == 4, "four primes above 11 at l = 5")

    level = fb.Level(3, 5000)
    xs = [x for x, _ in level.bias_sum(fermat)]
    check(xs[-1] == 5000.0, "bias sum reaches x_max")
    check(abs(level.euler_product(fermat, 0.5, 4.0) - 4 / 9) < 1e-14, "Euler product at x = 4")
    d = level.decomposition(fermat, 4.0)
    check(abs(d["term_i"] + 1) < 1e-12, "term I at x = 4")
    total = d["term_i"] + d["term_ii"] + d["term_iii"]
    check(abs(total - d["neg_log_product"]) < 1e-9, "decomposition identity at x = 4")
    report = level.verify()
    check(all(failures == 0 for _, failures, _ in report.values()), "every invariant family passes")
    check(fb.expected_slope(fermat) == 0.5, "expected slope for l = 3")
    print("smoke test passed")


if __name__ == "__main__":
    main()
