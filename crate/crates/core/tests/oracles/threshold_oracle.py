#!/usr/bin/env python3
"""Exact-rational threshold tables, used as a frozen test oracle.

Every probability is an exact fraction of big integers; the flip rule is
decided by cross-multiplied integer comparisons, so no rounding enters the
thresholds. Usage:

    python3 threshold_oracle.py p n0 dv m0,m1,... t delta > out.json
"""
import json
import sys
from fractions import Fraction

from gmpy2 import comb, mpz


def parity_sums(population, marked, draws):
    """(#draws-subsets hitting an odd / even number of marked items, total)."""
    odd = even = mpz(0)
    for j in range(0, min(marked, draws) + 1):
        rest = draws - j
        if rest > population - marked:
            continue
        c = comb(marked, j) * comb(population - marked, rest)
        if j % 2:
            odd += c
        else:
            even += c
    return odd, even, comb(population, draws)


def table(p, n0, dv, m_vec, t, delta):
    n = n0 * p
    m = sum(m_vec)
    big_m = m * dv
    col = n0 * dv
    delta = Fraction(delta)
    rows = []
    for j in range(t + 1):
        tp = j * m
        # Per-check probabilities evaluated at the expanded weight.
        ci_odd, ci_even, ci_den = parity_sums(n - 1, col - 1, tp)
        if tp == 0:
            ic_odd, ic_even, ic_den = mpz(1), mpz(0), mpz(1)
        else:
            ic_odd, ic_even, ic_den = parity_sums(n - 1, col - 1, tp - 1)
        p_ci = Fraction(int(ci_odd), int(ci_den))
        p_ic = Fraction(int(ic_even), int(ic_den))
        w = p * (Fraction(tp, n) * p_ic + (1 - Fraction(tp, n)) * p_ci) if tp else Fraction(0)

        def flips(rho):
            # (n - j)/j * (pci/pic)^rho * (qci/qic)^(M - rho) < 1/(1 + delta), cross-multiplied.
            lhs = (n - j) * (delta.denominator + delta.numerator)
            lhs *= ci_odd**rho * ci_even ** (big_m - rho) * ic_den**big_m
            rhs = j * delta.denominator * ic_even**rho * ic_odd ** (big_m - rho) * ci_den**big_m
            return lhs < rhs

        if j == 0:
            b = big_m
        else:
            # The odds fall monotonically in rho; binary search for the first flip.
            lo, hi = 0, big_m + 1
            while lo < hi:
                mid = (lo + hi) // 2
                if flips(mid):
                    hi = mid
                else:
                    lo = mid + 1
            b = lo if lo <= big_m else big_m
        rows.append({"errors": j, "expected_weight": [w.numerator, w.denominator], "raw": b})
    low = min(r["raw"] for r in rows)
    last = max(i for i, r in enumerate(rows) if r["raw"] == low)
    for i, r in enumerate(rows):
        r["threshold"] = low if i < last else r["raw"]
        num, den = r["expected_weight"]
        micro = (num * 10**6 * 2 + den) // (2 * den)
        r["expected_weight"] = f"{micro // 10**6}.{micro % 10**6:06d}"
    return rows


def main():
    p, n0, dv = int(sys.argv[1]), int(sys.argv[2]), int(sys.argv[3])
    m_vec = [int(x) for x in sys.argv[4].split(",")]
    t, delta = int(sys.argv[5]), sys.argv[6]
    out = {"p": p, "n0": n0, "dv": dv, "m_vec": m_vec, "t": t, "delta": delta,
           "entries": table(p, n0, dv, m_vec, t, delta)}
    json.dump(out, sys.stdout, indent=1)
    print()


if __name__ == "__main__":
    main()
