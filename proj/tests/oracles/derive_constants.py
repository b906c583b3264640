"""High-precision reference values baked into the C++ tests.

Run with `python3 tests/oracles/derive_constants.py`; needs mpmath.
"""
from fractions import Fraction
from itertools import product

import mpmath as mp

mp.mp.dps = 50


def kappa_star(r):
    g = (r - 1) / mp.log(r)
    return 1 / (1 + g * (mp.log(g) - 1))


def lambda_star(r):
    g = (r - 1) / mp.log(r)
    return mp.log(g) / mp.log(r)


def f_lambda(r, lam):
    return (lam * r + (1 - lam) - r**lam) / (r + 1)


def zero_schedule_errors(a, b, horizon):
    """E_t under theta = 1 with no revealers, by brute force over signals."""
    maj, mnr = Fraction(a, a + b), Fraction(b, a + b)
    errors = []
    for t in range(1, horizon + 1):
        wrong = Fraction(0)
        for signals in product((1, 2), repeat=t):
            prob = Fraction(1)
            for x in signals:
                prob *= maj if x == 1 else mnr
            # net count of signal-following steps; a cascade starts at |d| >= 2
            d = 0
            action = None
            for x in signals:
                if d >= 2:
                    action = 1
                elif d <= -2:
                    action = 2
                else:
                    action = x
                    d += 1 if x == 1 else -1
            if action == 2:
                wrong += prob
        errors.append(wrong)
    return errors


if __name__ == "__main__":
    r = mp.mpf(2)
    k = kappa_star(r)
    lam = lambda_star(r)
    print("kappa_star(2,1)   =", mp.nstr(k, 20))
    print("lambda_star(2,1)  =", mp.nstr(lam, 20))
    print("f(lambda_star)    =", mp.nstr(f_lambda(r, lam), 20))
    print("1/(3 kappa_star)  =", mp.nstr(1 / (3 * k), 20))
    print("kappa_star(10,1)  =", mp.nstr(kappa_star(mp.mpf(10)), 20))
    print("optimal scale     =", mp.nstr(mp.mpf("1.1") * 3 * k, 20))
    print("p_1e6             =", mp.nstr(mp.mpf("1.1") * 3 * k / 10**6, 20))
    print("2 sqrt2 / 3       =", mp.nstr(2 * mp.sqrt(2) / 3, 20))
    print("1 - 1/e           =", mp.nstr(1 - mp.e**-1, 20))
    print("zero-schedule E_t =", [str(e) for e in zero_schedule_errors(2, 1, 5)])
