#!/usr/bin/env python3
"""Write classical modular polynomials Phi_l(X,Y) for primes l <= LMAX.

Output lines are "l i j c": c is the coefficient of X^i Y^j, only i >= j is
written (Phi_l is symmetric). Requires cypari2.
"""
import argparse
import sys

import cypari2


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--lmax", type=int, default=47)
    ap.add_argument("--out", default="-")
    args = ap.parse_args()
    pari = cypari2.Pari()
    pari.allocatemem(2 * 10**9)
    out = sys.stdout if args.out == "-" else open(args.out, "w")
    out.write("# classical modular polynomials: l i j c (coefficient of X^i Y^j, i >= j)\n")
    for l in pari.primes(pari.primepi(args.lmax)):
        l = int(l)
        phi = pari.polmodular(l)  # polynomial in x with coefficients in y
        for i in range(l + 2):
            ci = pari.polcoef(phi, i, "x")
            for j in range(i + 1):
                c = int(pari.polcoef(ci, j, "y"))
                if c != 0:
                    out.write(f"{l} {i} {j} {c}\n")
    if out is not sys.stdout:
        out.close()


if __name__ == "__main__":
    main()
