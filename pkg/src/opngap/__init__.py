"""Certified verification and search toolkit for odd perfect numbers
carrying a common exponent on the non-Euler part.

Subpackage map:

- ``intervals``:   rational-endpoint interval arithmetic with certified
                   square roots, logarithms, arctangents and pi
- ``arith``:       exact primality, budgeted factoring, orders, sigma
- ``cyclotomic``:  cyclotomic integers, the two-class factorization of
                   Phi_l over a quadratic field, ratio window checks
- ``quadfield``:   quadratic field elements, fundamental units and
                   regulators, split prime ideals and valuations
- ``gap``:         root counting, gap principles for repeated prime parts,
                   the certified lower-bound chain
- ``opn``:         Euler-form numbers, the S/T/U partition and the
                   resulting bounds on the number of prime factors
- ``search``:      sharded, resumable search for Phi_l(x) = p^m * q
- ``cli``:         verify / search / report command line front end
"""

__version__ = "0.1.0"
