#!/usr/bin/env python3
"""Flux-pair gate calculus over A5: the NOT gate, the exchange law on all
3600 flux pairs, and charge-zero invariance.  Equivalent CLI:

    ftqc fluxon-demo --seed 1 --exhaustive
"""

import sys

from ftqc.cli import main

if __name__ == "__main__":
    sys.exit(main(["fluxon-demo", "--seed", "1", "--exhaustive"]))
