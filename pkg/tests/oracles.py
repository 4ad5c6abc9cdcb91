"""Brute-force reference implementations shared by the test modules."""

import itertools

from symscan.linalg.gf2 import pack
from symscan.permutation import LabeledGraph, is_automorphism


def gf2_kernel_by_enumeration(m, ncols):
    """All x with m x = 0 over GF(2), as packed words, by walking every x."""
    # syndrome of x is the xor of the columns selected by x
    col = [pack([row[j] for row in m]) for j in range(ncols)]
    syn = [0] * (1 << ncols)
    kernel = {0}
    for x in range(1, 1 << ncols):
        low = (x & -x).bit_length() - 1
        syn[x] = syn[x & (x - 1)] ^ col[low]
        if syn[x] == 0:
            kernel.add(x)
    return kernel


def gf2_span(vectors):
    words = {0}
    for v in vectors:
        w = pack(v)
        words |= {x ^ w for x in words}
    return words


def brute_force_order(g: LabeledGraph, respect_labels=True) -> int:
    n = len(g.labels)
    if not respect_labels:
        return sum(is_automorphism(g, list(p)) for p in itertools.permutations(range(n)))
    classes: dict = {}
    for v, lab in enumerate(g.labels):
        classes.setdefault(lab, []).append(v)
    groups = list(classes.values())
    count = 0
    for choice in itertools.product(*(itertools.permutations(c) for c in groups)):
        perm = [0] * n
        for src, dst in zip(groups, choice):
            for a, b in zip(src, dst):
                perm[a] = b
        count += is_automorphism(g, perm)
    return count
