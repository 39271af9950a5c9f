"""Sparsity patterns, the rounding step, and warm starts.

Shows the two pattern kinds (global unstructured fraction, n:m groups per
row), how rounding zeroes the smallest magnitudes without touching the
survivors, and how magnitude and activation-weighted (wanda-style) warm
starts pick different masks once feature scales differ.

Run:  python demos/02_patterns_and_warm_starts.py
"""

import numpy as np

from lassoprune import (
    SemiStructured,
    Unstructured,
    parse_pattern,
    round_to_pattern,
    satisfies_pattern,
    sparsity_of,
    warm_start,
)

rng = np.random.default_rng(21)

w = np.round(rng.standard_normal((2, 8)) * 3, 1)
print("weights:")
print(w)

print()
print("unstructured 50% (global smallest magnitudes):")
half = round_to_pattern(w, Unstructured(0.5))
print(half)
print(f"  sparsity {sparsity_of(half):.0%}, satisfies: {satisfies_pattern(half, Unstructured(0.5))}")

print()
print("semi-structured 2:4 (two zeros in every group of four, per row):")
grouped = round_to_pattern(w, SemiStructured(2, 4))
print(grouped)
print(f"  sparsity {sparsity_of(grouped):.0%}, satisfies: {satisfies_pattern(grouped, SemiStructured(2, 4))}")

print()
print("pattern strings parse the same way the CLI flags do:")
for text in ("unstructured:0.35", "semi:2:4"):
    print(f"  {text!r} -> {parse_pattern(text)}")

print()
print("warm starts: magnitude ignores the data, wanda weighs each column of")
print("weights by how strongly its input feature actually fires.")
acts = rng.standard_normal((8, 32))
acts[2] *= 12.0  # feature 2 fires an order of magnitude harder
mag = warm_start("magnitude", w, acts, SemiStructured(2, 4))
wan = warm_start("wanda", w, acts, SemiStructured(2, 4))
print(" magnitude mask (column 2 treated like any other):")
print((mag != 0).astype(int))
print(" wanda mask (column 2 protected by its activation norm):")
print((wan != 0).astype(int))
