#!/usr/bin/env python3
"""Recompute the hand-checkable constants used by the test suite.

Everything here is scalar arithmetic written independently of the package,
so the frozen expected values in tests/ can be audited in one place.
Run: python scripts/hand_values.py
"""

import math


def class_tfidf_example():
    # two classes: c0 = [apple apple banana], c1 = [banana cherry]
    tf = {("apple", 0): 2, ("banana", 0): 1, ("banana", 1): 1, ("cherry", 1): 1}
    tf_global = {"apple": 2, "banana": 2, "cherry": 1}
    total_words = 3 + 2
    A = total_words / 2
    print("== class-based TF-IDF example (A = %.4f) ==" % A)
    for (term, c), f in sorted(tf.items()):
        w = f * math.log(1.0 + A / tf_global[term])
        print(f"  W({term},c{c}) = {f} * ln(1 + {A}/{tf_global[term]}) = {w:.6f}")


def classic_tfidf_example():
    # docs: d0 = [a b], d1 = [a]; N = 2; df_a = 2, df_b = 1
    print("== classic TF-IDF example ==")
    print(f"  W(a,d0) = 1 * ln(2/2) = {1 * math.log(2 / 2):.6f}")
    print(f"  W(b,d0) = 1 * ln(2/1) = {1 * math.log(2 / 1):.6f}")


def npmi_toy():
    # four whole-document windows: {a,b}, {a,b}, {a}, {b}
    windows = [{"a", "b"}, {"a", "b"}, {"a"}, {"b"}]
    n = len(windows)
    pa = sum("a" in w for w in windows) / n
    pb = sum("b" in w for w in windows) / n
    pab = sum("a" in w and "b" in w for w in windows) / n
    eps = 1e-12
    npmi = math.log(pab / (pa * pb) + eps) / -math.log(pab + eps)
    print("== NPMI toy corpus ==")
    print(f"  P(a)={pa}, P(b)={pb}, P(ab)={pab} -> NPMI = {npmi:.6f}")


def diversity_case():
    # 3 topics of 5 words sharing {a,b,c,d} with distinct 5th words
    topics = [
        ["a", "b", "c", "d", "e1"],
        ["a", "b", "c", "d", "e2"],
        ["a", "b", "c", "d", "e3"],
    ]
    union = set().union(*topics)
    td = len(union) / sum(len(t) for t in topics)
    print("== topic diversity 7/15 case ==")
    print(f"  |union| = {len(union)}, total = {sum(len(t) for t in topics)}, TD = {td:.9f}")


def smoothing_example():
    prev = [1.0, 1.0]
    curr = [3.0, 1.0]
    norm_prev = [v / sum(prev) for v in prev]
    norm_curr = [v / sum(curr) for v in curr]
    smoothed = [(p + c) / 2 for p, c in zip(norm_prev, norm_curr)]
    print("== evolution smoothing example ==")
    print(f"  normalized t-1 = {norm_prev}, t = {norm_curr}, smoothed = {smoothed}")


def timestep_weight_example():
    # topic c0 has banana count 3 in one bin; global tf_banana = 2, A = 2.5
    w = 3 * math.log(1.0 + 2.5 / 2.0)
    print("== per-timestep weight example ==")
    print(f"  W = 3 * ln(1 + 2.5/2) = {w:.6f}")


def pca_collinear():
    pts = [(0.0, 0.0), (1.0, 1.0), (2.0, 2.0)]
    mx = sum(p[0] for p in pts) / 3
    my = sum(p[1] for p in pts) / 3
    centered = [(x - mx, y - my) for x, y in pts]
    # principal axis is (1/sqrt2, 1/sqrt2); project
    s = 1 / math.sqrt(2)
    coords = [x * s + y * s for x, y in centered]
    print("== PCA collinear projection ==")
    print(f"  coords = {[round(c, 6) for c in coords]} (expected -sqrt2, 0, sqrt2)")


def binning_example():
    ts = [0, 5, 10]
    lo, hi, nbins = min(ts), max(ts), 2
    bins = [min((t - lo) * nbins // (hi - lo), nbins - 1) for t in ts]
    print("== timestamp binning example ==")
    print(f"  timestamps {ts} with 2 bins -> {bins}")


if __name__ == "__main__":
    class_tfidf_example()
    classic_tfidf_example()
    npmi_toy()
    diversity_case()
    smoothing_example()
    timestep_weight_example()
    pca_collinear()
    binning_example()
