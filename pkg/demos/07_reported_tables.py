"""Reproducing the reported evaluation arithmetic at desk scale.

The headline accuracy percentages derive from plain fractions, and the
per-class precision/recall/F1 table derives from the symbol confusion
matrix; both derivations run here exactly.
"""

from pidgraph.metrics import percent, prf_from_confusion
from pidgraph.symbols import SYMBOL_CLASSES

FRACTIONS = [
    ("Pipeline-Code Detection", 64, 71),
    ("Pipeline Detection", 47, 72),
    ("Outlet Detection", 21, 21),
    ("Inlet Detection", 32, 32),
    ("Pipeline Code Association", 41, 64),
    ("Outlet Association", 14, 21),
    ("Inlet Association", 31, 32),
]

print("successful / total -> accuracy (half-up, 1 decimal)")
for title, s, t in FRACTIONS:
    print(f"  {title:28s} {s:3d} / {t:<3d} -> {percent(s, t)}%")

CONFUSION = [
    [74, 2, 0, 0, 0, 0, 0, 4, 0, 0, 0],
    [0, 64, 0, 0, 4, 0, 0, 0, 0, 0, 0],
    [0, 0, 25, 0, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 294, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 38, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 41, 0, 0, 0, 1, 0],
    [0, 0, 0, 0, 0, 8, 36, 0, 0, 3, 0],
    [5, 0, 0, 3, 0, 0, 0, 64, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 0, 261, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 0, 0, 52, 0],
    [0, 0, 3, 0, 0, 0, 0, 0, 4, 0, 149],
]

print("\nper-class measures from the confusion matrix")
print(f"  {'class':9s} {'precision':>9s} {'recall':>9s} {'f1':>7s}   (precision = diag/col, recall = diag/row)")
for cls, (p, r, f) in prf_from_confusion(CONFUSION, SYMBOL_CLASSES).items():
    print(f"  {cls:9s} {p:9.3f} {r:9.3f} {f:7.3f}")
