"""Plot u_k(t) from a `fracpseudo direct` output directory.

    fracpseudo direct --config configs/direct_bilaplacian.toml --out run
    python examples/plot_report.py run/report.csv --tag u --modes 1 2 3
"""
import argparse
import csv
from collections import defaultdict

import matplotlib.pyplot as plt

ap = argparse.ArgumentParser()
ap.add_argument("report")
ap.add_argument("--tag", default="u")
ap.add_argument("--modes", type=int, nargs="*", default=[1, 2, 3])
ap.add_argument("--save")
args = ap.parse_args()

series = defaultdict(list)
with open(args.report) as fh:
    for row in csv.DictReader(fh):
        if row["tag"] == args.tag:
            series[int(row["mode_index"])].append((float(row["time"]), float(row["value"])))

for k in args.modes:
    t, v = zip(*series[k])
    plt.plot(t, v, marker=".", label=f"k = {k}")
plt.xlabel("t")
plt.ylabel(f"{args.tag}_k(t)")
plt.legend()
if args.save:
    plt.savefig(args.save, dpi=150)
else:
    plt.show()
