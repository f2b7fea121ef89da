"""Drive the command-line verbs from Python: validate, sweep, export plot data.

The same steps from a shell:
    grank validate src/grank/data/pandacd_synthetic.psv
    grank sweep --scenarios baseline targeted_sybil --F-values 0 1 --seeds 0 --out runs
    grank export-plots runs/index.json --out runs/plots.csv

Run: python3 demos/05_cli_pipeline.py [output-dir]
"""

import csv
import sys
from collections import Counter
from pathlib import Path

from grank.catalog import fixture_path
from grank.cli import main

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo-runs")
small = ["--n_nodes", "20", "--total_ticks", "1000", "--bootstrap_tick", "250",
         "--attack_tick", "500"]

main(["validate", str(fixture_path())])
main(["sweep", "--scenarios", "baseline", "targeted_sybil", "--F-values", "0", "1",
      "--seeds", "0", *small, "--out", str(out)])
main(["export-plots", str(out / "index.json"), "--out", str(out / "plots.csv")])

with open(out / "plots.csv") as fh:
    counts = Counter(row["figure"] for row in csv.DictReader(fh))
for fig, n in sorted(counts.items()):
    print(f"  {fig}: {n} points")
