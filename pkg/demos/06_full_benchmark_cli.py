"""
The full pipeline through the command line
==========================================

Everything the library does is also reachable from the `imbench` command.
This script drives the CLI in process: generate a dataset, inspect it, run
a benchmark sweep from a JSON config, then turn the results into rank
statistics and a critical-difference diagram.
"""

import json
from pathlib import Path

from imbench.cli import main

out = Path("demo_out")
out.mkdir(exist_ok=True)
csv = str(out / "clinic.csv")

# 1. Generate an imbalanced dataset (CSV + column schema JSON).
main(["synth", "--out", csv, "--counts", "1500,400,80,20",
      "--features", "8", "--separation", "1.8", "--seed", "11"])

# 2. Inspect its label distribution.
main(["inspect", "--csv", csv, "--schema", csv + ".schema.json"])

# 3. Show the weighting schemes it implies.
main(["weights", "--csv", csv, "--schema", csv + ".schema.json"])

# 4. Benchmark two families x two weightings across a threshold ladder.
config = {
    "dataset": {"csv": csv, "schema": csv + ".schema.json"},
    "strategies": ["none", "effective"],
    "families": ["dt", "rf"],
    "n_runs": 3,
    "model_params": {"dt": {"max_depth": 8},
                     "rf": {"n_estimators": 12, "max_depth": 8}},
}
config_path = out / "bench.json"
config_path.write_text(json.dumps(config, indent=2), encoding="utf-8")
main(["bench", "--config", str(config_path),
      "--out", str(out / "results.csv"),
      "--summary-out", str(out / "summary.csv")])

# 5. Rank analysis over the result blocks.
main(["stats", "--results", str(out / "results.csv"),
      "--out-svg", str(out / "bench_cd.svg")])
