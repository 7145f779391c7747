"""
Comparing classifiers with rank statistics
==========================================

Given a complete block design (every classifier scored on every block), the
Friedman test asks whether the treatments differ at all; pairwise Wilcoxon
signed-rank tests with Holm correction say which pairs differ; and maximal
cliques of not-significantly-different treatments become the bars of a
critical-difference diagram.
"""

from pathlib import Path

import numpy as np

from imbench import BlockMatrix, rank_analysis, render_cd, render_cd_text

# A synthetic block table: 20 blocks, five classifiers.  Two of them ("tuned"
# and "tuned-clone") are the same method, two more are mild variations, and
# one lags behind by construction.
rng = np.random.default_rng(4)
blocks = 20
base = rng.uniform(0.6, 0.9, size=blocks)
tuned = np.clip(base + 0.05 + rng.normal(0, 0.01, blocks), 0, 1)
values = np.column_stack([
    tuned,
    tuned,                                                  # exact duplicate
    np.clip(base + 0.04 + rng.normal(0, 0.01, blocks), 0, 1),
    np.clip(base + rng.normal(0, 0.01, blocks), 0, 1),
    np.clip(base - 0.10 + rng.normal(0, 0.01, blocks), 0, 1),
])
matrix = BlockMatrix(
    values=values,
    treatments=("tuned", "tuned-clone", "variant", "baseline", "weak"),
    blocks=tuple("block%02d" % i for i in range(blocks)),
)

analysis = rank_analysis(matrix, alpha=0.05)
print(render_cd_text(analysis))

print("pairwise table (Holm-adjusted):")
for p in analysis.pairwise:
    verdict = "different" if p.p_adjusted < 0.05 else "indistinguishable"
    print("  %-11s vs %-11s  W=%6.1f  adj p=%8.4g  -> %s" % (
        p.treatment_a, p.treatment_b, p.statistic, p.p_adjusted, verdict))

out = Path("demo_out")
out.mkdir(exist_ok=True)
render_cd(analysis, out / "cd.svg")
print("\ncritical-difference diagram ->", out / "cd.svg")
