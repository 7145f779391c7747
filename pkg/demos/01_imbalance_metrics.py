"""
Quantifying class imbalance three ways
======================================

Three scalar views of a label distribution: the imbalance ratio (largest
class count over smallest), the coefficient of variation of class
frequencies, and normalized entropy (1 = perfectly balanced, 0 = one class
holds everything).  The script ends with a small sweep showing that the
entropy view moves opposite to the other two.
"""

import numpy as np

from imbench import (
    LabelDistribution,
    class_frequencies,
    imbalance_report,
    power_law_counts,
)

# A label vector as it would come out of a real dataset: class 0 dominates.
labels = np.repeat([0, 1, 2, 3], [900, 60, 30, 10])
dist = class_frequencies(labels)
report = imbalance_report(dist)

print("counts:           ", dist.counts.tolist())
print("frequencies:      ", np.round(dist.frequencies, 4).tolist())
print("imbalance ratio:   %.2f" % report.imbalance_ratio)
print("cvcf:              %.4f" % report.cvcf)
print("necd:              %.4f" % report.necd)

# The same metrics on a perfectly balanced distribution, for contrast.
balanced = imbalance_report(class_frequencies(np.repeat([0, 1, 2, 3], 250)))
print("\nbalanced baseline: ir=%.1f cvcf=%.1f necd=%.1f"
      % (balanced.imbalance_ratio, balanced.cvcf, balanced.necd))

# Dial skew with a power-law class-size profile and watch the three metrics.
# As the decay exponent grows, the ratio and dispersion climb while the
# normalized entropy falls -- they are inverse views of the same skew.
print("\n%6s  %10s  %8s  %8s" % ("gamma", "ir", "cvcf", "necd"))
for gamma in (0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0):
    counts = power_law_counts(5000, 8, gamma)
    r = imbalance_report(LabelDistribution(counts=np.asarray(counts)))
    print("%6.1f  %10.1f  %8.4f  %8.4f" % (gamma, r.imbalance_ratio, r.cvcf, r.necd))
