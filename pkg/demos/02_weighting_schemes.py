"""
Class-weighting schemes side by side
====================================

Four ways to set per-class loss weights on a skewed label distribution:
no weighting, inverse frequency, effective number of samples, and
median-frequency balancing.  All of them give the rarest class the largest
weight; they differ in how aggressively they do it.
"""

import numpy as np

from imbench import STRATEGIES, class_frequencies, compute_weights

labels = np.repeat([0, 1, 2, 3], [9000, 700, 250, 50])
dist = class_frequencies(labels)

print("counts:", dist.counts.tolist())
print()
header = "%8s" % "class"
for name in STRATEGIES:
    header += "  %10s" % name
print(header)
schemes = {name: compute_weights(dist, name).weights for name in STRATEGIES}
for row in range(dist.n_classes):
    line = "%8d" % row
    for name in STRATEGIES:
        line += "  %10.4f" % schemes[name][row]
    print(line)

# Inverse weighting keeps the weighted sample mass equal to the raw count:
inverse = schemes["inverse"]
print("\nsum(w_k * n_k) = %.1f  (= n = %d)" % (np.dot(inverse, dist.counts), dist.total))

# The effective-number scheme saturates: once a class has "enough" samples,
# more of them barely change its weight.  beta controls where saturation
# kicks in; beta -> 1 recovers inverse weighting, beta = 0 switches it off.
print("\n%8s  %s" % ("beta", "weights"))
for beta in (0.0, 0.99, 0.999, 0.9999, 0.999999):
    w = compute_weights(dist, "effective", beta=beta).weights
    print("%8.6g  %s" % (beta, np.round(w, 4).tolist()))
