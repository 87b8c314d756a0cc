"""Dissimilarity between two cluster configurations of one object set.

Per-cluster dissimilarity is Jaccard distance on member sets. Two
aggregations are offered:

* best_match (default): for each cluster of the first configuration take
  the minimum distance to any cluster of the second, sum, and scale by
  K/(K^2 - 1) with K the first configuration's cluster count (scale 1
  when K = 1). Directional: computed current -> representative in the
  state pipeline.
* index_paired: pair clusters by equal label index (a label missing on
  one side scores distance 1), round each pairwise distance to 2 decimal
  places, sum and apply the same scale. The rounding reproduces the
  printed worked-example arithmetic this mode exists to stay compatible
  with; prefer best_match for anything new.
"""

from __future__ import annotations

from enum import Enum

from lobstates.clustering import ClusterConfiguration


class DistanceMode(Enum):
    BEST_MATCH = "best_match"
    INDEX_PAIRED = "index_paired"


def set_distance(a: frozenset | set, b: frozenset | set) -> float:
    """Jaccard distance 1 - |a & b| / |a | b| in [0, 1]."""
    union = len(a | b)
    if union == 0:
        return 0.0
    return 1.0 - len(a & b) / union


def config_distance(c1: ClusterConfiguration, c2: ClusterConfiguration,
                    mode: DistanceMode = DistanceMode.BEST_MATCH) -> float:
    """Configuration distance under the chosen aggregation mode."""
    if c1.n_objects != c2.n_objects:
        raise ValueError("configurations cover different object counts")
    sets1 = c1.member_sets()
    sets2 = c2.member_sets()
    k = len(sets1)
    scale = 1.0 if k == 1 else k / (k * k - 1.0)

    if mode is DistanceMode.BEST_MATCH:
        total = sum(min(set_distance(s, t) for t in sets2.values())
                    for s in sets1.values())
    else:
        labels = set(sets1) | set(sets2)
        total = 0.0
        for lab in labels:
            if lab in sets1 and lab in sets2:
                d = set_distance(sets1[lab], sets2[lab])
            else:
                d = 1.0
            total += round(d, 2)
    return scale * total
