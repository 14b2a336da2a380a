"""
Tree-projected gradient descent (tree-PGD)

Estimation of gradient-sparse (piecewise-constant) parameter vectors on graphs
by projecting gradient steps onto grid-valued, gradient-sparse vectors over
degree-capped spanning trees.
"""

__version__ = "1.0.0"

# Identifies how RNG streams are split; changes whenever the rule changes.
SEED_POLICY = "pcg64-seedsequence-spawnkey-v1"
