"""groupforge: finite-scale machinery for towers of group extensions.

Subpackages by layer: `words` (syllable words), `fingrp` (finite groups and
their homomorphism search), `amalgam` (amalgamated products and stable-letter
extensions with normal forms), `smallcancel` (metric relator systems and the
rewriting word-problem solver), `universe` (addressed approximation poset).
The `forge` command line front end lives in `cli`.
"""

__version__ = "0.1.0"
