"""Exact micro-scale toolkit for smooth min-entropy and block-source condensers."""

__version__ = "0.1.0"

from .bitdist import Dist, FunctionTable  # noqa: E402,F401
from .blocks import BlockDist, BlockSpec  # noqa: E402,F401
from .entropy import min_entropy, smooth_min_entropy  # noqa: E402,F401
