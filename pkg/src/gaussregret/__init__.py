"""Minimax regret, redundancy and metric complexity of Gaussian location models.

Submodules: ``sets`` (constraint sets), ``intrinsic`` (intrinsic volumes and
Wills functional), ``regret`` (R*(A) estimators), ``complexity`` (local widths,
coverings, fixed points), ``coding`` (predictors and redundancy bounds),
``verify`` (randomized inequality checks) and ``cli``.
"""

from . import coding, complexity, intrinsic, regret, sets, verify
from .estimate import MCConfig, RegretEstimate
from .sets import load_spec, loads_spec

__version__ = "0.1.0"

__all__ = [
    "sets", "intrinsic", "regret", "complexity", "coding", "verify",
    "MCConfig", "RegretEstimate", "load_spec", "loads_spec", "__version__",
]
