"""Mean-variance frontiers, logistic-map dynamics and the pairwise stability screen.

Errors raise ``ChaosfolioError`` (a ``ValueError``) with ``args == (code, message)``.
"""

from ._chaosfolio import *  # noqa: F401,F403
from ._chaosfolio import ChaosfolioError  # noqa: F401

__version__ = "0.1.0"
