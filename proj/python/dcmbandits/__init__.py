"""Dependent click model bandits: simulation, KL-UCB policies, and a benchmark harness."""

from dcmbandits._core import *  # noqa: F401,F403
from dcmbandits._core import __version__  # noqa: F401
