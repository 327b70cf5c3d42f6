"""Battery arbitrage RL toolkit: PPO training, backtesting, and the DP bound."""

from bessrl._core import *  # noqa: F401,F403
from bessrl._core import __doc__ as _core_doc  # noqa: F401

__version__ = "0.1.0"
