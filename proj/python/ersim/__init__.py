"""Monte Carlo simulation and analysis of single rare-earth ions in nanophotonic cavities."""

from ._ersim import *  # noqa: F401,F403
from ._ersim import __doc__  # noqa: F401

__version__ = "0.1.0"
