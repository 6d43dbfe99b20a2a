"""
lassodof: degrees of freedom of the Lasso, Stein unbiased risk estimate and its reliability.
"""
from .classes import *  # noqa: F401,F403
from .utils import *  # noqa: F401,F403

__version__ = '0.1.0'
