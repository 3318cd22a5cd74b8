"""Social-navigation learning stack: oracle simulator, conditional neural
process planners, feed-forward baseline, and closed-loop evaluation."""

from . import cnp, config, data, evaluation, planners, sim
from .errors import SocnavError

__all__ = ["cnp", "config", "data", "evaluation", "planners", "sim", "SocnavError"]

__version__ = "0.1.0"
