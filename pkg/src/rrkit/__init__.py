"""Random reductions, one-round approximate counting and an Arthur-Merlin
protocol simulator, at desk scale."""

__version__ = "0.1.0"

from .errors import ToolkitError  # noqa: F401
