"""tincell - coverage, rate and optimal design of TIN-scheduled cellular networks."""

__version__ = "0.1.0"
__license__ = "MIT"

__all__ = [
    "__version__",
]
