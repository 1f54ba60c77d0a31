"""Conditioning of multivariate super-resolution: Python bindings of the C++ core."""

from ._core import *  # noqa: F401,F403
from ._core import (  # noqa: F401
    ConfigurationError,
    DomainError,
    Error,
    InfeasibleError,
    IoError,
    NumericalError,
    PreconditionError,
    SingularityError,
    TruncationError,
)

__version__ = "0.1.0"
