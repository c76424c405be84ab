"""Open quantum system dynamics: states, channels, entanglement, Lindblad
semigroups, Markov approximations and atoms in thermal fields."""

__version__ = "0.1.0"

from .errors import NumericalError, OpenQSError, ValidationError  # noqa: E402

__all__ = ["__version__", "OpenQSError", "ValidationError", "NumericalError"]
