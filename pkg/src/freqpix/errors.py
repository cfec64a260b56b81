"""Exception hierarchy shared by all freqpix modules."""


class FreqPixError(Exception):
    """Base class for every error raised by freqpix."""


class DimensionError(FreqPixError, ValueError):
    """Empty grids, mismatched shapes, or out-of-bounds regions."""


class ValidationError(FreqPixError, ValueError):
    """Non-finite values or values outside their allowed range."""


class LayoutError(FreqPixError, ValueError):
    """A spectrum was passed in the wrong layout (natural vs. centered)."""


class ResidueError(FreqPixError, ArithmeticError):
    """Imaginary residue of an inverse transform exceeded its ceiling."""


class ConfigError(FreqPixError, ValueError):
    """Malformed configuration, unknown key, or out-of-range value."""


class ManifestError(FreqPixError, ValueError):
    """Problems in a manifest file; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class FormatError(FreqPixError, ValueError):
    """Unsupported or corrupt image / tensor file."""


class NoCrossDomainCandidate(FreqPixError, LookupError):
    """No record in the pool satisfies the pairing strategy."""


class DiversityError(FreqPixError, ValueError):
    """Not enough classes, domains, or samples to run an experiment."""
