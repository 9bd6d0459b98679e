"""
Exception hierarchy for the ECG denoising library.
Every error raised on purpose by the library derives from EcgDenoiseError.
"""

from typing import Optional


class EcgDenoiseError(Exception):
    """Base class for all library errors."""


class InvalidSignal(EcgDenoiseError, ValueError):
    """A Signal was built from empty, non-finite or badly sampled data."""


class AllZeroSignal(EcgDenoiseError, ValueError):
    """An operation needs a signal with nonzero amplitude or power."""


class SignalTooShort(EcgDenoiseError, ValueError):
    """The signal has fewer samples than the operation needs."""


class LengthMismatch(EcgDenoiseError, ValueError):
    """Two sequences that must be aligned sample by sample differ in length."""


class ZeroDenominator(EcgDenoiseError, ArithmeticError):
    """The denoised signal equals the clean one exactly, SNR_imp is unbounded."""


class InvalidParameter(EcgDenoiseError, ValueError):
    """A tunable is outside its allowed range."""


class InvalidLevels(InvalidParameter):
    """Requested decomposition depth is not supported for the given length."""


class MatrixTooSmall(EcgDenoiseError, ValueError):
    """Matrix too small for the requested 2-D transform."""


class ShapeMismatch(EcgDenoiseError, ValueError):
    """Coefficient shapes disagree with their padding descriptor."""


class OutOfBounds(EcgDenoiseError, IndexError):
    """A block or patch would reach outside the signal."""


class DegenerateWindow(EcgDenoiseError):
    """A search window holds too few candidate blocks to learn a projection."""


class UncoveredSample(EcgDenoiseError, RuntimeError):
    """Aggregation finished with a sample that received no estimate."""


class ParseError(EcgDenoiseError, ValueError):
    """A record file could not be parsed."""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.line = line
        self.column = column
        where = []
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


class RaggedRows(ParseError):
    """A data row has a different number of fields than the header."""


class MissingSampleRate(ParseError):
    """A record file has no '# fs=<hz>' line and no override was given."""


class ReportIoError(EcgDenoiseError, OSError):
    """A report could not be written."""
