"""Exception hierarchy shared by every module of the package."""


class LFWaveletError(Exception):
    """Base class for all errors raised by lfwavelet."""


class ParameterError(LFWaveletError, ValueError):
    """Field parameters are invalid, unsupported, or do not match."""


class DomainError(LFWaveletError, ValueError):
    """An argument lies outside the domain of an operation."""


class ResolutionError(LFWaveletError, ValueError):
    """A request cannot be represented exactly at the available resolution."""


class CertificateError(LFWaveletError):
    """A family has no zero-neighborhood vanishing certificate, so a dilation sum diverges."""


class ContractError(LFWaveletError):
    """A documented precondition (e.g. an orthonormal-basis gate) does not hold."""


class ConsistencyError(LFWaveletError):
    """An internal self-check failed after its preconditions were verified."""


class FormatError(LFWaveletError, ValueError):
    """A serialized file is malformed; the message names the offending field."""
