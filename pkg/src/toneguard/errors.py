"""Exception types shared across the package."""


class ToneguardError(Exception):
    """Base class for all errors raised by this package."""


class WavParseError(ToneguardError):
    """Malformed RIFF/WAVE container. ``offset`` is the byte position of the fault."""

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class UnsupportedFormatError(WavParseError):
    """Structurally valid WAV whose codec/layout we do not decode."""


class DomainError(ToneguardError):
    """Argument outside the operation's domain (bad frequency, range, center...)."""


class ContractError(ToneguardError):
    """Inputs that individually are fine but violate a cross-component contract
    (sample-rate mismatch, weighting mismatch, mixing overflow...)."""
