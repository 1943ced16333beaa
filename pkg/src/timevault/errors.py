"""Exception hierarchy shared across the package."""
from __future__ import annotations


class TimevaultError(Exception):
    """Base class for every error raised by this package."""


class CryptoError(TimevaultError):
    """Base class for primitive-level failures."""


class InvalidThreshold(CryptoError):
    """Secret-sharing parameters out of range (t < 1, n < t, or n >= field)."""


class DuplicateShareIndex(CryptoError):
    """Two shares with the same evaluation index were supplied."""


class InsufficientShares(CryptoError):
    """Fewer than t shares supplied to a restore."""


class DecryptionFailure(CryptoError):
    """Authenticated decryption failed (wrong key or tampered ciphertext).

    ``layer`` is the onion layer index that failed (outermost = 0) when the
    failure happened inside a layered unwrap, else None.
    """

    def __init__(self, message: str = "decryption failed", layer: int | None = None):
        super().__init__(message)
        self.layer = layer


class InsufficientKeys(CryptoError):
    """A layered unwrap was given fewer keys than the onion has layers."""


class MalformedSignature(CryptoError):
    """Signature components out of range or point recovery impossible."""


class InvalidProof(CryptoError):
    """A verifiable-randomness proof failed verification."""


class SerializationError(TimevaultError):
    """A frozen byte layout could not be parsed."""


class ChainError(TimevaultError):
    """A transaction was rejected before inclusion (bad signature, bad nonce,
    insufficient balance). No fee is charged and no trace record is written."""


class Revert(TimevaultError):
    """A contract rejected a call; state changes roll back, the fee stands.

    ``reason`` is a frozen short string asserted by tests.
    """

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


class SelectionError(TimevaultError):
    """Committee selection could not complete (registry exhausted or a bad
    index function)."""


class ConfigError(TimevaultError):
    """A scenario, gas-schedule, or economics config failed validation."""


class InjectionError(ConfigError):
    """A misbehavior injection references an unknown target or a bad phase."""
