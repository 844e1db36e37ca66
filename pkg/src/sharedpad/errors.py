"""Exception types shared across the package.

The CLI maps these onto process exit codes: ConfigError -> 2,
ProtocolError (and subclasses) -> 3. Everything else is a plain bug.
"""


class ConfigError(ValueError):
    """A session/mapping/assignment/policy configuration is invalid."""


class ProtocolError(ValueError):
    """A wire message or game-state payload violates the protocol."""


class SchemaError(ProtocolError):
    """Decoded payload does not match the game-state schema."""


class EncodingError(ProtocolError):
    """State cannot be encoded (non-finite or unnormalized fields)."""


class ReplayError(RuntimeError):
    """An input log is unusable for deterministic replay."""
