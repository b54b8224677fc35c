"""
Exceptions raised by the synthesis library and the experiment harness.
"""


class AntsynthError(Exception):
    """Base class for every error raised on purpose."""


class InvalidInputError(AntsynthError, ValueError):
    """Bad arguments: dimension mismatch, out-of-range values, zero excitation."""


class InvalidConfigError(AntsynthError, ValueError):
    """Experiment configuration rejected; `key` names the offending entry."""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


class ConfigParseError(InvalidConfigError):
    """Configuration file is not well-formed; `line` is 1-based when known."""

    def __init__(self, message, line=None):
        super().__init__(message)
        self.line = line


class NoSideLobesError(AntsynthError):
    """Pattern has no local maximum outside the main lobe."""


class InfeasibleBridgeError(AntsynthError, ValueError):
    """The bridge would consume every forager."""


class DegenerateAnchorError(AntsynthError, ValueError):
    """Bridge anchors coincide, so the gap span is zero."""


class BridgeContractError(AntsynthError, RuntimeError):
    """A rejected bridge proposal was handed to the bridge builder."""


class OutputError(AntsynthError, OSError):
    """Artifacts could not be written."""
