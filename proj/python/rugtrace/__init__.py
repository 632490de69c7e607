"""Python bindings for the rugtrace analysis core."""

import json

from ._core import (
    ConfigError,
    Error,
    IntegrityError,
    LoadError,
    MalformedEventError,
    NotFoundError,
    ParseError,
    TransportError,
    __version__,
    keccak256,
    profit_bounds,
    run_cli,
)
from ._core import Investigation as _Investigation

__all__ = [
    "ConfigError",
    "Error",
    "IntegrityError",
    "Investigation",
    "LoadError",
    "MalformedEventError",
    "NotFoundError",
    "ParseError",
    "TransportError",
    "__version__",
    "keccak256",
    "profit_bounds",
    "run_cli",
]


class Investigation:
    """A token analysed against a fixture bundle. Documents come back parsed,
    except markdown reports."""

    def __init__(self, fixtures, token, overrides=None):
        self._core = _Investigation(str(fixtures), token, json.dumps(overrides or {}))

    def timeline(self):
        return json.loads(self._core.timeline())

    def verdict(self):
        return json.loads(self._core.verdict())

    def attribution(self):
        return json.loads(self._core.attribution())

    def trace(self):
        return json.loads(self._core.trace())

    def report(self, format="json"):
        text = self._core.report(format)
        return json.loads(text) if format == "json" else text

    def victims(self):
        return self._core.victims()
