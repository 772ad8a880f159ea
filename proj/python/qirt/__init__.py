"""Resource theories of quantum instruments: classification, distances, measures and free transformations."""

import json as _json

from ._qirt import *  # noqa: F401,F403
from ._qirt import cli as _cli


def run(*args):
    """Runs a command of the qirt tool and returns (exit code, parsed report or None, message)."""
    code, text, message = _cli([str(a) for a in args])
    return code, (_json.loads(text) if text else None), message
