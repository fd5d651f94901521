import pytest

from ictgen.config import DEFAULTS
from ictgen.pairgen import generate_trace


class ScriptedStream:
    """Stand-in for RandomStream that replays fixed uniforms."""

    def __init__(self, uniforms):
        self._u = list(uniforms)
        self.used = 0

    def uniform(self):
        if self.used >= len(self._u):
            raise AssertionError("scripted stream exhausted")
        u = self._u[self.used]
        self.used += 1
        return u


@pytest.fixture
def scripted():
    return ScriptedStream


@pytest.fixture(scope="session")
def default_trace():
    trace, params = generate_trace(DEFAULTS.with_(seed=11))
    return trace, params
