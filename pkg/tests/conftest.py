"""
Shared fixtures.
"""
import pytest

from anonhist.services.lowerbound_service import build_encoding_spec
from anonhist.utils.random_streams import SeededStream, ZeroStream


@pytest.fixture
def zero_stream():
    """Stream whose words all map to zero noise."""
    return ZeroStream()


@pytest.fixture
def seeded_stream():
    return SeededStream(seed=20240917)


@pytest.fixture(scope="session")
def small_spec():
    """L = 1, R = 9, m = 9: small enough for the exhaustive decoder."""
    return build_encoding_spec(10_000, 1_100)


@pytest.fixture(scope="session")
def large_spec():
    """L = 3, R = 10, m = 30."""
    return build_encoding_spec(10**6, 10**5)


@pytest.fixture
def partition_file(tmp_path):
    """Write a partition in the line format and return its path."""

    def _write(parts, name="input.txt"):
        path = tmp_path / name
        path.write_text("".join(f"{part}\n" for part in parts), encoding="utf-8")
        return str(path)

    return _write
