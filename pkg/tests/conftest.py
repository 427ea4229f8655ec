import functools
from pathlib import Path

import pytest

from superfedosov.fedosov import flat_connection
from superfedosov.specfile import load_spec

SPECS = Path(__file__).resolve().parent.parent / "specs"

# criterion number -> (passed, note); filled by test_acceptance
ACCEPTANCE = {}


@functools.lru_cache(maxsize=None)
def spec(name, degree=None):
    return load_spec(SPECS / f"{name}.spec", degree)


@functools.lru_cache(maxsize=None)
def connection(name, degree=None):
    return flat_connection(spec(name, degree))


@pytest.fixture
def specs_dir():
    return SPECS


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, note = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {note}")


from hypothesis import HealthCheck, settings  # noqa: E402

settings.register_profile(
    "repo", derandomize=True, max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("repo")
