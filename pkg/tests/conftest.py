import itertools

import pytest

from weakrand import _backend, coding, complexity, normality
from weakrand.bitseq import BitString

ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture(params=sorted(_backend.BACKENDS))
def backend(request, monkeypatch):
    """Run the test once per available kernel backend."""
    mod = _backend.BACKENDS[request.param]
    for m in (coding, complexity, normality):
        monkeypatch.setattr(m, "kernels", mod)
    return request.param


def all_words(n):
    for bits in itertools.product(b"\x00\x01", repeat=n):
        yield BitString._trusted(bytes(bits))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[num]
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
