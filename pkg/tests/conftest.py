import numpy as np
import pytest

_CRITERIA = {}


def record_criterion(number: int, name: str, passed: bool, detail: str = "") -> None:
    _CRITERIA[number] = (name, passed, detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        name, passed, detail = _CRITERIA[number]
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {number:2d} [{status}] {name}: {detail}")


def dense_norm(points, w, center):
    xc = np.asarray(points, dtype=float) - np.asarray(center, dtype=float)
    m = xc.T @ (np.asarray(w, dtype=float)[:, None] * xc)
    return float(np.linalg.eigvalsh((m + m.T) / 2)[-1])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
