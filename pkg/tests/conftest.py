import numpy as np
import pytest

from orderextend import ObservedMatrix, generate_low_rank, sample_random_mask


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def observed_instance(n1, n2, r, m, seed, noise=0.0):
    """Truth matrix and a uniformly sampled observation of ``m`` entries."""
    T = generate_low_rank(n1, n2, r, noise, seed)
    return T, ObservedMatrix.from_truth(T, sample_random_mask(n1, n2, m, seed))


# -- acceptance summary: one PASS/FAIL line per criterion ------------------

ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def criterion():
    def record(number: int, ok: bool, detail: str) -> bool:
        ACCEPTANCE[number] = (bool(ok), detail)
        print(f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}")
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}")
