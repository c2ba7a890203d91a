import numpy as np
import pytest

from tcnmf.matrix import make_rng


@pytest.fixture
def rng():
    return make_rng(20240611)


def planted(seed, m=40, n=30, r=3, p=0.2):
    """Planted low-rank matrix and a salt-and-pepper corrupted copy."""
    from tcnmf import datagen

    v, _, _ = datagen.gen_lowrank(m, n, r, seed)
    spec = datagen.CorruptionSpec("salt-pepper", seed=seed + 1000, p=p, high=float(v.max()))
    return v, datagen.corrupt(v, spec)[0]


@pytest.fixture
def planted_pair():
    return planted


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = getattr(mod, "REPORT", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
