import numpy as np
import pytest
from hypothesis import settings

from femhd.mesh import PERIODIC, TRANSMISSIVE, build_grid

settings.register_profile("femhd", max_examples=25, deadline=None)
settings.load_profile("femhd")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def periodic_grid(n=(6, 5, 4), lengths=(1.0, 1.3, 0.7)):
    return build_grid(*n, lengths, PERIODIC)


def mixed_grid(n=(6, 5, 4), lengths=(1.0, 1.3, 0.7)):
    return build_grid(*n, lengths, (TRANSMISSIVE, PERIODIC, TRANSMISSIVE))


def rand_vec(rng, g):
    return rng.standard_normal((3,) + g.shape)


def rand_scalar(rng, g):
    return rng.standard_normal(g.shape)


def dense_matrix(apply, shape_in):
    """Assemble a linear map column by column (test-only oracle)."""
    n = int(np.prod(shape_in))
    cols = []
    for k in range(n):
        e = np.zeros(n)
        e[k] = 1.0
        cols.append(np.asarray(apply(e.reshape(shape_in))).ravel())
    return np.array(cols).T


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(results.items()):
            terminalreporter.write_line(line)
