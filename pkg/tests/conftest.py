import numpy as np
import pytest

from deepcore.geometry import CenteredCloud, PointCloud, center

TRIANGLE = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, -1.0]])


def gaussian_cloud(seed, n, d, query=None):
    """Seeded standard-normal cloud centered at ``query`` (default: 0.3 * N(0, I))."""
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, d))
    z = 0.3 * rng.standard_normal(d) if query is None else np.asarray(query, dtype=float)
    return center(PointCloud(x), z)


@pytest.fixture
def triangle():
    return CenteredCloud(TRIANGLE, np.zeros(2))


def caratheodory_in_hull(rows, tol=1e-9):
    """Exhaustive reference: 0 in conv(rows) iff it is in the hull of some
    affinely independent subset of at most p + 1 rows."""
    import itertools

    rows = np.asarray(rows, dtype=float)
    m, p = rows.shape
    unit = rows / np.linalg.norm(rows, axis=1)[:, None]
    for k in range(1, min(m, p + 1) + 1):
        for subset in itertools.combinations(range(m), k):
            a = np.vstack([unit[list(subset)].T, np.ones(k)])
            rhs = np.zeros(p + 1)
            rhs[-1] = 1.0
            lam, *_ = np.linalg.lstsq(a, rhs, rcond=None)
            if np.max(np.abs(a @ lam - rhs)) < tol and lam.min() > -tol:
                return True
    return False


def feasibility_instance(seed):
    """Seeded (rows, m, p) with m <= 12, p <= 3; about half contain the origin."""
    rng = np.random.default_rng([6, seed])
    p = int(rng.integers(1, 4))
    m = int(rng.integers(1, 13))
    rows = rng.standard_normal((m, p)) + rng.uniform(0.0, 1.5) * rng.standard_normal(p)
    return rows


#: PASS/FAIL lines from the acceptance module, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
