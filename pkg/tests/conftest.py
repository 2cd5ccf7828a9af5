import numpy as np
import pytest

from prime_ldp import DcmmParams, build_omega, make_planted_b


def block_pi(n, K, n_pure_per_block, mixed_row=None):
    """Pure rows for the first K * n_pure_per_block nodes, ``mixed_row`` after."""
    pi = np.zeros((n, K))
    n_pure = K * n_pure_per_block
    pi[np.arange(n_pure), np.arange(n_pure) // n_pure_per_block] = 1.0
    if n_pure < n:
        row = np.full(K, 1.0 / K) if mixed_row is None else np.asarray(mixed_row, float)
        pi[n_pure:] = row
    return pi


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def planted_two_block():
    """Theta = I, 20 pure nodes per community plus 20 half/half rows, beta = 0.9."""
    pi = block_pi(60, 2, 20, [0.5, 0.5])
    params = DcmmParams(np.ones(60), pi, make_planted_b(2, 0.9))
    return params, build_omega(params)


# ---------------------------------------------------------------------------
# acceptance summary: one line per criterion in the terminal report
# ---------------------------------------------------------------------------

_ACCEPTANCE = {}
_STATUS = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): numbered acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        number, title = marker.args
        detail = dict(item.user_properties).get("detail", "")
        if rep.outcome == "skipped" and isinstance(rep.longrepr, tuple):
            detail = rep.longrepr[2]
        _ACCEPTANCE.setdefault(number, []).append((title, _STATUS[rep.outcome], detail))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        for title, status, detail in _ACCEPTANCE[number]:
            line = f"[{status}] {number:>2}. {title}"
            terminalreporter.write_line(f"{line}: {detail}" if detail else line)
