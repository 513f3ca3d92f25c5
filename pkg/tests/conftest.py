import numpy as np
import pytest
from scipy.linalg import expm
from scipy.special import gammainc

from coldstandby.model import build_generator

_ACCEPTANCE = []


def dense_expm_row(params, times):
    """Oracle: first row of exp(Q t) for the full generator by scaling and squaring."""
    q = build_generator(params).matrix()
    return np.array([expm(q * t)[0] for t in times])


def erlang_cdf(n, lam, t):
    return gammainc(n, lam * np.asarray(t, dtype=float))


@pytest.fixture
def measured(request):
    """Attach measured quantities to an acceptance test's report line."""
    values = {}
    request.node.user_properties.append(("measured", values))
    return values


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if item.module.__name__.endswith("test_acceptance") and (report.when == "call" or report.failed):
        doc = (item.function.__doc__ or item.name).strip().splitlines()[0]
        values = dict(item.user_properties).get("measured", {})
        detail = ", ".join(f"{k}={v:.3g}" if isinstance(v, float) else f"{k}={v}" for k, v in values.items())
        status = "PASS" if report.passed else "FAIL"
        _ACCEPTANCE.append(f"{status}  {doc}" + (f"  [{detail}]" if detail else ""))


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)
