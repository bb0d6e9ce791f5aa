import numpy as np
import pytest
from scipy.stats import unitary_group

from lvqc.circuits import ParameterVector, trotter_params
from lvqc.costs import DenseObjective
from lvqc.lattice import build_heisenberg_afm
from lvqc.optimize import minimize
from lvqc.statevector import exact_evolution


def pytest_addoption(parser):
    parser.addoption("--run-extended", action="store_true", default=False,
                     help="run the hours-long large-scale checks")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--run-extended"):
        return
    skip = pytest.mark.skip(reason="extended suite; pass --run-extended to run it")
    for item in items:
        if "extended" in item.keywords:
            item.add_marker(skip)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def haar(n_qubits: int, seed) -> np.ndarray:
    return unitary_group.rvs(2 ** n_qubits, random_state=seed)


def random_shared(depth: int, rng, scale: float = 1.0) -> ParameterVector:
    return ParameterVector(scale * rng.normal(size=10 * depth), depth)


@pytest.fixture(scope="session")
def mini_compilation():
    """Heisenberg, tau = 0.5, L~ = 8, d = 3, dense central-site optimisation (shared by tests)."""
    Lt, d, tau = 8, 3, 0.5
    H = build_heisenberg_afm(Lt)
    objective = DenseObjective(exact_evolution(H, tau), Lt, d, site=Lt // 2)
    theta0 = trotter_params(tau, d)
    trace = minimize(objective, theta0)
    return {"Ltilde": Lt, "depth": d, "tau": tau, "trace": trace, "objective": objective,
            "theta_opt": trace.theta(), "theta0": theta0, "initial_cost": objective(theta0.angles)}


# ----------------------------------------------------------------------------
# acceptance summary: one line per acceptance test, printed after the run
# ----------------------------------------------------------------------------
_ACCEPTANCE = []


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        detail = dict(report.user_properties).get("detail", "")
        _ACCEPTANCE.append((report.nodeid.split("::")[-1], report.outcome, detail))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome, detail in _ACCEPTANCE:
        verdict = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[outcome]
        terminalreporter.write_line(f"{verdict}  {name}  {detail}")
