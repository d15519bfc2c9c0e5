import pytest
from builders import REF_RADIUS, reference_orbit, sphere_at

from pair_radiance.sources import BinaryConfig


@pytest.fixture
def ref_binary():
    return BinaryConfig(reference_orbit(), a1=REF_RADIUS, a2=REF_RADIUS)


@pytest.fixture
def ref_dielectric_binary():
    return BinaryConfig(reference_orbit(mu=0.4), a1=2e7, a2=REF_RADIUS, kappa1=-0.5, kappa2=-0.2)


@pytest.fixture
def small_sphere():
    return sphere_at(1e-2)


_ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL line per acceptance criterion, then assert it.

    ``report(n, checks, elapsed, budget)`` takes a mapping of sub-check
    name to (passed, measured value); the runtime budget is one more check.
    """
    lines = request.config.stash.setdefault(_ACCEPTANCE_KEY, [])

    def report(n, checks, elapsed, budget):
        checks = dict(checks)
        checks["runtime"] = (elapsed < budget, f"{elapsed:.3g} s < {budget:g} s")
        failed = [k for k, (ok, _) in checks.items() if not ok]
        detail = "; ".join(f"{k}={v}{'' if ok else ' [FAIL]'}" for k, (ok, v) in checks.items())
        line = f"criterion {n:2d}: {'FAIL' if failed else 'PASS'}  {detail}"
        lines.append(line)
        print(line)
        assert not failed, f"criterion {n} failed: {', '.join(failed)}"

    return report


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
