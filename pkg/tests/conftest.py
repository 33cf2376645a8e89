"""Shared fixtures: scenario files and the (expensive) reference fit."""

import math
import os

import pytest

DATA_DIR = os.path.join(os.path.dirname(__file__), "data")

ALPHA_02_DB_KM = 0.2 * math.log(10.0) / 10.0 / 1e3  # 0.2 dB/km in Np/m


@pytest.fixture(scope="session")
def data_dir():
    return DATA_DIR


@pytest.fixture(scope="session")
def reference_scenario():
    from ramangn import parse_scenario

    return parse_scenario(os.path.join(DATA_DIR, "reference_pumped.json"))


@pytest.fixture(scope="session")
def lumped_scenario():
    from ramangn import parse_scenario

    return parse_scenario(os.path.join(DATA_DIR, "lumped_9ch.json"))


@pytest.fixture(scope="session")
def minimal_scenario_path():
    return os.path.join(DATA_DIR, "minimal.json")


@pytest.fixture(scope="session")
def reference_fit(reference_scenario):
    """(evolution, fit) for the 40-channel pumped reference scenario.

    Session-scoped: the ODE solve plus the multistart fit is the most
    expensive shared setup in the suite.
    """
    from ramangn import fit_profile, solve_power_evolution

    evolution = solve_power_evolution(
        reference_scenario.link, steps=reference_scenario.solver_steps
    )
    fit = fit_profile(evolution, reference_scenario.link)
    return evolution, fit


@pytest.fixture(scope="session")
def fixed_params():
    """Hand-specified pumped profile parameters with a safe tilt range.

    All frozen oracle reference values in the suite were computed from
    these exact numbers.
    """
    from ramangn.profile import ProfileParams

    a = ALPHA_02_DB_KM
    return ProfileParams(
        alpha=a,
        c_f=2.0e-18,
        c_b=1.2e-18,
        alpha_f=1.1 * a,
        alpha_b=0.9 * a,
        p_f=0.04,
        p_b=0.6,
        f_hat=206.6e12,
    )


@pytest.fixture(scope="session")
def reference_span():
    from ramangn import FiberSpan

    return FiberSpan(
        length=80e3,
        beta2=-21.7e-27,
        beta3=0.14e-39,
        gamma=1.2e-3,
        attenuation=ALPHA_02_DB_KM,
        raman_slope=2.8e-17,
    )
