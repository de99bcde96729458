import re

import pytest

from galspin import closed_forms
from galspin.form_factors import FormFactor, norm_sq_integral
from galspin.spinor_algebra import SpinLabel
from galspin.two_body import ModelParams

FAMILIES = ("sharp", "gauss", "rational")

# filled by test_acceptance.py, printed once at the end of the session
CRITERION_LINES: dict = {}


def sharp_at_kappa(kappa, cutoff=1.0, m=1.0, two_s=1):
    """Sharp-cutoff parameters whose bound state sits at Omega = -kappa^2/m."""
    lam_eff = closed_forms.coupling_for_kappa(cutoff, m, kappa)
    return ModelParams(m, 1.0, SpinLabel(two_s), FormFactor("sharp", cutoff)).with_lambda_eff(lam_eff)


def at_strength(family, strength, cutoff=1.0, m=1.0, two_s=1):
    """lambda_eff = strength x the critical coupling 3 / (m int d^3p/(2pi)^3 |f|^2)."""
    ff = FormFactor(family, cutoff)
    lam_eff = strength * 3.0 / (m * norm_sq_integral(ff))
    return ModelParams(m, 1.0, SpinLabel(two_s), ff).with_lambda_eff(lam_eff)


@pytest.fixture(params=FAMILIES)
def family(request):
    return request.param


def pytest_terminal_summary(terminalreporter):
    if not CRITERION_LINES:
        return
    terminalreporter.section("acceptance criteria")
    def order(key):
        num, rest = re.match(r"(\d+)(.*)", key).groups()
        return int(num), rest

    for key in sorted(CRITERION_LINES, key=order):
        terminalreporter.write_line(CRITERION_LINES[key])
