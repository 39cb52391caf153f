import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from bgpc import Dims, EnsembleSpec, gen_instance
from bgpc.synth import SIGNALS

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# lines collected by the acceptance tests, echoed in the terminal summary
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line[1])


def make_instance(n, m, N, seed=0, sigma_w=0.0, signal="dense", s0=None, delta=0.1):
    d = {"n": n, "m": m, "N": N, "seed": seed, "sigma_w": sigma_w, "signal": signal, "delta": delta}
    if s0 is not None:
        d["s0"] = s0
    return gen_instance(EnsembleSpec.from_dict(d))


def random_complex(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def success_rates(base, axis, values, trials, solver="pi", **kw):
    """Run a one-axis experiment and return ``{value: success_rate}``."""
    from bgpc import harness
    spec = harness.ExperimentSpec(base=base, axes=[[axis, list(values)]], trials=trials, solver=solver, **kw)
    result = harness.run_experiment(spec)
    return {c.coords[0]: c.success_rate for c in result.cells}, result
