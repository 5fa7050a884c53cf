import pytest

from smartap.runtime import SystemRuntime
from smartap.scenario import parse_scenario


def scenario_doc(aps=None, stations=None, sigma=0.0, seed=42, params=None, world=(100.0, 50.0)):
    """Scenario document with sane defaults for desk-scale tests."""
    if aps is None:
        aps = [
            {"ip": "10.0.0.1", "mac": "02:00:00:00:01:01", "position": {"x": 10, "y": 25}, "channel": 1},
            {"ip": "10.0.0.2", "mac": "02:00:00:00:01:02", "position": {"x": 90, "y": 25}, "channel": 1},
        ]
    if stations is None:
        stations = [
            {"mac": "00:16:ea:00:00:01", "track": [{"x": 15.0, "y": 25.0, "t": 0.0}]},
        ]
    doc = {
        "world": {"width": world[0], "height": world[1]},
        "seed": seed,
        "radio": {"noise_sigma_db": sigma},
        "aps": aps,
        "stations": stations,
    }
    if params:
        doc["params"] = params
    return doc


def make_scenario(**kwargs):
    return parse_scenario(scenario_doc(**kwargs))


@pytest.fixture
def runtime_factory():
    """Build started SystemRuntimes and stop them all at teardown."""
    runtimes = []

    def build(scenario=None, **kwargs):
        if scenario is None:
            scenario = make_scenario()
        rt = SystemRuntime(scenario, **kwargs)
        runtimes.append(rt)
        rt.start()
        return rt

    yield build
    for rt in runtimes:
        rt.stop()
