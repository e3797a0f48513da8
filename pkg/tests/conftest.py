import numpy as np
import pytest

from homobs.graph import Topology
from homobs.observer import PlantModel, SensorModel, Signal, make_nonlinearity, make_signal
from homobs.synthesis import GainSet

# the three-sensor chain-of-integrators benchmark
SHIFT = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, 0.0]])
B_IN = np.array([[0.0], [0.0], [1.0]])
C_LIST = [
    np.array([[0.0, 0.0, 2.0], [0.0, 0.0, 2.0]]),
    np.array([[0.0, 0.0, 3.0]]),
    np.array([[0.0, 1.0, 0.0], [3.0, 2.0, 2.0]]),
]
X0 = np.array([-1.0, 0.0, 1.0])
HBAR_FINITE = [
    np.array([[3.15, 0.0], [-1.50, 0.0], [-4.71, 0.0]]),
    np.zeros((3, 1)),
    np.array([[3.30, -3.15], [-9.37, 0.0], [0.0, 0.0]]),
]
HBAR_FIXED = [
    np.array([[3.63, 0.0], [-2.60, 0.0], [-5.44, 0.0]]),
    np.zeros((3, 1)),
    np.array([[1.69, -3.69], [-10.33, -0.23], [-0.68, -0.02]]),
]
GAMMA = {"name": "holder", "params": {"coeff": 0.02, "direction": [0, 1, 0], "exponent": 0.1}}
Q_X = {"name": "sinusoid", "params": {"amplitude": [0, 0, 0.1], "frequency": [0, 0, 2], "kind": ["sin"] * 3}}
Q_Y = [
    {"name": "sinusoid", "params": {"amplitude": [1e-3, 1e-3], "frequency": [2, 0.5], "kind": ["sin", "cos"]}},
    {"name": "sinusoid", "params": {"amplitude": [1e-3], "frequency": [1], "kind": ["cos"]}},
    {"name": "sinusoid", "params": {"amplitude": [1e-3, 1e-3], "frequency": [2, 1], "kind": ["cos", "sin"]}},
]


def reference_gainset(mode: str, nu: float = 10.0) -> GainSet:
    hbar = HBAR_FIXED if mode == "fixed" else HBAR_FINITE
    extra = {"finite": {"mu": -0.65}, "fixed": {"mu0": -0.65, "mu_inf": 0.65}, "linear": {}}[mode]
    return GainSet(mode, hbar, np.full(3, 1 / 3), nu, 1.0, np.zeros((3, 3)), unverified=True, **extra)


def bench_plant(gamma: bool = True, perturbed: bool = False) -> PlantModel:
    return PlantModel(
        SHIFT,
        B_IN,
        make_nonlinearity(GAMMA if gamma else None, 3),
        make_signal(Q_X if perturbed else None, 3),
        Signal("zero", 1),
    )


def bench_sensors(perturbed: bool = False) -> SensorModel:
    qs = [make_signal(q if perturbed else None, c.shape[0]) for q, c in zip(Q_Y, C_LIST)]
    return SensorModel(tuple(C_LIST), tuple(qs))


@pytest.fixture
def ring3() -> Topology:
    return Topology.ring(3)


# acceptance lines, printed once at the end of the session
ACCEPTANCE: dict[str, str] = {}


@pytest.fixture
def report():
    def record(key: str, passed: bool, detail: str) -> bool:
        ACCEPTANCE[key] = f"{key} {'PASS' if passed else 'FAIL'}  {detail}"
        print(ACCEPTANCE[key])
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: int(k.split("-")[1])):
        terminalreporter.write_line(ACCEPTANCE[key])
