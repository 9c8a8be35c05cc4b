import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def planted_config(model, **changes):
    """Synthetic planted-alpha task: 64 subjects, energy features, kNN(3), 8 folds, seed 0."""
    from eegrid.config import ExperimentConfig

    base = dict(source="synthetic", task="SAD", model=model, features="energy", classifier="knn3",
                folds=8, seed=0, data_dir=".")
    base.update(changes)
    return ExperimentConfig(**base)


@pytest.fixture(scope="session")
def planted_samples():
    """Extracted model-1 and model-2 samples of the planted task, shared across tests."""
    from eegrid.pipeline import extract_samples

    return {m: extract_samples(planted_config(m)) for m in (1, 2)}


ACCEPTANCE_LINES: list[str] = []


def record_criterion(name: str, ok: bool, detail: str) -> None:
    line = f"{name} {'PASS' if ok else 'FAIL'}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line, flush=True)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda l: int(l.split()[0][1:])):
            terminalreporter.write_line(line)
