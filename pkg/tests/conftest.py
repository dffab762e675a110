import pytest

from carequeue.model import SystemState, _Patient

PAPER_THETA = [0, 0.3380, 0.2238, 0.1481, 0.0981]


@pytest.fixture
def paper_theta():
    return list(PAPER_THETA)


def seed_patient(state: SystemState, nurse: int, stage: int, pid: int) -> None:
    """Drop one needy patient into a hand-built state (test scaffolding)."""
    p = _Patient(pid, stage)
    state._queues[nurse][stage - 1].append(p)
    state.needy[nurse][stage - 1] += 1
    state.tot_needy[stage - 1] += 1
    state._in_system += 1
    state.admissions += 1
