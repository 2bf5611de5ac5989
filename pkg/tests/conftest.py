import pytest

from coachloop.clock import SimClock, utc
from coachloop.config import ServiceConfig
from coachloop.domain import default_pool, validate_profile
from coachloop.service import CoachService

MONDAY = utc(2025, 3, 3, 7, 0)  # experiment epoch, used as a fixed "now"


def raw_profile(**overrides) -> dict:
    base = {
        "age": 44,
        "gender": "Female",
        "height_m": 1.68,
        "weight_kg": 70.5,
        "education": 2,
        "health_condition": "none",
        "preferred_activities": ["walking", "yoga"],
        "preferred_foods": ["vegetables", "fish"],
        "resources": ["kitchen", "yoga-mat"],
    }
    base.update(overrides)
    return base


def make_profile(user_id="u-0001", **overrides):
    return validate_profile(dict(raw_profile(**overrides), user_id=user_id))


@pytest.fixture
def pool():
    return default_pool()


@pytest.fixture
def clock():
    return SimClock(MONDAY)


@pytest.fixture
def service(tmp_path, clock):
    cfg = ServiceConfig(data_dir=str(tmp_path / "data"), fsync=False)
    svc = CoachService.open(cfg, clock=clock)
    yield svc
    svc.close()


@pytest.fixture
def service_factory(tmp_path):
    """Build extra services on demand (reopen tests, custom configs)."""
    opened = []

    def build(name="data", clock=None, **config_overrides):
        cfg = ServiceConfig(data_dir=str(tmp_path / name), fsync=False,
                            **config_overrides)
        svc = CoachService.open(cfg, clock=clock or SimClock(MONDAY))
        opened.append(svc)
        return svc

    yield build
    for svc in opened:
        svc.close()
