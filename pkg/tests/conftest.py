import pytest
from hypothesis import HealthCheck, settings

from planesearch import Dataset, SearchSpace, map_fit
from planesearch.rng import stream

settings.register_profile(
    "suite", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("suite")


def random_dataset(seed: int, n: int, points: int = 8, records: int = 4) -> Dataset:
    """Small random dataset with well-separated points and valid records."""
    rng = stream(seed, 900)
    ds = Dataset(SearchSpace(n))
    X = rng.uniform(0.05, 0.95, (points, n))
    for x in X:
        ds.add_point(x)
    for _ in range(records):
        members = rng.choice(points, size=3, replace=False)
        ds.add_record(int(members[0]), [int(members[1]), int(members[2])])
    return ds


@pytest.fixture(scope="session")
def small_model():
    """A fitted 2-D model shared by read-only tests."""
    return map_fit(random_dataset(5, 2))


@pytest.fixture(scope="session")
def model_5d():
    return map_fit(random_dataset(11, 5, points=10, records=6))
