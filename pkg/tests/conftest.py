import pytest

from croqs.backends import MockBackend
from croqs.synthetic import make_planted


@pytest.fixture(scope="session")
def planted():
    """5 queries x 3 orthogonal-cone clusters x 10 points, dim 32."""
    return make_planted(
        n_queries=5, clusters_per_query=3, points_per_cluster=10,
        dim=32, cone_deg=5.0, seed=11,
    )


@pytest.fixture()
def planted_backend(planted):
    return MockBackend.from_spec(planted.mock_spec)
