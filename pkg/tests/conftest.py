import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "repo", deadline=None, max_examples=40, derandomize=True,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("repo")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# Monte Carlo oracle comparisons use the harness budget of 4 batch-means
# standard errors: with 16 batches the SE has 15 degrees of freedom, and the
# t_15 quantile matching 3-sigma normal coverage is already 3.64.
K_SE = 4.0
