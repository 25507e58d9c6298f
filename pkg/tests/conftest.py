import hashlib
import importlib.resources

import pytest

from plpbayes import load_crow_times, mle_beta, mle_theta

# The bundled benchmark record is fixed input for many expected values below;
# an accidental edit must fail loudly, not shift results quietly.
CROW_SHA256 = "9d90b0fa3b769b3635846d21cbb61998cb872a55b460e865110f2f3f4ee34fe0"


@pytest.fixture(scope="session")
def crow():
    raw = importlib.resources.files("plpbayes").joinpath("data/crow.txt").read_bytes()
    digest = hashlib.sha256(raw).hexdigest()
    assert digest == CROW_SHA256, "bundled failure record changed on disk"
    return load_crow_times()


@pytest.fixture(scope="session")
def crow_mle(crow):
    """(shape MLE, scale MLE) of the benchmark record."""
    beta = mle_beta(crow)
    return beta, mle_theta(crow, beta)
