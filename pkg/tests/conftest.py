import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def small_code():
    """A fast desk-scale code: n=16, 2^8 inner messages, 8 colors, 2 members per bin."""
    from secureid.capacity import WiretapParams
    from secureid.idcode import build_identification_code

    ch = WiretapParams(1.0, 4.0, 4.0)
    import math

    rho = 8.0 / (16 * 0.5 * math.log2(5.0))
    return build_identification_code(16, rho + 1e-9, 8, 32, 2, ch, seed=11), ch
