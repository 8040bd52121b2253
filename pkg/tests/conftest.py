import os

import pytest

from twistdensity import prepared_e11
from twistdensity.curve import read_ap_cache, write_ap_cache
from twistdensity.ratios import RatiosContext
from twistdensity.symsquare import SymSquareEvaluator

CACHE_DIR = os.path.join(os.path.dirname(__file__), "..", ".cache")
AP_CACHE = os.path.join(CACHE_DIR, "ap_e11.txt")


@pytest.fixture(scope="session")
def curve():
    c = prepared_e11()
    if os.path.exists(AP_CACHE):
        read_ap_cache(c, AP_CACHE)
    return c


@pytest.fixture(scope="session")
def sym2(curve):
    ev = SymSquareEvaluator(curve, prime_cutoff=100_000)
    ev.ensure_cutoff(100_000)
    os.makedirs(CACHE_DIR, exist_ok=True)
    if not os.path.exists(AP_CACHE):
        write_ap_cache(curve, AP_CACHE)
    return ev


@pytest.fixture(scope="session")
def ratios(curve, sym2):
    return RatiosContext(curve, prime_cutoff=10_000, sym2=sym2)
