import os

import pytest


@pytest.fixture(scope="session", autouse=True)
def cache_dir(tmp_path_factory):
    """Session-scoped disk cache so expensive bases are shared across tests."""
    d = tmp_path_factory.mktemp("gc_cache")
    os.environ["GC_CACHE_DIR"] = str(d)
    yield d
