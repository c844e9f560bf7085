"""Module-level caches for hypothesis tests (function-scoped fixtures do not mix with @given)."""
from functools import lru_cache

from quasilorentz.schemes import packaged


@lru_cache(maxsize=None)
def penrose_scheme():
    return packaged("penrose")
