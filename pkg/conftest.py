import pkgutil
import sys
import unittest.mock

# Python < 3.11 resolves mock.patch targets attribute-by-attribute, so a
# submodule shadowed by a same-named package attribute (e.g. the
# ``uodkit.toydet.ablate`` function) cannot be patched. Use the 3.11+ resolver.
if sys.version_info < (3, 11):
    unittest.mock._importer = pkgutil.resolve_name


import pytest
from opentelemetry import trace
from opentelemetry.util._once import Once


@pytest.fixture(autouse=True)
def _reset_global_tracer_provider():
    # setup_tracing installs a process-global, set-once tracer provider; reset it
    # so one test's provider does not leak into the next.
    yield
    trace._TRACER_PROVIDER = None
    trace._TRACER_PROVIDER_SET_ONCE = Once()
