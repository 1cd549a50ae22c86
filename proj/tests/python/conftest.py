import pytest

pytest.importorskip("d2eal._d2eal", reason="extension not installed; run pip install --no-build-isolation -e .")
