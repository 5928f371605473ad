import os
import sys

import hypothesis
import numpy as np
import pytest

current_dir = os.path.dirname(os.path.abspath(__file__))
src_dir = os.path.dirname(current_dir)
if src_dir not in sys.path:
    sys.path.insert(0, src_dir)

np.seterr(all="warn")

hypothesis.settings.register_profile("ci", max_examples=200, deadline=None)
hypothesis.settings.register_profile("dev", max_examples=30, deadline=None)
hypothesis.settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "dev"))


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: acceptance-size populations (deselect with -m 'not slow')")


@pytest.fixture
def log_file(tmp_path):
    return str(tmp_path / "spinrelax.log")
