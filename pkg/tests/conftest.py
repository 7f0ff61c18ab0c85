import os
import time

import pytest

from crossfire import runner
from crossfire.config import parse_config

REPO_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
CONFIG_DIR = os.path.join(REPO_ROOT, "configs")
DATA_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "data")


def config_path(name: str) -> str:
    return os.path.join(CONFIG_DIR, f"golden_{name}.json")


@pytest.fixture(scope="session")
def golden_runs(tmp_path_factory):
    """Serial execution of the three committed scenario configs.

    Shared across the acceptance criteria so the (minutes-long) sweeps run
    once per session. Elapsed wall time of the white-box sweep is recorded
    for the runtime bound."""
    base = tmp_path_factory.mktemp("golden_runs")
    out = {}
    for name in ("whitebox", "blackbox", "audio"):
        cfg = parse_config(config_path(name))
        out_dir = str(base / name)
        t0 = time.time()
        code = runner.run(cfg, jobs=1, out_dir=out_dir)
        assert code == 0, f"golden {name} run failed with exit code {code}"
        out[name] = {"cfg": cfg, "dir": out_dir, "elapsed": time.time() - t0}
    return out
