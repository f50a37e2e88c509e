import subprocess
import sys
from pathlib import Path

import pytest

REPO = Path(__file__).resolve().parents[2]
CONFIGS = REPO / "configs"

CANNED = ("channel", "purify", "swap", "repeater", "paper_circuit")


@pytest.fixture(scope="session")
def canned_csvs(tmp_path_factory):
    """CSVs produced by the simulator's own CLI, the only coupling allowed."""
    out_dir = tmp_path_factory.mktemp("csv")
    paths = {}
    for name in CANNED:
        dest = out_dir / f"{name}.csv"
        subprocess.run(
            [sys.executable, "-m", "qrepsim", name.replace("_", "-"),
             "--config", str(CONFIGS / f"{name}.ini"),
             "--out", str(dest), "--format", "csv"],
            check=True,
            capture_output=True,
        )
        paths[name] = dest
    return paths
