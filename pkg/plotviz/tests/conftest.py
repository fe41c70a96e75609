"""Shared fixtures: twinsim artifacts generated through its public CLI.

plotviz consumes the simulator only through its CSV files, so the fixtures
shell out to `twinsim` instead of importing it.
"""

import subprocess
import sys

import pytest


def twinsim(*args: str) -> None:
    subprocess.run([sys.executable, "-m", "twinsim.cli", *args],
                   check=True, capture_output=True, text=True)


@pytest.fixture(scope="session")
def artifacts(tmp_path_factory):
    root = tmp_path_factory.mktemp("twinsim_out")

    twinsim("run", "--approach", "GT", "--duration", "600",
            "--out", str(root / "gt"))
    twinsim("run", "--approach", "UADT", "--duration", "900",
            "--out", str(root / "uadt"))
    twinsim("run", "--approach", "MDTS", "--duration", "900",
            "--fail-at", "600", "--out", str(root / "failure"))

    for approach in ("MDTS", "UAPT", "UADT"):
        twinsim("experiment", "--approach", approach, "--runs", "2",
                "--duration", "900", "--seed", "11",
                "--out", str(root / f"exp_{approach}"))

    # one multi-approach switch-error file for the violin comparison
    merged = root / "switch_errors_all.csv"
    lines = []
    for idx, approach in enumerate(("MDTS", "UAPT", "UADT")):
        text = (root / f"exp_{approach}" / "switch_errors.csv").read_text().splitlines()
        lines += text if idx == 0 else text[1:]
    merged.write_text("\n".join(lines) + "\n")

    return {
        "gt_trace": root / "gt" / "trace.csv",
        "uadt_trace": root / "uadt" / "trace.csv",
        "failure_trace": root / "failure" / "trace.csv",
        "switch_errors": merged,
        "switch_errors_single": root / "exp_MDTS" / "switch_errors.csv",
        "uncertainties": root / "exp_MDTS" / "uncertainties.csv",
        "root": root,
    }
