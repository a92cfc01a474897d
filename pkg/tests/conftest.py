import json
import os
import subprocess
import sys
from functools import cache
from pathlib import Path

import pytest
from hypothesis import settings

from ucr.coalg import ground, rp2, sphere, trivial_coalgebra
from ucr.resolution import build_resolution

settings.register_profile("ucr", deadline=None)
settings.load_profile("ucr")

HERE = Path(__file__).parent
FIXTURES = HERE / "fixtures"
GOLDEN = HERE / "golden"

COALGEBRAS = {
    "ground": lambda N=8: ground(trunc=N),
    "s2": lambda N=8: sphere(2, trunc=N),
    "rp2": lambda N=8: rp2(N),
    "triv24": lambda N=8: trivial_coalgebra([2, 4], trunc=N),
}


@cache
def resolution(name: str, D: int = 3, N: int = 8, strategy: str = "gu"):
    """Resolutions are the slow part of most tests; build each one once per session."""
    return build_resolution(COALGEBRAS[name](N), D, N, strategy)


def run_cli(*args, seed: int = 0, cwd: Path = FIXTURES, **extra_env: str):
    env = {**os.environ, "PYTHONHASHSEED": str(seed)}
    env.pop("UCR_THREADS", None)
    env.update(extra_env)
    return subprocess.run([sys.executable, "-m", "ucr.cli", *map(str, args)],
                          capture_output=True, text=True, cwd=cwd, env=env)


def body(stdout: str) -> dict:
    return json.loads(stdout)["body"]


@pytest.fixture
def fixtures() -> Path:
    return FIXTURES


# acceptance summary -------------------------------------------------------------

ACCEPTANCE: dict[int, tuple[bool, float, float, str]] = {}


def acceptance_line(num: int) -> str:
    ok, seconds, budget, detail = ACCEPTANCE[num]
    return f"criterion {num}: {'PASS' if ok else 'FAIL'} ({seconds:.1f} s of {budget:.0f} s) {detail}"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        terminalreporter.write_line(acceptance_line(num))
