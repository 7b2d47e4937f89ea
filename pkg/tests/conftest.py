import numpy as np
import pytest

from danteflow.cli import main
from danteflow.geometry import StretchFactors
from danteflow.shapespace import ShapePoint


def random_ordered_stretch(rng: np.random.Generator, r_squared: float = 4.0,
                           lo: float = 0.2, hi: float = 2.0) -> StretchFactors:
    a, b, c = np.sort(rng.uniform(lo, hi, size=3))
    return StretchFactors(float(a), float(b), float(c), r_squared)


def random_interior_point(rng: np.random.Generator,
                          margin: float = 0.02) -> ShapePoint:
    x = rng.uniform(margin, 2.0 - margin)
    y_max = min(x, 2.0 - x)
    y = rng.uniform(margin * y_max, (1.0 - margin) * y_max)
    return ShapePoint(float(x), float(y))


@pytest.fixture
def run_cli(capsys):
    """Invoke the CLI in-process; returns (exit_code, stdout, stderr)."""
    def run(*args: str):
        code = main(list(args))
        captured = capsys.readouterr()
        return code, captured.out, captured.err
    return run
