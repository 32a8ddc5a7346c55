from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateFit


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    residuals: tuple[float, ...]

    @property
    def max_residual(self) -> float:
        return max((abs(r) for r in self.residuals), default=0.0)


def loglog_fit(xs, ys) -> FitResult:
    """Least-squares line through ``(log x, log y)``."""
    x = np.log(np.asarray(xs, dtype=np.float64))
    y = np.log(np.asarray(ys, dtype=np.float64))
    if len(x) < 2 or np.ptp(x) == 0:
        raise DegenerateFit("need at least two distinct abscissae")
    slope, intercept = np.polyfit(x, y, 1)
    res = y - (slope * x + intercept)
    return FitResult(float(slope), float(intercept), tuple(float(r) for r in res))
