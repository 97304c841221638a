# xrayreg/baseline/powell.py
"""
Powell's direction-set minimizer with Brent line searches.

The outer loop follows the classic scheme: minimize along each direction in
turn, then try the extrapolated point 2·x − x_start and, when the
extrapolation test passes, swap the direction of largest decrease for the
net displacement of the cycle.
"""
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger
from scipy.optimize import minimize_scalar

from xrayreg.common.errors import InvalidParameterError, OptimizerDivergedError

DEFAULT_SCALES = (1.0, 1.0, 10.0, 2.0, 10.0, 10.0)


@dataclass(frozen=True)
class PowellConfig:
    scales: Tuple[float, ...] = DEFAULT_SCALES
    ftol: float = 1e-4
    xtol: float = 1e-2
    max_iter: int = 20
    max_evals: int = 3000

    def __post_init__(self):
        object.__setattr__(self, "scales", tuple(float(s) for s in self.scales))
        if not self.scales or any(s <= 0 for s in self.scales):
            raise InvalidParameterError(f"Powell scales must be > 0, got {self.scales}")
        if not (self.ftol > 0 and self.xtol > 0):
            raise InvalidParameterError("Powell tolerances must be > 0")
        if self.max_iter < 1 or self.max_evals < 1:
            raise InvalidParameterError("Powell iteration and evaluation caps must be >= 1")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: Dict[str, Any]) -> "PowellConfig":
        return cls(**doc)


@dataclass
class PowellResult:
    x: np.ndarray
    fun: float
    n_evals: int
    n_iter: int
    trace: List[Tuple[np.ndarray, float]] = field(default_factory=list)
    message: str = ""


class _EvalBudgetExhausted(Exception):
    pass


class _Objective:
    """Counts and records every evaluation and remembers the best one."""

    def __init__(self, fn: Callable[[np.ndarray], float], max_evals: int):
        self.fn = fn
        self.max_evals = max_evals
        self.trace: List[Tuple[np.ndarray, float]] = []
        self.best_x: Optional[np.ndarray] = None
        self.best_f = np.inf

    def __call__(self, x: np.ndarray) -> float:
        if len(self.trace) >= self.max_evals:
            raise _EvalBudgetExhausted()
        x = np.array(x, dtype=float)
        if not np.all(np.isfinite(x)):
            raise OptimizerDivergedError(x)
        f = float(self.fn(x))
        if not np.isfinite(f):
            raise OptimizerDivergedError(x)
        self.trace.append((x, f))
        if f < self.best_f:
            self.best_x, self.best_f = x, f
        return f


def _line_search(func: _Objective, x: np.ndarray, direction: np.ndarray, fval: float, tol: float):
    """Minimize func(x + s·direction) over s; returns (f, x_new, displacement)."""
    if not np.any(direction):
        return fval, x, direction
    start_best = func.best_f
    try:
        res = minimize_scalar(lambda s: func(x + s * direction), method="brent", options={"xtol": tol})
        s, f = float(res.x), float(res.fun)
    except RuntimeError:
        # bracketing failed; keep whatever this search found
        if func.best_f < start_best and func.best_f < fval:
            step = func.best_x - x
            return func.best_f, func.best_x.copy(), step
        return fval, x, np.zeros_like(direction)
    if not f < fval:
        return fval, x, np.zeros_like(direction)
    step = s * direction
    return f, x + step, step


def powell_optimize(
    objective: Callable[[np.ndarray], float],
    x0: Sequence[float],
    config: PowellConfig = PowellConfig(),
) -> PowellResult:
    """
    Minimize objective from x0. Directions start as the coordinate axes scaled
    by config.scales. Stops when one cycle improves the objective by less than
    ftol relative, or at the iteration / evaluation caps.
    """
    x = np.asarray(x0, dtype=float).ravel()
    n = x.size
    if len(config.scales) != n:
        raise InvalidParameterError(f"{len(config.scales)} scales for {n} parameters")
    func = _Objective(objective, config.max_evals)
    direc = np.diag(config.scales)
    fval = func(x)
    x_start = x.copy()
    n_iter = 0
    message = "converged"
    try:
        while True:
            fx = fval
            big_idx, big_drop = 0, 0.0
            for i in range(n):
                f_before = fval
                fval, x, _ = _line_search(func, x, direc[i], fval, config.xtol)
                if f_before - fval > big_drop:
                    big_drop, big_idx = f_before - fval, i
            n_iter += 1
            logger.debug("Powell iteration {}: f={:.6g} after {} evals", n_iter, fval, len(func.trace))
            if 2.0 * (fx - fval) <= config.ftol * (abs(fx) + abs(fval)) + 1e-20:
                break
            if n_iter >= config.max_iter:
                message = "iteration cap"
                break

            shift = x - x_start
            x_start = x.copy()
            fx2 = func(x + shift)
            if fx > fx2:
                t = 2.0 * (fx + fx2 - 2.0 * fval) * (fx - fval - big_drop) ** 2 - big_drop * (fx - fx2) ** 2
                if t < 0.0:
                    fval, x, step = _line_search(func, x, shift, fval, config.xtol)
                    if np.any(step):
                        direc[big_idx] = direc[-1]
                        direc[-1] = step
    except _EvalBudgetExhausted:
        message = "evaluation cap"

    # never hand back something worse than the best evaluated point
    if func.best_f < fval:
        x, fval = func.best_x.copy(), func.best_f
    return PowellResult(x=x, fun=fval, n_evals=len(func.trace), n_iter=n_iter, trace=func.trace, message=message)
