"""중앙 차분 gradient 검증"""
from typing import Callable, Dict

import numpy as np


def numeric_gradient(fn: Callable[[Dict[str, np.ndarray]], float],
                     params: Dict[str, np.ndarray], h: float = 1e-5) -> Dict[str, np.ndarray]:
    """
    파라미터 dict의 각 원소에 대해 (f(p+h) - f(p-h)) / 2h

    fn은 파라미터 dict를 받아 스칼라를 돌려줘야 한다.
    """
    grads = {}
    for name, value in params.items():
        g = np.zeros_like(value)
        it = np.nditer(value, flags=['multi_index'])
        for _ in it:
            idx = it.multi_index
            plus = {k: v.copy() for k, v in params.items()}
            minus = {k: v.copy() for k, v in params.items()}
            plus[name][idx] += h
            minus[name][idx] -= h
            g[idx] = (fn(plus) - fn(minus)) / (2.0 * h)
        grads[name] = g
    return grads


def max_relative_error(analytic: Dict[str, np.ndarray], numeric: Dict[str, np.ndarray],
                       floor: float = 1e-4) -> float:
    worst = 0.0
    for name, a in analytic.items():
        n = numeric[name]
        err = np.abs(a - n) / np.maximum(np.abs(a) + np.abs(n), floor)
        worst = max(worst, float(err.max()) if err.size else 0.0)
    return worst
