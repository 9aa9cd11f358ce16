import inspect
from functools import wraps
from typing import Callable

import numpy as np

from .exceptions import DimensionError, InvalidParameter, RunnerUninitializedError


def check_executor(func: Callable):
    @wraps(func)
    async def inner(self, *args, **kwargs):
        if self._executor is None:
            raise RunnerUninitializedError()
        return await func(self, *args, **kwargs)

    return inner


def same_dimension(func: Callable):
    """Reject two composition operands whose last axes differ."""

    @wraps(func)
    def inner(x, y, *args, **kwargs):
        dx, dy = np.shape(x)[-1], np.shape(y)[-1]
        if dx != dy:
            raise DimensionError(dx, dy)
        return func(x, y, *args, **kwargs)

    return inner


def unit_interval(keyword: str):
    def wrapper(func: Callable):
        signature = inspect.signature(func)

        @wraps(func)
        def inner(*args, **kwargs):
            t = signature.bind(*args, **kwargs).arguments.get(keyword)
            if t is None or not 0.0 <= t <= 1.0:
                raise InvalidParameter(keyword, t, "[0, 1]")
            return func(*args, **kwargs)

        return inner

    return wrapper
