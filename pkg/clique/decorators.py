import time
from functools import wraps

from logging_config import logger


def record_failures(label=None):
    """
    A decorator that logs any exception raised by the wrapped function and
    returns None instead, so a long run (e.g. a benchmark) can keep going.
    """

    def decorator(func):
        name = label or func.__name__

        @wraps(func)
        def wrapper(*args, **kwargs):
            try:
                return func(*args, **kwargs)
            except Exception as e:
                logger.exception(f"FAILED -> '{name}': {e}")
                return None

        return wrapper

    return decorator


def timed(func):
    """Makes the wrapped function return (result, elapsed wall-clock seconds)."""

    @wraps(func)
    def wrapper(*args, **kwargs):
        start = time.perf_counter()
        result = func(*args, **kwargs)
        return result, time.perf_counter() - start

    return wrapper
