"""Shared record of acceptance outcomes, printed by conftest at the end of the run."""
import functools
import time

RESULTS: dict = {}


def criterion(number: int, title: str, limit_s: float):
    """Time the wrapped test, enforce its runtime budget and log one line."""
    def wrap(fn):
        @functools.wraps(fn)
        def run(*args, **kwargs):
            t0 = time.perf_counter()
            detail, ok = "", False
            try:
                detail = fn(*args, **kwargs) or ""
                ok = True
            except Exception as exc:
                detail = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
                raise
            finally:
                dt = time.perf_counter() - t0
                if ok and dt >= limit_s:
                    ok, detail = False, f"runtime {dt:.1f}s over budget {limit_s:g}s; " + detail
                RESULTS[number] = (title, ok, dt, detail)
            assert dt < limit_s, f"runtime {dt:.1f}s over budget {limit_s:g}s"
        return run
    return wrap
