"""Collects one outcome per acceptance criterion for the end-of-run summary."""

import functools

RESULTS: dict[int, tuple[bool, str]] = {}


def record(number: int, title: str):
    """Decorator: run the check, remember pass/fail, print a line, re-raise failures."""

    def wrap(fn):
        @functools.wraps(fn)
        def run(*args, **kwargs):
            try:
                fn(*args, **kwargs)
            except BaseException:
                RESULTS[number] = (False, title)
                print(_line(number))
                raise
            RESULTS[number] = (True, title)
            print(_line(number))

        return run

    return wrap


def _line(number: int) -> str:
    ok, title = RESULTS[number]
    return f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}"


def summary() -> list[str]:
    return [_line(n) for n in sorted(RESULTS)]
