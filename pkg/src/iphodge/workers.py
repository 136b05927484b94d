"""Deterministic fan-out of independent cases over a thread pool.

The pool size comes from IPHODGE_THREADS (default 1).  Results are always
returned in input order, so reports do not depend on completion order.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

ENV_THREADS = "IPHODGE_THREADS"


def thread_count():
    raw = os.environ.get(ENV_THREADS, "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError("%s must be a positive integer, got %r" % (ENV_THREADS, raw))
    if n < 1:
        raise ValueError("%s must be a positive integer, got %r" % (ENV_THREADS, raw))
    return n


def ordered_map(fn, items, threads=None):
    items = list(items)
    n = thread_count() if threads is None else threads
    if n <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))
