"""Runtime limits shared by every module.

Only two knobs come from the environment: the worker count and the
capacity cap.  Everything else is passed explicitly so that it lands in
run manifests.
"""

import os

DEFAULT_MAX_CAPACITY = 2**33


def max_capacity():
    raw = os.environ.get("SUMPROD_MAX_CAPACITY")
    if raw is None:
        return DEFAULT_MAX_CAPACITY
    return int(raw)


def worker_count():
    raw = os.environ.get("SUMPROD_THREADS")
    if raw is None:
        return 1
    return max(1, int(raw))
