"""Order-preserving task execution over a bounded worker pool.

Results come back in task order whatever the worker count, so callers get
byte-identical output for any ``jobs`` value.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor


def run_tasks(fn, tasks, jobs: int = 1):
    """Map ``fn`` over ``tasks``; results in task order."""
    tasks = list(tasks)
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    workers = min(jobs, len(tasks))
    chunk = max(1, len(tasks) // (workers * 4))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks, chunksize=chunk))
