"""Small shared helpers: hashing, deterministic parallel mapping, float formatting."""

from __future__ import annotations

import hashlib
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def parallel_map(fn: Callable[[T], R], items: Sequence[T], threads: int = 1) -> list[R]:
    """Map fn over items, optionally on a thread pool.

    Results always come back in input order, so callers are deterministic
    regardless of thread count.
    """
    work = list(items)
    if threads <= 1 or len(work) <= 1:
        return [fn(item) for item in work]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, work))


def pairwise_sum(arrays: Sequence) -> "object":
    """Sum a list of numpy arrays by fixed-order pairwise reduction.

    Order depends only on the list, never on thread scheduling, so parallel
    producers still yield bit-identical totals.
    """
    work = list(arrays)
    if not work:
        raise ValueError("nothing to sum")
    while len(work) > 1:
        nxt = []
        for i in range(0, len(work) - 1, 2):
            nxt.append(work[i] + work[i + 1])
        if len(work) % 2 == 1:
            nxt.append(work[-1])
        work = nxt
    return work[0]


def fmt_float(x: float, decimals: int = 6) -> str:
    return f"{x:.{decimals}f}"


def iter_blocks(n: int, block_size: int) -> Iterable[range]:
    """Fixed-size index blocks; block boundaries never depend on thread count."""
    for start in range(0, n, block_size):
        yield range(start, min(start + block_size, n))
