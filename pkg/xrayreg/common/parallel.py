# xrayreg/common/parallel.py
import asyncio
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, TypeVar

T = TypeVar("T")
R = TypeVar("R")


async def _gather(fn: Callable[[T], R], items: List[T], threads: int) -> List[R]:
    loop = asyncio.get_running_loop()
    with ThreadPoolExecutor(max_workers=threads) as pool:
        # gather keeps input order, whatever the completion order
        return await asyncio.gather(*[loop.run_in_executor(pool, fn, it) for it in items])


def gather_ordered(fn: Callable[[T], R], items: Iterable[T], threads: int = 1) -> List[R]:
    """Apply fn to every item on a bounded thread pool; results come back in input order."""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    return asyncio.run(_gather(fn, items, min(threads, len(items))))
