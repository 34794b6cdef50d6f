"""
Batch processing of independent samples.

Parameter scans (mu samples, k sweeps, mode brackets) are embarrassingly
parallel; results are always merged back in input order so reports stay
deterministic regardless of worker count.
"""

from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Callable, List, Sequence, TypeVar

from src.utils.logger import get_global_logger

T = TypeVar('T')
R = TypeVar('R')


def run_indexed(func: Callable[[T], R], items: Sequence[T], max_workers: int = 1,
                label: str = 'batch') -> List[R]:
    """
    Apply ``func`` to every item and return results in input order.

    Args:
        func: Pure function of one item
        items: Independent inputs
        max_workers: Thread count; 1 runs sequentially
        label: Name used in log records

    Returns:
        ``[func(items[0]), func(items[1]), ...]``

    Raises:
        The first exception raised by ``func`` (by item index).
    """
    logger = get_global_logger()
    items = list(items)
    if max_workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]

    results: List = [None] * len(items)
    errors = {}
    workers = min(max_workers, len(items))
    logger.debug(f"Running {label} over {len(items)} items", data={'workers': workers})

    with ThreadPoolExecutor(max_workers=workers) as executor:
        future_to_index = {executor.submit(func, item): index for index, item in enumerate(items)}
        for future in as_completed(future_to_index):
            index = future_to_index[future]
            try:
                results[index] = future.result()
            except Exception as e:
                errors[index] = e

    if errors:
        first = min(errors)
        logger.debug(f"{label} failed on item {first}", data={'failures': len(errors)})
        raise errors[first]
    return results
