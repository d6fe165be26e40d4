import logging
from concurrent.futures import ProcessPoolExecutor

logger = logging.getLogger(__name__)


class Cancelled(Exception):
    """Raised through ``run_units`` callers after a KeyboardInterrupt; carries the finished results."""

    def __init__(self, completed):
        super().__init__(f"cancelled after {len(completed)} completed units")
        self.completed = completed


def run_units(func, units, workers=1):
    """
    Apply ``func`` to every unit and return the results in input order.

    ``workers == 1`` runs inline. On KeyboardInterrupt the pending futures are
    cancelled and Cancelled is raised with the results of the leading units that
    did finish, so callers can persist a consistent partial report.
    """
    units = list(units)
    completed = []
    if workers <= 1:
        try:
            for unit in units:
                completed.append(func(unit))
        except KeyboardInterrupt:
            raise Cancelled(completed) from None
        return completed

    executor = ProcessPoolExecutor(max_workers=workers)
    futures = [executor.submit(func, unit) for unit in units]
    try:
        for future in futures:
            completed.append(future.result())
    except KeyboardInterrupt:
        logger.warning(f"interrupted; cancelling {len(futures) - len(completed)} pending units")
        for future in futures:
            future.cancel()
        executor.shutdown(wait=False, cancel_futures=True)
        raise Cancelled(completed) from None
    executor.shutdown()
    return completed
