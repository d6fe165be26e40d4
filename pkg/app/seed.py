import logging

from app.config import Config
from app.models.curvedb import CurveDB, bundled_records

logger = logging.getLogger(__name__)


def wipe_cache(db):
    """Remove cached curve files whose conductor Tate does not reproduce."""
    removed = []
    for label in db.cached_labels():
        record = db.read_cached(label)
        if record is None or not record.check_conductor():
            db.evict(label)
            removed.append(label)
    if removed:
        logger.warning(f"removed {len(removed)} inconsistent cache entries: {', '.join(removed)}")
    return removed


def seed(cache_dir=None):
    """Copy the bundled curves into the cache so offline servers and workers share one directory."""
    db = CurveDB(cache_dir=cache_dir or Config.CURVE_CACHE_DIR, offline=True)
    wipe_cache(db)

    logger.info(f"seeding curve cache at {db.cache_dir}...")
    cached = set(db.cached_labels())
    written = []
    for label, record in sorted(bundled_records().items()):
        if label in cached:
            continue
        if not record.check_conductor():
            logger.error(f"bundled curve {label} does not have conductor {record.conductor}; skipped")
            continue
        db.store(record)
        written.append(label)
    logger.info(f"seeded {len(written)} curves ({len(cached)} already cached)")
    return written
