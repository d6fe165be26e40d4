"""
Run reports: a self-describing envelope, canonical JSON and content-addressed files.

A report is written once as ``<command>-<sha256[:16]>.json``; rerunning the same
command with the same configuration yields the same bytes and hence the same file.
"""
import hashlib
import json
import logging
import os
import tempfile
from pathlib import Path

from app.errors import ReportError
from app.schemas import RUN_REPORT, validate

logger = logging.getLogger(__name__)

TOOL = "nagell-sieve"


def canonical_json(document):
    return json.dumps(document, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def envelope(command, config, results, seed, cancelled=False, timings=None):
    from app import __version__

    document = {
        "tool": TOOL,
        "version": __version__,
        "command": command,
        "config": config,
        "seed": seed,
        "results": results,
        "cancelled": cancelled,
    }
    if timings is not None:
        document["timings"] = timings
    return validate(document, RUN_REPORT, "run report", error=ReportError)


def report_name(document):
    digest = hashlib.sha256(canonical_json(document).encode("utf-8")).hexdigest()
    return f"{document['command']}-{digest[:16]}.json"


def write_report(document, output_dir):
    """Persist ``document`` under ``output_dir``; an existing file with that name is left alone."""
    validate(document, RUN_REPORT, "run report", error=ReportError)
    directory = Path(output_dir)
    try:
        directory.mkdir(parents=True, exist_ok=True)
        path = directory / report_name(document)
        if path.exists():
            logger.info(f"report {path} already exists")
            return path
        fd, tmp = tempfile.mkstemp(dir=directory, prefix=".report.", suffix=".tmp")
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(canonical_json(document))
        os.replace(tmp, path)
    except OSError as e:
        raise ReportError(f"cannot write report to {directory}: {e}") from e
    logger.info(f"report written to {path}")
    return path


def load_report(path):
    try:
        document = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError) as e:
        raise ReportError(f"cannot read report {path}: {e}") from e
    validate(document, RUN_REPORT, f"report {Path(path).name}", error=ReportError)
    if Path(path).name != report_name(document):
        raise ReportError(f"report {path} does not match its content hash")
    return document


def list_reports(output_dir, command=None):
    directory = Path(output_dir)
    if not directory.is_dir():
        return []
    pattern = f"{command}-*.json" if command else "*.json"
    return sorted(directory.glob(pattern))
