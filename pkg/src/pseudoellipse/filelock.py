"""
Advisory locking for batch output files.

Problem: two `psmap batch --output` runs pointed at the same file would
interleave partial result streams.

Solution: an fcntl lock on a sibling `.lock` file, held while the results
are written to a temporary file and renamed into place. The holder removes
the lock file before unlocking, so a waiter that wakes up on a removed file
opens the path again.
"""

from __future__ import annotations

import fcntl
import logging
import os
import time
from contextlib import contextmanager
from pathlib import Path

log = logging.getLogger(__name__)


def _still_linked(fd, lock_path: Path) -> bool:
    try:
        return os.fstat(fd.fileno()).st_ino == os.stat(lock_path).st_ino
    except FileNotFoundError:
        return False


@contextmanager
def file_lock(path: Path, timeout: float = 5.0):
    """
    Advisory file lock for writes to path.

    Usage:
        with file_lock(out_path):
            out_path.write_text(results)
    """
    lock_path = path.with_suffix(path.suffix + ".lock")
    deadline = time.monotonic() + timeout
    lock_fd = None

    try:
        while True:
            lock_fd = open(lock_path, "w")
            try:
                fcntl.flock(lock_fd, fcntl.LOCK_EX | fcntl.LOCK_NB)
            except OSError:
                lock_fd.close()
                lock_fd = None
                if time.monotonic() >= deadline:
                    log.warning("could not lock %s within %.1fs, writing anyway", path, timeout)
                    break
                time.sleep(0.05)
                continue
            if _still_linked(lock_fd, lock_path):
                break
            fcntl.flock(lock_fd, fcntl.LOCK_UN)
            lock_fd.close()
            lock_fd = None

        yield

    finally:
        if lock_fd:
            try:
                lock_path.unlink(missing_ok=True)
                fcntl.flock(lock_fd, fcntl.LOCK_UN)
                lock_fd.close()
            except OSError:
                pass


def safe_write(path: Path, content: str):
    """Write a file atomically (temp file, then rename) under the lock."""
    path = Path(path)
    tmp_path = path.with_suffix(path.suffix + ".tmp")
    with file_lock(path):
        tmp_path.write_text(content)
        tmp_path.replace(path)
