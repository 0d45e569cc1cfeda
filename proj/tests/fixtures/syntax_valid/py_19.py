import logging

log = logging.getLogger(__name__)


def retry(fn, attempts=3):
    for i in range(attempts):
        try:
            return fn()
        except OSError as exc:
            log.warning("attempt %d failed: %s", i + 1, exc)
    raise RuntimeError("all attempts failed")
