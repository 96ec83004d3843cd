"""Small file helpers shared by the CLI and the scan writer."""

import contextlib
import os
import tempfile
from pathlib import Path


def fmt(x) -> str:
    """Round-trippable float text (17 significant digits)."""
    return format(float(x), ".17g")


@contextlib.contextmanager
def atomic_writer(path, mode="w"):
    """Write to a temp file next to ``path`` and rename on success only."""
    path = Path(path)
    directory = path.parent if str(path.parent) else Path(".")
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=directory)
    try:
        with os.fdopen(fd, mode, newline="" if "b" not in mode else None) as fh:
            yield fh
        umask = os.umask(0)
        os.umask(umask)
        os.chmod(tmp, 0o666 & ~umask)
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(OSError):
            os.unlink(tmp)
        raise
