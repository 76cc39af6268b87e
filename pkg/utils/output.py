"""CSV/JSON emission helpers shared by the CLI and scripts."""
import io
import os
import sys
import tempfile
from pathlib import Path
from typing import Optional

import pandas as pd

from .logger import setup_logger

logger = setup_logger(__name__)


def atomic_write_text(path, text: str) -> Path:
    """Write text to path through a temp file and an atomic rename.

    A reader never sees a partially written file: the content goes to a
    temporary file in the destination directory which then replaces the
    target in one ``os.replace`` call.

    Args:
        path: Destination file
        text: Full file content

    Returns:
        The destination path
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix='.tmp')
    try:
        with os.fdopen(fd, 'w', encoding='utf-8', newline='') as handle:
            handle.write(text)
            handle.flush()
            os.fsync(handle.fileno())
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise

    logger.info(f"Wrote {len(text)} bytes to {path}")
    return path


def frame_to_csv(frame: pd.DataFrame, sig_digits: int) -> str:
    """Render a frame as CSV with fixed scientific notation.

    Args:
        frame: Table to render; column order is kept
        sig_digits: Significant digits of every float cell

    Returns:
        CSV text with '\\n' line endings and a header row
    """
    buffer = io.StringIO()
    frame.to_csv(
        buffer,
        index=False,
        float_format=f"%.{sig_digits - 1}e",
        na_rep='',
        lineterminator='\n',
    )
    return buffer.getvalue()


def frame_to_json(frame: pd.DataFrame) -> str:
    """Render a frame as a JSON array of row objects."""
    return frame.to_json(orient='records', double_precision=15, indent=2) + '\n'


def emit(text: str, output: Optional[str] = None) -> None:
    """Send text to a file (atomically) or to stdout.

    Args:
        text: Payload
        output: Destination path; stdout when None or '-'
    """
    if output and output != '-':
        atomic_write_text(output, text)
    else:
        sys.stdout.write(text)
        sys.stdout.flush()
