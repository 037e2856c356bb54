"""CSV and pixmap emitters for analysis reports.

Files are written atomically (temp file then rename).  Floating-point
columns carry 17 significant digits; exact dyadic values are serialized
both as p/2^e strings and as decimal doubles.
"""

from __future__ import annotations

import csv
import os
import tempfile
from fractions import Fraction
from typing import Iterable, Sequence

from .dyadic import Dyadic


def format_value(value) -> str:
    if isinstance(value, float):
        return f"{value:.17g}"
    if isinstance(value, Fraction):
        return f"{float(value):.17g}"
    if isinstance(value, Dyadic):
        return str(value)
    return str(value)


def atomic_write_text(path: str, text: str) -> None:
    _atomic_write(path, text.encode("utf-8"))


def _atomic_write(path: str, payload: bytes) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    import io

    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(v) for v in row])
    atomic_write_text(path, buffer.getvalue())


#: Two-color palette approximating the conventional array rendering:
#: orange for coefficient 0, blue for coefficient 1.
PIXMAP_ZERO = (255, 165, 0)
PIXMAP_ONE = (30, 80, 200)
PIXMAP_BACKGROUND = (255, 255, 255)


def write_beta_pixmap(path: str, rows: Sequence[int], size: int) -> None:
    """Binary PPM of the coefficient array: row n from top, column k."""
    width = size + 1
    height = size
    body = bytearray()
    for n in range(1, size + 1):
        bits = rows[n - 1]
        for k in range(width):
            if k > n:
                body.extend(PIXMAP_BACKGROUND)
            elif (bits >> k) & 1:
                body.extend(PIXMAP_ONE)
            else:
                body.extend(PIXMAP_ZERO)
    header = f"P6\n{width} {height}\n255\n".encode("ascii")
    _atomic_write(path, header + bytes(body))
