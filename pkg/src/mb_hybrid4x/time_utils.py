"""Duration parsing and formatting."""

import re

_DURATION_RE = re.compile(r"(?:(\d+)m(?!s))?(?:(\d+)s)?(?:(\d+)ms)?")


def parse_duration(raw: str) -> float | None:
    """Parse a duration string into seconds.

    Supported formats: '30' (seconds), '30s', '2m', '1m30s', '500ms', '1s250ms'.
    Returns None on invalid input.
    """
    if raw.isdigit():
        return float(raw)

    m = _DURATION_RE.fullmatch(raw)
    if not m or not any(m.groups()):
        return None

    minutes = int(m.group(1) or 0)
    seconds = int(m.group(2) or 0)
    millis = int(m.group(3) or 0)
    return minutes * 60 + seconds + millis / 1000


def format_latency(ms: float) -> str:
    """Format a latency: milliseconds below one second, seconds with one decimal above."""
    if ms < 1000:
        return f"{ms:.0f}ms"
    return f"{ms / 1000:.1f}s"
