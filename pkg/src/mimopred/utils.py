"""Small shared helpers: angle wrapping, dB conversion, seeded streams, config files."""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .exceptions import ConfigError

TWO_PI = 2.0 * np.pi


def wrap_angle(x):
    """Reduce angles to the half-open interval (-pi, pi].

    Works on scalars and arrays. ``pi`` maps to ``pi`` and ``-pi`` maps to ``pi``.
    """
    x = np.asarray(x, dtype=float)
    out = x - TWO_PI * np.round(x / TWO_PI)
    # np.round can leave values at exactly -pi or slightly past the ends
    out = np.where(out <= -np.pi, out + TWO_PI, out)
    out = np.where(out > np.pi, out - TWO_PI, out)
    return out.item() if out.ndim == 0 else out


def angular_distance(a, b):
    """Shortest distance on the circle between angles ``a`` and ``b``, in [0, pi]."""
    return np.abs(wrap_angle(np.asarray(a, dtype=float) - np.asarray(b, dtype=float)))


def db(x):
    return 10.0 * np.log10(x)


def undb(x):
    return 10.0 ** (np.asarray(x, dtype=float) / 10.0)


def stream(root_seed: int, *index: int) -> np.random.Generator:
    """Independent generator for ``(root_seed, index...)``.

    The stream is a pure function of its key (numpy ``SeedSequence`` spawn
    keys), so creating it is O(1) and does not depend on creation order.
    """
    seq = np.random.SeedSequence(int(root_seed), spawn_key=tuple(int(i) for i in index))
    return np.random.default_rng(seq)


def _coerce(text: str):
    low = text.strip().lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    if low in ("none", "null", ""):
        return None
    if "," in text:
        return [_coerce(part) for part in text.split(",") if part.strip()]
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text.strip()


def parse_key_values(text: str) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment.

    Values become int, float, bool, None, a list (comma separated) or str.
    """
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key.isidentifier():
            raise ConfigError(f"line {lineno}: invalid key {key!r}")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = _coerce(value)
    return out


def read_key_values(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_key_values(text)


def format_float(x: float) -> str:
    """17 significant digits, enough to round-trip any double."""
    if x is None:
        return ""
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.17g}"
