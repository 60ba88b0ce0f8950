# models/channel.py - Downlink channels h_1..h_K of the MISO broadcast channel.
# Channels are stored already divided by the noise standard deviation (unit-noise SINRs).

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from errors import ChannelFileError, DimensionMismatch, InvalidProblem


@dataclass(frozen=True, eq=False)
class ChannelSet:
    """K complex channel vectors of length M, one row per user."""

    h: np.ndarray
    seed: int | None = None
    meta: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        h = np.array(self.h, dtype=complex)
        if h.ndim == 1:
            h = h.reshape(1, -1)
        if h.ndim != 2 or h.shape[0] < 1 or h.shape[1] < 1:
            raise DimensionMismatch(f"channels must be a K x M array, got shape {h.shape}")
        if not np.all(np.isfinite(h)):
            raise InvalidProblem("channel entries must be finite")
        if not np.any(np.abs(h) > 0):
            raise InvalidProblem("at least one channel must be nonzero")
        h.setflags(write=False)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "meta", dict(self.meta))

    @property
    def K(self) -> int:
        return self.h.shape[0]

    @property
    def M(self) -> int:
        return self.h.shape[1]

    @property
    def norms_sq(self) -> np.ndarray:
        return np.sum(np.abs(self.h) ** 2, axis=1)

    def scaled(self, c: float) -> "ChannelSet":
        return ChannelSet(self.h * c, seed=self.seed, meta=self.meta)

    def noise_normalized(self, noise_var: float) -> "ChannelSet":
        """Divides by the noise standard deviation so the SINR formulas use unit noise."""
        if noise_var <= 0:
            raise InvalidProblem("noise variance must be positive")
        return self.scaled(1.0 / np.sqrt(noise_var))

    def swapped(self, order) -> "ChannelSet":
        """Reorders the users (used by the symmetry checks)."""
        return ChannelSet(self.h[list(order)], seed=self.seed, meta=self.meta)


# -----------------------------
# Channel file format
# -----------------------------
# One record per instance:
#   # seed=7             (optional metadata lines)
#   K M
#   re,im re,im ...      (K lines with M entries each)
# Records are separated by blank lines.


def format_channels(channels: ChannelSet) -> str:
    lines = []
    if channels.seed is not None:
        lines.append(f"# seed={channels.seed}")
    for key in sorted(channels.meta):
        lines.append(f"# {key}={channels.meta[key]}")
    lines.append(f"{channels.K} {channels.M}")
    for row in channels.h:
        lines.append(" ".join(f"{float(z.real)!r},{float(z.imag)!r}" for z in row))
    return "\n".join(lines) + "\n"


def write_channel_file(path, channel_sets) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(format_channels(ch) for ch in channel_sets))


def parse_channels(text: str) -> list[ChannelSet]:
    records = []
    meta, header, rows = {}, None, []

    def close(lineno):
        nonlocal meta, header, rows
        if header is None:
            if meta:
                raise ChannelFileError(f"line {lineno}: metadata without a channel record")
            return
        K, M = header
        if len(rows) != K:
            raise ChannelFileError(f"line {lineno}: expected {K} channel rows, found {len(rows)}")
        seed = meta.pop("seed", None)
        records.append(ChannelSet(np.array(rows), seed=int(seed) if seed is not None else None, meta=meta))
        meta, header, rows = {}, None, []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            close(lineno)
            continue
        if line.startswith("#"):
            if header is not None:
                close(lineno)
            key, sep, value = line.lstrip("#").strip().partition("=")
            if not sep:
                continue  # plain comment
            meta[key.strip()] = value.strip()
            continue
        if header is None:
            try:
                K, M = (int(tok) for tok in line.split())
            except ValueError as err:
                raise ChannelFileError(f"line {lineno}: expected 'K M', got {line!r}") from err
            if K < 1 or M < 1:
                raise ChannelFileError(f"line {lineno}: K and M must be positive")
            header = (K, M)
            continue
        try:
            entries = [complex(float(re), float(im)) for re, im in (tok.split(",") for tok in line.split())]
        except ValueError as err:
            raise ChannelFileError(f"line {lineno}: entries must be 're,im' pairs") from err
        if len(entries) != header[1]:
            raise ChannelFileError(f"line {lineno}: expected {header[1]} entries, found {len(entries)}")
        rows.append(entries)
        if len(rows) == header[0]:
            close(lineno)

    close(len(text.splitlines()) + 1)
    if not records:
        raise ChannelFileError("no channel records found")
    return records


def read_channel_file(path) -> list[ChannelSet]:
    with open(path, encoding="utf-8") as fh:
        return parse_channels(fh.read())
