# Resources/common.py - Pieces shared by the command groups: list options, input files and error mapping.
#
# dB and dBm values are converted here and in the experiment runner only; everything past this
# point works in linear units.

import functools
import logging

import click
import numpy as np
from marshmallow import ValidationError

from errors import GlobOptError

logger = logging.getLogger(__name__)


class FloatList(click.ParamType):
    """Comma-separated floats, e.g. --qos 0.5,1"""

    name = "floats"

    def convert(self, value, param, ctx):
        if isinstance(value, (list, tuple)):
            return [float(v) for v in value]
        try:
            return [float(tok) for tok in str(value).split(",") if tok.strip()]
        except ValueError:
            self.fail(f"{value!r} is not a comma-separated list of numbers", param, ctx)


FLOATS = FloatList()


def handles_errors(func):
    """Turns bad-input errors (our own and invalid settings) into click usage errors (nonzero exit, one-line diagnostic)."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except ValidationError as err:
            raise click.UsageError(f"invalid input: {err.messages}") from err
        except (GlobOptError, ValueError) as err:
            raise click.UsageError(str(err)) from err

    return wrapper


def read_seed_file(path) -> list[int]:
    """One integer per line; blank lines and '#' comments are ignored."""
    seeds = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            try:
                seeds.append(int(text))
            except ValueError as err:
                raise click.UsageError(f"{path}:{lineno}: not an integer seed: {text!r}") from err
    if not seeds:
        raise click.UsageError(f"{path}: no seeds found")
    return seeds


def per_user(values, K: int, name: str, default: float) -> np.ndarray:
    """A flag given once applies to every user; otherwise it needs K entries."""
    if not values:
        return np.full(K, default)
    if len(values) == 1:
        return np.full(K, values[0])
    if len(values) != K:
        raise click.UsageError(f"--{name} needs 1 or {K} values, got {len(values)}")
    return np.asarray(values, dtype=float)


def noma_order(text: str | None):
    """'12' or '21' (1-based: strong user first) to a 0-based tuple."""
    if text is None:
        return None
    if text not in ("12", "21"):
        raise click.UsageError("--noma-order must be 12 or 21")
    return (0, 1) if text == "12" else (1, 0)


def session_factory_for(url):
    """Session factory for the result store, or None when no URL is configured."""
    from db import database_url, make_session_factory

    url = database_url(url)
    if url is None:
        return None
    logger.info("storing results in %s", url)
    return make_session_factory(url)
