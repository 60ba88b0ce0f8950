# experiments/channels.py - Seeded Rayleigh channels.
#
# Draw order is fixed: user-major, antenna-minor, real part before imaginary part, all from one
# numpy Generator seeded with the instance seed.

import numpy as np

from errors import InvalidProblem
from models.channel import ChannelSet

# two users with roughly 10 dB disparity
DISPARATE_VARIANCES = (1.0, 0.09)


def gen_channels(seed: int, K: int, M: int, variances=None) -> ChannelSet:
    """h_k ~ CN(0, variances[k] I_M)."""
    variances = np.ones(K) if variances is None else np.asarray(variances, dtype=float)
    if variances.shape != (K,) or np.any(variances <= 0):
        raise InvalidProblem(f"need {K} positive variances, got {variances}")
    rng = np.random.default_rng(seed)
    draws = rng.standard_normal((K, M, 2))
    h = np.sqrt(variances / 2.0)[:, None] * (draws[..., 0] + 1j * draws[..., 1])
    meta = {"variances": ",".join(repr(float(v)) for v in variances)}
    return ChannelSet(h, seed=seed, meta=meta)
