import numpy as np
import pytest

from ftnetlab.models import RFTNetParams, eval_rftnet_many


def tame_rftnet(p: RFTNetParams, xs: np.ndarray, bound: float = 50.0) -> RFTNetParams:
    """Deterministically damp W, V until the unrolled forward stays in range.

    Random recurrent instances with holomorphic activations can blow up
    through sinh/exp feedback; gradient checks need values finite-difference
    arithmetic can resolve.
    """
    for _ in range(8):
        with np.errstate(over="ignore", invalid="ignore"):
            out = eval_rftnet_many(p, xs)
        if np.all(np.isfinite(out)) and np.max(np.abs(out)) < bound:
            return p
        p = RFTNetParams(p.I, p.H, 0.5 * p.W, 0.5 * p.V, p.alpha, p.activation, p.r0)
    return p


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
