from __future__ import annotations

import numpy as np

from .. import numerics as nx
from ..numerics import Tensor


def nll_loss(log_probs: Tensor, targets, mask=None) -> Tensor:
    """Negative log-likelihood summed over positions and averaged over sentences.

    ``log_probs`` is (N, T, V) (log-softmax output, so no probability is ever
    exactly 0), ``targets`` (N, T) and ``mask`` (N, T) with False on padding.
    """
    targets = np.asarray(targets)
    picked = nx.pick(log_probs, targets)
    if mask is not None:
        picked = picked * np.asarray(mask).astype(log_probs.dtype)
    return nx.sum(picked) * (-1.0 / targets.shape[0])
