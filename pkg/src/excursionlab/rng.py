"""Counter-based random substreams for reproducible parallel Monte Carlo.

Every path (leg, bridge, CIR run, ...) draws from its own Philox stream keyed
by ``(seed, stream index)``.  Results are therefore a pure function of the
experiment seed and the path index, independent of batching, worker count or
execution order.
"""

import numpy as np

_MASK64 = (1 << 64) - 1


def substream(seed: int, index: int) -> np.random.Generator:
    """Generator for stream ``index`` of the experiment keyed by ``seed``."""
    key = np.array([int(seed) & _MASK64, int(index) & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
