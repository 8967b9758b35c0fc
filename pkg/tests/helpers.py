"""Small shared helpers for the test modules."""

import numpy as np


def random_state(rng, dims):
    """Haar-ish random pure state on the given local dimensions."""
    from entspec import PureState

    n = int(np.prod(dims))
    amps = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    amps /= np.linalg.norm(amps)
    return PureState(dims=tuple(dims), amps=amps)


def random_hermitian(rng, d):
    m = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return (m + m.conj().T) / 2.0
