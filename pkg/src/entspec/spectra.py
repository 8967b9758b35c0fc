"""Schmidt decompositions, Renyi entanglement entropies, and rank truncation
for dense pure states on qudit chains.

All operations are pure functions; states are immutable once built.
"""

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import (
    BadAlphaError,
    BadCutError,
    BadExpansionError,
    UnnormalizedError,
    ZeroStateError,
)

CLAMP_REL = 1e-14  # coefficients below CLAMP_REL * lambda_1 are treated as zero


@dataclass(frozen=True)
class PureState:
    """Dense state vector over a chain of qudits with per-site dimensions."""

    dims: tuple
    amps: np.ndarray
    norm: float = field(default=None)

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if any(d < 2 for d in dims):
            raise ValueError("site dimensions must be >= 2")
        amps = np.asarray(self.amps, dtype=complex).reshape(-1)
        if amps.size != int(np.prod(dims)):
            raise ValueError("amplitude length does not match prod(dims)")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "amps", amps)
        nrm = float(np.linalg.norm(amps))
        if self.norm is not None and nrm > 0:
            if abs(self.norm - nrm) > 1e-12 * max(1.0, nrm):
                raise ValueError("stored norm disagrees with amplitudes")
        object.__setattr__(self, "norm", nrm)

    @property
    def n_sites(self):
        return len(self.dims)

    def tensor(self):
        return self.amps.reshape(self.dims)


@dataclass(frozen=True)
class Cut:
    """Bipartition of site indices into left (A) and right (B)."""

    left_sites: frozenset
    right_sites: frozenset

    @staticmethod
    def of(left, n_sites):
        left = frozenset(int(i) for i in left)
        return Cut(left, frozenset(range(n_sites)) - left)

    def validate(self, n_sites):
        allsites = frozenset(range(n_sites))
        if (
            not self.left_sites
            or not self.right_sites
            or self.left_sites & self.right_sites
            or (self.left_sites | self.right_sites) != allsites
        ):
            raise BadCutError(f"invalid bipartition of {n_sites} sites")


@dataclass(frozen=True)
class SchmidtSpectrum:
    """Descending Schmidt coefficients across one cut.

    left_vectors/right_vectors (when retained) hold the orthonormal Schmidt
    vectors as columns; source_norm is the norm of the decomposed state.
    """

    coeffs: np.ndarray
    source_norm: float
    left_vectors: Optional[np.ndarray] = None
    right_vectors: Optional[np.ndarray] = None

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.size and np.any(np.diff(c) > 1e-12 * max(1.0, c[0])):
            raise ValueError("coefficients must be descending")
        object.__setattr__(self, "coeffs", c)
        total = float(np.sqrt(np.sum(c**2)))
        if abs(total - self.source_norm) > 1e-10 * max(1.0, self.source_norm):
            raise ValueError("source_norm disagrees with coefficients")
        for vecs in (self.left_vectors, self.right_vectors):
            if vecs is not None:
                gram = vecs.conj().T @ vecs
                if np.max(np.abs(gram - np.eye(gram.shape[0]))) > 1e-10:
                    raise ValueError("retained Schmidt vectors must be orthonormal")

    @property
    def rank(self):
        c = self.coeffs
        if c.size == 0 or c[0] <= 0:
            return 0
        return int(np.count_nonzero(c > CLAMP_REL * c[0]))


def schmidt_decompose(state, cut, keep_vectors=False):
    """Schmidt coefficients of `state` across `cut`.

    The amplitude tensor is permuted so the left sites form the row index
    (site order preserved within each side), then SVD'd; non-contiguous
    cuts are therefore handled by the same path.
    """
    n = state.n_sites
    cut.validate(n)
    if state.norm == 0 or not np.any(state.amps):
        raise ZeroStateError("cannot decompose the zero state")
    left = sorted(cut.left_sites)
    right = sorted(cut.right_sites)
    perm = left + right
    tens = state.tensor().transpose(perm)
    dl = int(np.prod([state.dims[i] for i in left]))
    dr = int(np.prod([state.dims[i] for i in right]))
    mat = tens.reshape(dl, dr)
    if keep_vectors:
        u, s, vh = np.linalg.svd(mat, full_matrices=False)
        # vh rows are the right Schmidt vectors; store them as columns so
        # state = sum_s coeffs[s] * kron(left[:, s], right[:, s])
        return SchmidtSpectrum(s, state.norm, left_vectors=u, right_vectors=vh.T)
    s = np.linalg.svd(mat, compute_uv=False)
    return SchmidtSpectrum(s, state.norm)


def _clamped(coeffs):
    c = np.asarray(coeffs, dtype=float)
    if c.size == 0:
        return c
    return np.where(c > CLAMP_REL * c[0], c, 0.0)


def renyi_entropy(spec, alpha):
    """Renyi entanglement entropy of order alpha from a normalized spectrum.

    (1/(1-alpha)) log sum lambda^(2 alpha); alpha=1 is the von Neumann
    limit, alpha=inf is -log lambda_1^2. Natural logarithm throughout.
    """
    lam = _clamped(spec.coeffs)
    total = float(np.sum(lam**2))
    if abs(total - 1.0) > 1e-8:
        raise UnnormalizedError(f"sum lambda^2 = {total}")
    alpha = float(alpha)
    if not alpha > 0:
        raise BadAlphaError(f"alpha = {alpha}")
    lam = lam[lam > 0]
    p = lam**2
    if alpha == np.inf:
        return float(-np.log(np.max(p)))
    if abs(1.0 - alpha) < 1e-9:
        return float(-np.sum(p * np.log(p)))
    return float(np.log(np.sum(lam ** (2.0 * alpha))) / (1.0 - alpha))


def truncate_rank(spec, D):
    """Keep the top D coefficients; tail is the optimal 2-norm error
    sqrt(sum_{s>D} lambda_s^2)."""
    D = int(D)
    if D < 1:
        raise ValueError("D must be >= 1")
    lam = np.asarray(spec.coeffs, dtype=float)
    kept = lam[:D]
    tail = float(np.sqrt(np.sum(lam[D:] ** 2)))
    lv = spec.left_vectors[:, :D] if spec.left_vectors is not None else None
    rv = spec.right_vectors[:, :D] if spec.right_vectors is not None else None
    out = SchmidtSpectrum(kept, float(np.sqrt(np.sum(kept**2))), lv, rv)
    return out, tail


def overlap_sum_bound_check(terms, basis_a, basis_b, tol=1e-10):
    """Check sum_s |<a_s, b_s|Psi>| <= sum_j |g_j| for Psi = sum_j g_j |A_j>|B_j>.

    terms: sequence of (g_j, vec_a, vec_b) with unit-norm factors.
    basis_a/basis_b: orthonormal vector lists of equal length (paired).
    Always true mathematically; returns the boolean so property tests can
    sweep random instances.
    """
    gs = []
    va0 = np.asarray(terms[0][1], dtype=complex)
    vb0 = np.asarray(terms[0][2], dtype=complex)
    psi = np.zeros((va0.size, vb0.size), dtype=complex)
    for g, va, vb in terms:
        va = np.asarray(va, dtype=complex).reshape(-1)
        vb = np.asarray(vb, dtype=complex).reshape(-1)
        if abs(np.linalg.norm(va) - 1.0) > 1e-8 or abs(np.linalg.norm(vb) - 1.0) > 1e-8:
            raise BadExpansionError("expansion factors must be unit norm")
        psi += complex(g) * np.outer(va, vb)
        gs.append(abs(complex(g)))
    basis_a = [np.asarray(v, dtype=complex).reshape(-1) for v in basis_a]
    basis_b = [np.asarray(v, dtype=complex).reshape(-1) for v in basis_b]
    if len(basis_a) != len(basis_b):
        raise BadExpansionError("bases must pair up")
    for vs in (basis_a, basis_b):
        gram = np.array([[np.vdot(u, v) for v in vs] for u in vs])
        if np.max(np.abs(gram - np.eye(len(vs)))) > 1e-8:
            raise BadExpansionError("bases must be orthonormal")
    lhs = sum(abs(np.vdot(a, psi @ b.conj())) for a, b in zip(basis_a, basis_b))
    return bool(lhs <= sum(gs) + tol)


def schmidt_coeff_bound_check(spec, alpha, tol=1e-10):
    """Check lambda_{s0} <= (e^{(1-alpha) E_alpha} / s0)^{1/(2 alpha)} for all s0.

    Valid for alpha in (0,1) on normalized spectra; a property-test helper.
    """
    if not 0.0 < alpha < 1.0:
        raise BadAlphaError(f"alpha = {alpha} not in (0,1)")
    lam = _clamped(spec.coeffs)
    ent = renyi_entropy(spec, alpha)
    s0 = np.arange(1, lam.size + 1, dtype=float)
    bound = (np.exp((1.0 - alpha) * ent) / s0) ** (1.0 / (2.0 * alpha))
    return bool(np.all(lam <= bound + tol))


def coeff_times_index_bound(spec):
    """max_s lambda_s * s, which never exceeds sum_s lambda_s."""
    lam = np.asarray(spec.coeffs, dtype=float)
    s = np.arange(1, lam.size + 1, dtype=float)
    return float(np.max(lam * s)) if lam.size else 0.0
