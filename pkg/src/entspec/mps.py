"""Open-boundary matrix product states with exact discarded-weight
accounting: factorization, contraction, addition, local-term application,
and two-sweep compression whose per-bond records feed the run certificates.
"""

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import MismatchError, TooLargeError, UnsupportedLocalityError
from .ioutil import decode_complex, encode_complex
from .spectra import PureState

DENSE_CAP = 2 ** 20


@dataclass(frozen=True)
class MatrixProductState:
    """Site tensors indexed [left bond, physical, right bond]; boundary bonds 1."""

    tensors: tuple
    canonical_center: Optional[int] = None

    def __post_init__(self):
        ts = tuple(np.asarray(t, dtype=complex) for t in self.tensors)
        if not ts:
            raise ValueError("empty tensor list")
        if ts[0].shape[0] != 1 or ts[-1].shape[2] != 1:
            raise ValueError("boundary bond dims must be 1")
        for i, t in enumerate(ts):
            if t.ndim != 3:
                raise ValueError("site tensors must have 3 indices")
            if i + 1 < len(ts) and t.shape[2] != ts[i + 1].shape[0]:
                raise ValueError(f"bond mismatch between sites {i} and {i + 1}")
        object.__setattr__(self, "tensors", ts)
        c = self.canonical_center
        if c is not None:
            for i, t in enumerate(ts):
                dl, d, dr = t.shape
                if i < c:
                    m = t.reshape(dl * d, dr)
                    gram = m.conj().T @ m
                else:
                    if i == c:
                        continue
                    m = t.reshape(dl, d * dr)
                    gram = m @ m.conj().T
                if np.max(np.abs(gram - np.eye(gram.shape[0]))) > 1e-10:
                    raise ValueError(f"tensor {i} not orthogonal for center {c}")

    @property
    def n_sites(self):
        return len(self.tensors)

    @property
    def d(self):
        return self.tensors[0].shape[1]

    @property
    def bond_dims(self):
        return tuple([1] + [t.shape[2] for t in self.tensors])

    @property
    def max_bond(self):
        return max(self.bond_dims)

    def scaled(self, c):
        ts = list(self.tensors)
        ts[0] = ts[0] * c
        return MatrixProductState(tensors=tuple(ts))


@dataclass(frozen=True)
class BondRecord:
    bond: int
    kept: np.ndarray
    delta2: float
    zeta: float


@dataclass(frozen=True)
class CompressionRecord:
    bonds: tuple

    @property
    def sum_delta2(self):
        return float(sum(b.delta2 for b in self.bonds))

    @property
    def max_delta(self):
        return float(max((math.sqrt(b.delta2) for b in self.bonds), default=0.0))

    @property
    def max_zeta(self):
        return float(max((b.zeta for b in self.bonds), default=0.0))

    def stitching_bound(self):
        """Upper bound on ||orig - compressed||: sqrt(2 * sum of discards)."""
        return math.sqrt(2.0 * self.sum_delta2)


def compression_record_rows(record):
    return [
        {
            "bond": b.bond,
            "zeta": b.zeta,
            "delta2": b.delta2,
            "kept_count": int(b.kept.size),
        }
        for b in record.bonds
    ]


def from_dense(state, d_max=None, tolerance=0.0):
    """Sequential SVD factorization of a chain state, largest-first per bond."""
    dims = state.dims
    d = dims[0]
    if any(x != d for x in dims):
        raise MismatchError("chain must have a uniform physical dimension")
    n = len(dims)
    cap = d_max if d_max is not None else 10 ** 9
    rest = state.amps.reshape(1, -1)
    tensors = []
    bonds = []
    left = 1
    for i in range(n - 1):
        m = rest.reshape(left * d, -1)
        u, s, vh = np.linalg.svd(m, full_matrices=False)
        keep = int(min(cap, max(1, int(np.sum(s > tolerance)))))
        kept = s[:keep]
        delta2 = float(np.sum(s[keep:] ** 2))
        bonds.append(
            BondRecord(bond=i + 1, kept=kept.copy(), delta2=delta2, zeta=float(np.sum(kept)))
        )
        tensors.append(u[:, :keep].reshape(left, d, keep))
        rest = kept[:, None] * vh[:keep]
        left = keep
    tensors.append(rest.reshape(left, d, 1))
    mps = MatrixProductState(tensors=tuple(tensors), canonical_center=n - 1)
    return mps, CompressionRecord(bonds=tuple(bonds))


def to_dense(mps, cap=DENSE_CAP):
    d = mps.d
    total = d ** mps.n_sites
    if total > cap:
        raise TooLargeError(f"total dim {total} > cap {cap}")
    acc = mps.tensors[0].reshape(d, -1)
    for t in mps.tensors[1:]:
        acc = np.einsum("xb,bpr->xpr", acc, t).reshape(-1, t.shape[2])
    return PureState(dims=(d,) * mps.n_sites, amps=acc.reshape(-1))


def add(a, b, coeff_a=1.0, coeff_b=1.0):
    """Direct sum on bonds; dense value coeff_a * a + coeff_b * b."""
    if a.n_sites != b.n_sites or a.d != b.d:
        raise MismatchError("MPS shapes differ")
    n, d = a.n_sites, a.d
    if n == 1:
        t = coeff_a * a.tensors[0] + coeff_b * b.tensors[0]
        return MatrixProductState(tensors=(t,))
    ts = []
    for i in range(n):
        ta = a.tensors[i] * (coeff_a if i == 0 else 1.0)
        tb = b.tensors[i] * (coeff_b if i == 0 else 1.0)
        la, _, ra = ta.shape
        lb, _, rb = tb.shape
        if i == 0:
            t = np.concatenate([ta, tb], axis=2)
        elif i == n - 1:
            t = np.concatenate([ta, tb], axis=0)
        else:
            t = np.zeros((la + lb, d, ra + rb), dtype=complex)
            t[:la, :, :ra] = ta
            t[la:, :, ra:] = tb
        ts.append(t)
    return MatrixProductState(tensors=tuple(ts))


def _product_factors(matrix, d):
    """Split a two-site operator into sum_a P_a (x) Q_a by its operator SVD."""
    o4 = matrix.reshape(d, d, d, d)
    r = o4.transpose(0, 2, 1, 3).reshape(d * d, d * d)
    u, s, vh = np.linalg.svd(r, full_matrices=False)
    factors = []
    for a in range(s.size):
        if s[a] < 1e-14 * s[0]:
            break
        root = math.sqrt(s[a])
        p = root * u[:, a].reshape(d, d)
        q = root * vh[a, :].conj().reshape(d, d)
        factors.append((p, q))
    return factors


def apply_local_term(mps, term):
    """h_Z applied to the state; bonds between a two-site support grow by the
    number of product factors (at most d^2)."""
    if len(term.support) > 2:
        raise UnsupportedLocalityError(f"support size {len(term.support)} > 2")
    if term.support[-1] >= mps.n_sites:
        raise MismatchError("term support outside the chain")
    d = mps.d
    ts = [t.copy() for t in mps.tensors]
    if len(term.support) == 1:
        (i,) = term.support
        ts[i] = np.einsum("pq,lqr->lpr", term.matrix, ts[i])
        return MatrixProductState(tensors=tuple(ts))
    i, j = term.support
    factors = _product_factors(term.matrix, d)
    na = len(factors)
    dl_i, _, dr_i = ts[i].shape
    new_i = np.zeros((dl_i, d, na * dr_i), dtype=complex)
    for a, (p, _) in enumerate(factors):
        new_i[:, :, a * dr_i : (a + 1) * dr_i] = np.einsum("pq,lqr->lpr", p, ts[i])
    ts[i] = new_i
    for k in range(i + 1, j):
        dl, _, dr = ts[k].shape
        new_k = np.zeros((na * dl, d, na * dr), dtype=complex)
        for a in range(na):
            new_k[a * dl : (a + 1) * dl, :, a * dr : (a + 1) * dr] = ts[k]
        ts[k] = new_k
    dl_j, _, dr_j = ts[j].shape
    new_j = np.zeros((na * dl_j, d, dr_j), dtype=complex)
    for a, (_, q) in enumerate(factors):
        new_j[a * dl_j : (a + 1) * dl_j, :, :] = np.einsum("pq,lqr->lpr", q, ts[j])
    ts[j] = new_j
    return MatrixProductState(tensors=tuple(ts))


def compress(mps, d_cap, tolerance=0.0):
    """Right-canonicalize, then truncate left-to-right.

    The left-to-right SVDs see the state in mixed-canonical form, so the
    recorded per-bond values are the exact Schmidt data of the state being
    truncated at that bond.
    """
    n = mps.n_sites
    d = mps.d
    ts = [t.copy() for t in mps.tensors]
    for i in range(n - 1, 0, -1):
        dl, _, dr = ts[i].shape
        m = ts[i].reshape(dl, d * dr)
        q, r = np.linalg.qr(m.conj().T)
        ts[i] = q.conj().T.reshape(-1, d, dr)
        ts[i - 1] = np.einsum("lpr,rk->lpk", ts[i - 1], r.conj().T)
    bonds = []
    for i in range(n - 1):
        dl, _, dr = ts[i].shape
        m = ts[i].reshape(dl * d, dr)
        u, s, vh = np.linalg.svd(m, full_matrices=False)
        keep = int(min(d_cap, max(1, int(np.sum(s > tolerance)))))
        kept = s[:keep]
        bonds.append(
            BondRecord(
                bond=i + 1,
                kept=kept.copy(),
                delta2=float(np.sum(s[keep:] ** 2)),
                zeta=float(np.sum(kept)),
            )
        )
        ts[i] = u[:, :keep].reshape(dl, d, keep)
        carry = kept[:, None] * vh[:keep]
        ts[i + 1] = np.einsum("ab,bpr->apr", carry, ts[i + 1])
    out = MatrixProductState(tensors=tuple(ts), canonical_center=n - 1)
    return out, CompressionRecord(bonds=tuple(bonds))


def mps_inner(a, b):
    """<a|b> by transfer contraction."""
    if a.n_sites != b.n_sites or a.d != b.d:
        raise MismatchError("MPS shapes differ")
    env = np.ones((1, 1), dtype=complex)
    for ta, tb in zip(a.tensors, b.tensors):
        env = np.einsum("xy,xps,ypr->sr", env, ta.conj(), tb)
    return complex(env[0, 0])


def mps_norm(mps):
    return math.sqrt(max(0.0, mps_inner(mps, mps).real))


def local_expectation(mps, term):
    """<psi|h_Z|psi> in O(n D^3) by transfer contraction with the operator
    inserted at its support (product-factor channel for two-site terms)."""
    if len(term.support) > 2:
        raise UnsupportedLocalityError(f"support size {len(term.support)} > 2")
    d = mps.d
    if len(term.support) == 1:
        (i,) = term.support
        env = np.ones((1, 1), dtype=complex)
        for k, t in enumerate(mps.tensors):
            if k == i:
                env = np.einsum("xy,xqs,qp,ypr->sr", env, t.conj(), term.matrix, t)
            else:
                env = np.einsum("xy,xps,ypr->sr", env, t.conj(), t)
        return complex(env[0, 0])
    i, j = term.support
    factors = _product_factors(term.matrix, d)
    na = len(factors)
    env = np.ones((1, 1), dtype=complex)
    env3 = None
    for k, t in enumerate(mps.tensors):
        if k < i:
            env = np.einsum("xy,xps,ypr->sr", env, t.conj(), t)
        elif k == i:
            ps = np.stack([p for p, _ in factors])
            env3 = np.einsum("xy,xqs,aqp,ypr->asr", env, t.conj(), ps, t)
        elif k < j:
            env3 = np.einsum("axy,xps,ypr->asr", env3, t.conj(), t)
        elif k == j:
            qs = np.stack([q for _, q in factors])
            env = np.einsum("axy,xqs,aqp,ypr->sr", env3, t.conj(), qs, t)
        else:
            env = np.einsum("xy,xps,ypr->sr", env, t.conj(), t)
    return complex(env[0, 0])


def product_mps(dims_or_n, d=None, local_vectors=None):
    """Bond-dimension-1 state from per-site vectors (default all-zeros basis)."""
    if isinstance(dims_or_n, int):
        n = dims_or_n
        if d is None:
            raise ValueError("physical dimension required")
    else:
        n = len(dims_or_n)
        d = dims_or_n[0]
    ts = []
    for i in range(n):
        if local_vectors is None:
            v = np.zeros(d, dtype=complex)
            v[0] = 1.0
        else:
            v = np.asarray(local_vectors[i], dtype=complex)
        ts.append(v.reshape(1, d, 1))
    return MatrixProductState(tensors=tuple(ts))


def mps_to_json(mps):
    return {
        "n": mps.n_sites,
        "d": mps.d,
        "tensors": [
            {
                "shape": list(t.shape),
                "entries": [encode_complex(x) for x in t.reshape(-1)],
            }
            for t in mps.tensors
        ],
    }


def mps_from_json(obj):
    ts = []
    for tj in obj["tensors"]:
        flat = np.array([decode_complex(s) for s in tj["entries"]], dtype=complex)
        ts.append(flat.reshape(tj["shape"]))
    return MatrixProductState(tensors=tuple(ts))
