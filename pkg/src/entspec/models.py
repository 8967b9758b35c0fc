"""Model builders: local-term chains with decay metadata, cut splits with
term decompositions, and the closed-form families used to exercise the
entropy-rate machinery (saturation protocol, flat-spectrum burst, toy
two-qubit pump, projector interactions).
"""

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from .errors import EtaTooSmallError, TimeTooLongError, TooLargeError, BadAlphaError
from .ioutil import matrix_from_json, matrix_to_json
from .se_strength import BipartiteOperator, _opnorm
from .spectra import PureState, SchmidtSpectrum, renyi_entropy

DENSE_DIM_CAP = 2 ** 12


def _embed(matrix, support, dims):
    """Embed an operator on `support` (sorted site indices) into the full chain."""
    n = len(dims)
    support = tuple(support)
    rest = tuple(i for i in range(n) if i not in support)
    d_rest = int(np.prod([dims[i] for i in rest])) if rest else 1
    big = np.kron(np.asarray(matrix, dtype=complex), np.eye(d_rest))
    order = list(support) + list(rest)
    shape = [dims[i] for i in order] * 2
    perm = np.argsort(order)
    t = big.reshape(shape).transpose(list(perm) + [n + p for p in perm])
    d = int(np.prod(dims))
    return t.reshape(d, d)


@dataclass(frozen=True)
class LocalTerm:
    """Hermitian term acting on a tuple of sites (matrix on their composite space)."""

    support: tuple
    matrix: np.ndarray
    norm: float = 0.0

    def __post_init__(self):
        support = tuple(sorted(int(i) for i in self.support))
        if len(set(support)) != len(support):
            raise ValueError("repeated site in support")
        m = np.asarray(self.matrix, dtype=complex)
        if np.max(np.abs(m - m.conj().T)) > 1e-12 * max(1.0, np.max(np.abs(m))):
            raise ValueError("term is not Hermitian")
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "norm", _opnorm(m))

    @property
    def diameter(self):
        return self.support[-1] - self.support[0]


@dataclass(frozen=True)
class ChainHamiltonian:
    """Sum of local terms on a line, with locality and decay metadata.

    decay is None, ("power", J0, eta) meaning every pair (i, j) carries total
    coupling weight at most J0 |i-j|^(-eta), or ("finite", ell) meaning no
    term spans more than ell sites.
    """

    n: int
    dims: tuple
    terms: tuple
    decay: Optional[tuple] = None
    k: int = 0
    g: float = 0.0

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if len(dims) != self.n:
            raise ValueError("dims length must equal n")
        terms = tuple(self.terms)
        for t in terms:
            if t.support[-1] >= self.n:
                raise ValueError("term support outside chain")
            d_sup = int(np.prod([dims[i] for i in t.support]))
            if t.matrix.shape != (d_sup, d_sup):
                raise ValueError("term matrix does not match its support dims")
        k = max((len(t.support) for t in terms), default=1)
        per_site = np.zeros(self.n)
        for t in terms:
            for i in t.support:
                per_site[i] += t.norm
        g = float(per_site.max()) if self.n else 0.0
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "g", g)
        self._check_decay()

    def _check_decay(self):
        if self.decay is None:
            return
        kind = self.decay[0]
        if kind == "power":
            _, j0, eta = self.decay
            pair = {}
            for t in self.terms:
                for a in range(len(t.support)):
                    for b in range(a + 1, len(t.support)):
                        key = (t.support[a], t.support[b])
                        pair[key] = pair.get(key, 0.0) + t.norm
            for (i, j), w in pair.items():
                cap = j0 * abs(j - i) ** (-eta)
                if w > cap * (1 + 1e-9):
                    raise ValueError(f"pair ({i},{j}) weight {w} exceeds decay cap {cap}")
        elif kind == "finite":
            _, ell = self.decay
            for t in self.terms:
                if t.diameter > ell:
                    raise ValueError("term diameter exceeds declared range")
        else:
            raise ValueError(f"unknown decay kind {kind!r}")

    @property
    def total_dim(self):
        return int(np.prod(self.dims))

    def dense(self, cap=DENSE_DIM_CAP):
        if self.total_dim > cap:
            raise TooLargeError(f"total dim {self.total_dim} > cap {cap}")
        d = self.total_dim
        h = np.zeros((d, d), dtype=complex)
        for t in self.terms:
            h += _embed(t.matrix, t.support, self.dims)
        return h

    def sparse(self):
        from scipy import sparse

        d = self.total_dim
        h = sparse.csr_matrix((d, d), dtype=complex)
        for t in self.terms:
            h = h + sparse.csr_matrix(_embed(t.matrix, t.support, self.dims))
        return h

    def boundary_strength_cap(self):
        """Uniform cap on the cut-interaction strength, from decay metadata."""
        if self.decay is None:
            raise EtaTooSmallError("chain carries no decay metadata")
        if self.decay[0] == "power":
            from .se_strength import long_range_se_bound

            return long_range_se_bound(self.decay[1], self.decay[2])
        cut_sums = [
            sum(t.norm for t in self.terms if t.support[0] < s <= t.support[-1])
            for s in range(1, self.n)
        ]
        return float(max(cut_sums, default=0.0))


def chain_to_json(chain):
    return {
        "n": chain.n,
        "dims": list(chain.dims),
        "decay": list(chain.decay) if chain.decay else None,
        "terms": [
            {"support": list(t.support), "matrix": matrix_to_json(t.matrix)}
            for t in chain.terms
        ],
    }


def chain_from_json(obj):
    terms = tuple(
        LocalTerm(tuple(t["support"]), matrix_from_json(t["matrix"]))
        for t in obj["terms"]
    )
    decay = tuple(obj["decay"]) if obj.get("decay") else None
    return ChainHamiltonian(n=obj["n"], dims=tuple(obj["dims"]), terms=terms, decay=decay)


@dataclass(frozen=True)
class CutHamiltonian:
    """Exact partition H = H_A + H_B + V at a cut, with V carrying a term
    decomposition whose coefficient sum is at most the chain's strength cap."""

    dims_a: tuple
    dims_b: tuple
    a_terms: tuple
    b_terms: tuple
    boundary_terms: tuple
    v_ab: BipartiteOperator

    @property
    def boundary_norm_sum(self):
        return float(sum(t.norm for t in self.boundary_terms))

    def dense_a(self):
        d = int(np.prod(self.dims_a))
        h = np.zeros((d, d), dtype=complex)
        for t in self.a_terms:
            h += _embed(t.matrix, t.support, self.dims_a)
        return h

    def dense_b(self):
        d = int(np.prod(self.dims_b))
        h = np.zeros((d, d), dtype=complex)
        for t in self.b_terms:
            h += _embed(t.matrix, t.support, self.dims_b)
        return h

    def dense_full(self):
        return (
            np.kron(self.dense_a(), np.eye(int(np.prod(self.dims_b))))
            + np.kron(np.eye(int(np.prod(self.dims_a))), self.dense_b())
            + self.v_ab.matrix
        )


def split_at_cut(chain, s, cap=DENSE_DIM_CAP):
    """Partition a chain at cut s (sites < s vs >= s)."""
    if not 1 <= s <= chain.n - 1:
        raise ValueError(f"cut {s} outside 1..{chain.n - 1}")
    if chain.total_dim > cap:
        raise TooLargeError(f"total dim {chain.total_dim} > cap {cap}")
    dims_a = chain.dims[:s]
    dims_b = chain.dims[s:]
    a_terms, b_terms, boundary = [], [], []
    for t in chain.terms:
        if t.support[-1] < s:
            a_terms.append(t)
        elif t.support[0] >= s:
            b_terms.append(LocalTerm(tuple(i - s for i in t.support), t.matrix))
        else:
            boundary.append(t)
    da, db = int(np.prod(dims_a)), int(np.prod(dims_b))
    v = np.zeros((da * db, da * db), dtype=complex)
    decomposition = []
    for t in boundary:
        za = [i for i in t.support if i < s]
        zb = [i for i in t.support if i >= s]
        dza = int(np.prod([chain.dims[i] for i in za]))
        dzb = int(np.prod([chain.dims[i] for i in zb]))
        r = (
            t.matrix.reshape(dza, dzb, dza, dzb)
            .transpose(0, 2, 1, 3)
            .reshape(dza * dza, dzb * dzb)
        )
        u, sig, vh = np.linalg.svd(r, full_matrices=False)
        for idx in range(sig.size):
            if sig[idx] < 1e-14 * sig[0]:
                break
            ua = u[:, idx].reshape(dza, dza)
            wb = vh[idx, :].conj().reshape(dzb, dzb)
            na, nb = _opnorm(ua), _opnorm(wb)
            pa = _embed(ua / na, za, dims_a)
            qb = _embed(wb / nb, [i - s for i in zb], dims_b)
            coeff = sig[idx] * na * nb
            decomposition.append((coeff, pa, qb))
            v += coeff * np.kron(pa, qb)
    v_ab = BipartiteOperator(dims_a, dims_b, v, tuple(decomposition) or None)
    return CutHamiltonian(
        dims_a=dims_a,
        dims_b=dims_b,
        a_terms=tuple(a_terms),
        b_terms=tuple(b_terms),
        boundary_terms=tuple(boundary),
        v_ab=v_ab,
    )


def _clock_shift(d):
    """Clock and shift pair; reduces to Pauli Z, X at d = 2."""
    omega = np.exp(2j * np.pi / d)
    z = np.diag(omega ** np.arange(d))
    x = np.roll(np.eye(d), 1, axis=0).astype(complex)
    return z, x


def build_long_range_ising(n, d=2, j0=1.0, eta=3.0, hx=0.0, hz=0.0):
    """Power-law coupled clock chain with transverse and longitudinal fields.

    Couplings (Z_i Z_j^dag + h.c.)/2 with weight j0 |i-j|^(-eta); all local
    matrices have unit operator norm, so the decay metadata is tight.
    """
    if eta <= 2:
        raise EtaTooSmallError(f"eta = {eta} <= 2")
    z, x = _clock_shift(d)
    coupling = (np.kron(z, z.conj().T) + np.kron(z.conj().T, z)) / 2
    xh = (x + x.conj().T) / 2
    zh = (z + z.conj().T) / 2
    terms = []
    for i in range(n):
        for j in range(i + 1, n):
            w = j0 * (j - i) ** (-eta)
            terms.append(LocalTerm((i, j), w * coupling))
    if hx or hz:
        fld = hx * xh + hz * zh
        for i in range(n):
            terms.append(LocalTerm((i,), fld))
    return ChainHamiltonian(
        n=n, dims=(d,) * n, terms=tuple(terms), decay=("power", j0, eta)
    )


def build_nearest_neighbor_chain(n, d=2, j=1.0, hx=0.0, hz=0.0):
    """Finite-range counterpart of the clock chain (range-1 couplings only)."""
    z, x = _clock_shift(d)
    coupling = (np.kron(z, z.conj().T) + np.kron(z.conj().T, z)) / 2
    xh = (x + x.conj().T) / 2
    zh = (z + z.conj().T) / 2
    terms = [LocalTerm((i, i + 1), j * coupling) for i in range(n - 1)]
    if hx or hz:
        fld = hx * xh + hz * zh
        terms += [LocalTerm((i,), fld) for i in range(n)]
    return ChainHamiltonian(n=n, dims=(d,) * n, terms=tuple(terms), decay=("finite", 1))


@dataclass(frozen=True)
class SaturationDynamics:
    """Pump interaction J sum_j (|jj><00| + |00><jj|) on a pair of (M+1)-level
    systems, plus the n-pair pulse-and-swap protocol built from it."""

    m_levels: int
    j: float
    n_pairs: int
    v: BipartiteOperator

    @property
    def se_strength_exact(self):
        return float(self.m_levels * self.j)

    def per_pair_state(self, x):
        """exp(-i V x)|00>: closed form from the effective two-level block."""
        m = self.m_levels
        theta = math.sqrt(m) * self.j * x
        amps = np.zeros((m + 1) ** 2, dtype=complex)
        amps[0] = math.cos(theta)
        for jj in range(1, m + 1):
            amps[jj * (m + 1) + jj] = -1j * math.sin(theta) / math.sqrt(m)
        return PureState(dims=(m + 1, m + 1), amps=amps)

    def per_pair_spectrum(self, x):
        m = self.m_levels
        theta = math.sqrt(m) * self.j * x
        coeffs = [abs(math.cos(theta))] + [abs(math.sin(theta)) / math.sqrt(m)] * m
        coeffs = np.sort(np.array(coeffs))[::-1]
        return SchmidtSpectrum(coeffs=coeffs, source_norm=1.0)

    def protocol_entropy_half(self, t):
        z = math.sqrt(self.m_levels) * self.j * t / self.n_pairs
        m = self.m_levels
        return 2.0 * self.n_pairs * math.log(abs(math.cos(z)) + math.sqrt(m) * abs(math.sin(z)))

    def protocol_entropy(self, alpha, t):
        """n_pairs independent pairs: order-alpha entropy is additive."""
        spec = self.per_pair_spectrum(t / self.n_pairs)
        return self.n_pairs * renyi_entropy(spec, alpha)

    def average_rate(self, t):
        if t <= 0:
            raise ValueError("t must be positive")
        return self.protocol_entropy_half(t) / t

    def rate_lower_bound(self, t):
        m, j, n = self.m_levels, self.j, self.n_pairs
        return 2.0 * m * j - 2.0 * m * m * j * j * t / n

    def in_window(self, t):
        m, j, n = self.m_levels, self.j, self.n_pairs
        return t <= n * math.sqrt(m) / (2.0 * m * j)

    def stage_list(self, t):
        """Interleaved schedule: pulse pair j for t/n, then swap in a fresh pair."""
        dt = t / self.n_pairs
        out = []
        for jj in range(self.n_pairs):
            out.append(("pulse", jj, dt))
            if jj < self.n_pairs - 1:
                out.append(("swap", jj, jj + 1))
        return out


def build_saturation_dynamics(m_levels, j, n_pairs):
    if m_levels < 1 or n_pairs < 1:
        raise ValueError("m_levels and n_pairs must be >= 1")
    d = m_levels + 1
    mat = np.zeros((d * d, d * d), dtype=complex)
    decomposition = []
    for jj in range(1, m_levels + 1):
        ket = np.zeros((d, d), dtype=complex)
        ket[jj, 0] = 1.0
        mat += j * np.kron(ket, ket)
        mat += j * np.kron(ket.conj().T, ket.conj().T)
        decomposition.append((j, ket, ket))
        decomposition.append((j, ket.conj().T, ket.conj().T))
    v = BipartiteOperator((d,), (d,), mat, tuple(decomposition))
    return SaturationDynamics(m_levels=m_levels, j=float(j), n_pairs=n_pairs, v=v)


@dataclass(frozen=True)
class UnboundedDynamics:
    """Near-flat Schmidt spectrum reachable at unit cost: weight sin(x) is
    spread across D0 levels after rotation angle x = J t / D0."""

    d0: int
    j: float
    t: float

    @property
    def x(self):
        return self.j * self.t / self.d0

    def spectrum(self):
        x = self.x
        c, s = math.cos(x), math.sin(x)
        coeffs = [c ** self.d0] + [c ** (k - 1) * s for k in range(1, self.d0 + 1)]
        coeffs = np.sort(np.abs(np.array(coeffs)))[::-1]
        return SchmidtSpectrum(coeffs=coeffs, source_norm=1.0)

    def entropy(self, alpha):
        return renyi_entropy(self.spectrum(), alpha)

    def entropy_lower_bound(self, alpha):
        alpha = float(alpha)
        if not 0.0 < alpha < 0.5:
            raise BadAlphaError(f"alpha = {alpha} not in (0, 0.5)")
        jt = self.j * self.t
        return (1.0 - 2.0 * alpha) / (1.0 - alpha) * math.log(self.d0) + math.log(
            alpha * (jt / 2.0) ** (2.0 * alpha)
        ) / (1.0 - alpha)

    def strength_budget(self):
        """J t: time integral of the driving strength."""
        return self.j * self.t


def build_unbounded_dynamics(d0, j, t):
    if d0 < 2:
        raise ValueError("d0 must be >= 2")
    if j * t > 1.0 + 1e-12:
        raise TimeTooLongError(f"J*t = {j * t} > 1")
    return UnboundedDynamics(d0=int(d0), j=float(j), t=float(t))


@dataclass(frozen=True)
class ToyTwoQubit:
    """Two qubits driven by |00><11| + |11><00| from |00>."""

    @property
    def hamiltonian(self):
        h = np.zeros((4, 4), dtype=complex)
        h[0, 3] = h[3, 0] = 1.0
        return h

    @property
    def se_strength_exact(self):
        return 1.0

    def state(self, t):
        amps = np.array([math.cos(t), 0.0, 0.0, -1j * math.sin(t)], dtype=complex)
        return PureState(dims=(2, 2), amps=amps)

    def spectrum(self, t):
        coeffs = np.sort(np.abs(np.array([math.cos(t), math.sin(t)])))[::-1]
        return SchmidtSpectrum(coeffs=coeffs, source_norm=1.0)

    def entropy(self, alpha, t):
        return renyi_entropy(self.spectrum(t), alpha)

    def rate(self, alpha, t):
        """Closed-form d/dt of the order-alpha entropy on (0, pi/2).

        Diverges as t -> 0+ for alpha < 1/2; the alpha = infinity branch has
        a kink at t = pi/4.
        """
        c, s = math.cos(t), math.sin(t)
        if alpha == math.inf:
            return 2.0 * s / c if t < math.pi / 4 else -2.0 * c / s
        alpha = float(alpha)
        if abs(alpha - 1.0) < 1e-12:
            if s == 0.0 or c == 0.0:
                return 0.0
            return 2.0 * s * c * math.log((c / s) ** 2)
        num = c * s ** (2.0 * alpha - 1.0) - s * c ** (2.0 * alpha - 1.0)
        den = c ** (2.0 * alpha) + s ** (2.0 * alpha)
        return 2.0 * alpha / (1.0 - alpha) * num / den

    def rate_limit_zero(self, alpha):
        """Trichotomy of the t -> 0+ rate limit."""
        if alpha == math.inf or alpha > 0.5:
            return 0.0
        if abs(alpha - 0.5) < 1e-12:
            return 2.0
        return math.inf


def build_toy_two_qubit():
    return ToyTwoQubit()


def build_ising_projector_interaction(n_levels):
    """Correlated projector sum_s |ss><ss| on two n-level systems."""
    mat = np.zeros((n_levels ** 2, n_levels ** 2), dtype=complex)
    decomposition = []
    for s in range(n_levels):
        e = np.zeros((n_levels, n_levels), dtype=complex)
        e[s, s] = 1.0
        mat += np.kron(e, e)
        decomposition.append((1.0, e, e))
    return BipartiteOperator((n_levels,), (n_levels,), mat, tuple(decomposition))


def build_swap_interaction(d=2):
    """SWAP on two d-level systems, with a unit-norm product decomposition."""
    mat = np.zeros((d * d, d * d), dtype=complex)
    decomposition = []
    for a in range(d):
        for b in range(d):
            e_ab = np.zeros((d, d), dtype=complex)
            e_ab[a, b] = 1.0
            e_ba = np.zeros((d, d), dtype=complex)
            e_ba[b, a] = 1.0
            mat += np.kron(e_ab, e_ba)
            decomposition.append((1.0, e_ab, e_ba))
    return BipartiteOperator((d,), (d,), mat, tuple(decomposition))


def product_state(dims, local_vectors):
    """Tensor product of per-site vectors."""
    amps = np.array([1.0], dtype=complex)
    for d, v in zip(dims, local_vectors):
        v = np.asarray(v, dtype=complex).reshape(d)
        amps = np.kron(amps, v)
    return PureState(dims=tuple(dims), amps=amps)


def basis_product_state(dims, indices):
    vecs = []
    for d, i in zip(dims, indices):
        v = np.zeros(d, dtype=complex)
        v[i] = 1.0
        vecs.append(v)
    return product_state(dims, vecs)


def random_product_state(dims, rng):
    vecs = []
    for d in dims:
        v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        vecs.append(v / np.linalg.norm(v))
    return product_state(dims, vecs)


def random_dense_instance(rng, dim_cap=256, max_local=16, n_terms=4):
    """Random H_A + H_B + V with a Hermitian unit-norm term decomposition.

    Returns (cut Hamiltonian pieces as dense matrices, V as BipartiteOperator,
    random product initial state).
    """
    while True:
        da = int(rng.integers(2, max_local + 1))
        db = int(rng.integers(2, max_local + 1))
        if da * db <= dim_cap:
            break

    def rand_herm(d):
        m = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        return (m + m.conj().T) / 2

    h_a = rand_herm(da)
    h_b = rand_herm(db)
    mat = np.zeros((da * db, da * db), dtype=complex)
    decomposition = []
    for _ in range(n_terms):
        p = rand_herm(da)
        q = rand_herm(db)
        p /= _opnorm(p)
        q /= _opnorm(q)
        coeff = float(rng.uniform(0.1, 2.0))
        mat += coeff * np.kron(p, q)
        decomposition.append((coeff, p, q))
    v = BipartiteOperator((da,), (db,), mat, tuple(decomposition))
    h_full = np.kron(h_a, np.eye(db)) + np.kron(np.eye(da), h_b) + mat
    state = random_product_state((da, db), rng)
    return h_full, v, state
