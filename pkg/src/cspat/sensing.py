"""Binary compressed-sensing measurement matrices and their empirical verifiers.

Three random constructions are supported, plus a row-subset of the identity
for staging and tests:

* bernoulli          -- dense, i.i.d. entries from {-1, +1},
* hadamard_subsampled -- m uniformly chosen rows of the orthonormal Hadamard
                         matrix (applied through the fast transform),
* expander           -- adjacency matrix of a random left d-regular bipartite
                         graph: exactly d ones per column at distinct rows,
* identity_subset    -- m rows of the n x n identity.

Randomness comes from numpy's PCG64 generator seeded through SeedSequence, so
identical (kind, m, n, d, seed) reproduce bit-identical matrices on any
platform.  Row sets are sampled without replacement by partial Fisher-Yates.

The empirical Appendix verifiers (restricted-isometry constant delta_s and
expansion constant theta_s) enumerate supports exhaustively and are only
available at small sizes.
"""

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
import scipy.sparse

from .errors import ConfigError, NumericError
from .grids import TimeGrid

BERNOULLI = "bernoulli"
HADAMARD = "hadamard_subsampled"
EXPANDER = "expander"
IDENTITY_SUBSET = "identity_subset"

KINDS = (BERNOULLI, HADAMARD, EXPANDER, IDENTITY_SUBSET)

_NOISE_TAG = 0x6E6F6973  # stream-splitting constant for measurement noise
_POWER_TAG = 0x706F7765  # stream-splitting constant for power iteration


def _rng(*entropy):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def _sample_without_replacement(rng, population, k):
    """k distinct values from range(population) by partial Fisher-Yates."""
    pool = np.arange(population)
    for i in range(k):
        j = int(rng.integers(i, population))
        pool[i], pool[j] = pool[j], pool[i]
    return pool[:k].copy()


@dataclass
class MeasurementMatrix:
    """Binary m x n measurement matrix with a multiplicative scale factor.

    Payload by kind: `entries` holds dense signed-binary values (bernoulli),
    `rows` the selected row indices (hadamard_subsampled, identity_subset),
    `columns` an (n, d) array of row indices per column (expander).
    """

    kind: str
    m: int
    n: int
    d: int = 0
    seed: int = 0
    scale: float = 1.0
    entries: np.ndarray = None
    rows: np.ndarray = None
    columns: np.ndarray = None
    _sigma_raw: float = field(default=None, repr=False, compare=False)
    _sparse: object = field(default=None, repr=False, compare=False)
    _sparse_t: object = field(default=None, repr=False, compare=False)
    _dense_float: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown matrix kind {self.kind!r}")
        if not 1 <= self.m <= self.n:
            raise ConfigError("need 1 <= m <= n")
        if self.scale <= 0:
            raise ConfigError("scale must be positive")
        if self.kind == EXPANDER:
            self.columns = np.asarray(self.columns, dtype=np.uint32)
            if self.columns.shape != (self.n, self.d):
                raise ConfigError("expander payload must be (n, d) row indices")

    # -- application ----------------------------------------------------

    def _bernoulli_float(self):
        if self._dense_float is None:
            self._dense_float = self.entries.astype(float)
        return self._dense_float

    def _expander_csr(self):
        if self._sparse is None:
            rows = self.columns.ravel()
            cols = np.repeat(np.arange(self.n), self.d)
            mat = scipy.sparse.csr_matrix(
                (np.ones(self.n * self.d), (rows, cols)), shape=(self.m, self.n)
            )
            self._sparse = mat
            self._sparse_t = scipy.sparse.csr_matrix(mat.T)
        return self._sparse, self._sparse_t

    def apply(self, x):
        """A @ x for a length-n vector or (n, k) slice stack, scale included."""
        x = np.asarray(x, dtype=float)
        squeeze = x.ndim == 1
        x2 = x[:, None] if squeeze else x
        if x2.shape[0] != self.n:
            raise ConfigError(f"operand has {x2.shape[0]} rows, matrix has n = {self.n}")
        if self.kind == BERNOULLI:
            y = self._bernoulli_float() @ x2
        elif self.kind == HADAMARD:
            y = hadamard_apply(x2)[self.rows]
        elif self.kind == IDENTITY_SUBSET:
            y = x2[self.rows]
        else:
            mat, _ = self._expander_csr()
            y = mat @ x2
        y = self.scale * y
        return y[:, 0] if squeeze else y

    def apply_adjoint(self, y):
        """A.T @ y, scale included."""
        y = np.asarray(y, dtype=float)
        squeeze = y.ndim == 1
        y2 = y[:, None] if squeeze else y
        if y2.shape[0] != self.m:
            raise ConfigError(f"operand has {y2.shape[0]} rows, matrix has m = {self.m}")
        if self.kind == BERNOULLI:
            x = self._bernoulli_float().T @ y2
        elif self.kind == HADAMARD:
            full = np.zeros((self.n, y2.shape[1]))
            full[self.rows] = y2
            x = hadamard_apply(full)
        elif self.kind == IDENTITY_SUBSET:
            x = np.zeros((self.n, y2.shape[1]))
            x[self.rows] = y2
        else:
            _, mat_t = self._expander_csr()
            x = mat_t @ y2
        x = self.scale * x
        return x[:, 0] if squeeze else x

    def to_dense(self):
        """Dense float matrix, scale included."""
        if self.kind == BERNOULLI:
            return self.scale * self.entries.astype(float)
        if self.kind == HADAMARD:
            return self.scale * dense_hadamard(self.n)[self.rows]
        if self.kind == IDENTITY_SUBSET:
            out = np.zeros((self.m, self.n))
            out[np.arange(self.m), self.rows] = self.scale
            return out
        mat, _ = self._expander_csr()
        return self.scale * mat.toarray()

    def with_scale(self, scale):
        return MeasurementMatrix(
            kind=self.kind, m=self.m, n=self.n, d=self.d, seed=self.seed,
            scale=scale, entries=self.entries, rows=self.rows, columns=self.columns,
            _sigma_raw=self._sigma_raw,
        )

    def operator_norm(self):
        """2-norm of the scaled matrix (power iteration, cached)."""
        if self._sigma_raw is None:
            self._sigma_raw = _power_iteration_sigma(self)
        return self.scale * self._sigma_raw


def build_bernoulli(m, n, seed):
    """Dense i.i.d. +-1 matrix."""
    if not 1 <= m <= n:
        raise ConfigError("need 1 <= m <= n")
    rng = _rng(seed)
    entries = (2 * rng.integers(0, 2, size=(m, n), dtype=np.int8) - 1).astype(np.int8)
    return MeasurementMatrix(kind=BERNOULLI, m=m, n=n, seed=seed, entries=entries)


def build_subsampled_hadamard(m, n, seed):
    """m uniformly chosen distinct rows of the orthonormal Hadamard matrix."""
    if n & (n - 1) or n < 1:
        raise ConfigError("Hadamard size must be a power of two")
    if not 1 <= m <= n:
        raise ConfigError("need 1 <= m <= n")
    rng = _rng(seed)
    rows = np.sort(_sample_without_replacement(rng, n, m)).astype(np.uint32)
    return MeasurementMatrix(kind=HADAMARD, m=m, n=n, seed=seed, rows=rows)


def build_expander(m, n, d, seed):
    """Adjacency matrix of a random left d-regular bipartite graph."""
    if not 1 <= d <= m:
        raise ConfigError("need 1 <= d <= m")
    if m > n:
        raise ConfigError("need m <= n")
    rng = _rng(seed)
    columns = np.empty((n, d), dtype=np.uint32)
    for i in range(n):
        columns[i] = np.sort(_sample_without_replacement(rng, m, d))
    return MeasurementMatrix(kind=EXPANDER, m=m, n=n, d=d, seed=seed, columns=columns)


def build_identity_subset(m, n, seed=None, rows=None):
    """m rows of the n x n identity; random without replacement when seeded,
    the first m rows otherwise."""
    if not 1 <= m <= n:
        raise ConfigError("need 1 <= m <= n")
    if rows is not None:
        rows = np.asarray(rows, dtype=np.uint32)
        if rows.shape != (m,) or len(np.unique(rows)) != m or rows.max() >= n:
            raise ConfigError("rows must be m distinct indices below n")
    elif seed is not None:
        rows = np.sort(_sample_without_replacement(_rng(seed), n, m)).astype(np.uint32)
    else:
        rows = np.arange(m, dtype=np.uint32)
    return MeasurementMatrix(kind=IDENTITY_SUBSET, m=m, n=n, seed=seed or 0, rows=rows)


# -- fast Hadamard transform ----------------------------------------------


def hadamard_apply(x):
    """Orthonormal Walsh-Hadamard transform along axis 0 (n a power of two).

    Implements the 1/sqrt(2)-normalized block recursion as an in-place
    butterfly; n log n operations per column.
    """
    x = np.array(x, dtype=float)
    n = x.shape[0]
    if n < 1 or n & (n - 1):
        raise ConfigError("Hadamard transform needs a power-of-two length")
    squeeze = x.ndim == 1
    y = x[:, None] if squeeze else x
    h = 1
    while h < n:
        blocks = y.reshape(n // (2 * h), 2, h, -1)
        top = blocks[:, 0] + blocks[:, 1]
        bot = blocks[:, 0] - blocks[:, 1]
        blocks[:, 0] = top
        blocks[:, 1] = bot
        h *= 2
    y *= 1.0 / math.sqrt(n)
    return y[:, 0] if squeeze else y


def dense_hadamard(n):
    """Dense orthonormal Hadamard matrix by the explicit block recursion."""
    if n < 1 or n & (n - 1):
        raise ConfigError("Hadamard size must be a power of two")
    h = np.array([[1.0]])
    while h.shape[0] < n:
        h = np.block([[h, h], [h, -h]]) / math.sqrt(2.0)
    return h


# -- measurement application ------------------------------------------------


@dataclass
class CsData:
    """Compressed measurements y[j, t_k] with the matrix metadata that
    produced them."""

    kind: str
    m: int
    n: int
    d: int
    seed: int
    scale: float
    times: TimeGrid
    values: np.ndarray
    noise_level: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.m, self.times.n_t):
            raise ConfigError("CS values must be (m, n_t)")
        if self.m > self.n:
            raise ConfigError("compressed acquisition needs m <= n")

    def matches(self, matrix):
        return (
            self.kind == matrix.kind
            and self.m == matrix.m
            and self.n == matrix.n
            and self.d == matrix.d
            and self.seed == matrix.seed
        )


def apply_measurement(matrix, pressure, noise_level=0.0, noise_seed=None):
    """y[j, .] = scale * sum_i A[j, i] p[i, .] plus optional Gaussian noise.

    Noise entries are i.i.d. zero-mean with standard deviation
    noise_level * max|p|; the noise stream is derived deterministically from
    the matrix seed unless noise_seed is given.
    """
    if matrix.n != pressure.grid.n:
        raise ConfigError(
            f"matrix has n = {matrix.n} but pressure grid has {pressure.grid.n} detectors"
        )
    values = matrix.apply(pressure.values)
    if noise_level < 0:
        raise ConfigError("noise level must be nonnegative")
    if noise_level > 0:
        rng = _rng(matrix.seed if noise_seed is None else noise_seed, _NOISE_TAG)
        sigma = noise_level * np.max(np.abs(pressure.values))
        values = values + rng.normal(0.0, sigma, size=values.shape)
    return CsData(
        kind=matrix.kind, m=matrix.m, n=matrix.n, d=matrix.d, seed=matrix.seed,
        scale=matrix.scale, times=pressure.times, values=values,
        noise_level=noise_level,
    )


# -- operator norm and rescaling --------------------------------------------


def power_iteration_norm(apply_fn, apply_adjoint_fn, n, seed=0, tol=1e-6, max_iter=1000):
    """Largest singular value via power iteration on A^T A.

    Stops when the Rayleigh estimate changes by less than `tol` relatively.
    """
    rng = _rng(seed, _POWER_TAG)
    v = rng.standard_normal(n)
    norm_v = np.linalg.norm(v)
    if norm_v == 0:
        raise NumericError("degenerate start vector")
    v /= norm_v
    sigma = 0.0
    for _ in range(max_iter):
        w = apply_adjoint_fn(apply_fn(v))
        norm_w = np.linalg.norm(w)
        if norm_w == 0:
            raise NumericError("power iteration hit the null space (zero matrix?)")
        sigma_new = math.sqrt(norm_w)  # ||A^T A v|| with unit v -> sigma^2
        v = w / norm_w
        if abs(sigma_new - sigma) <= tol * sigma_new:
            return sigma_new
        sigma = sigma_new
    return sigma


def _power_iteration_sigma(matrix):
    unscaled = matrix.with_scale(1.0) if matrix.scale != 1.0 else matrix
    return power_iteration_norm(
        unscaled.apply, unscaled.apply_adjoint, matrix.n, seed=matrix.seed
    )


def rescale_to_unit_norm(matrix):
    """Copy of the matrix with scale = 1/sigma_max so its 2-norm is one."""
    sigma = _power_iteration_sigma(matrix)
    if not np.isfinite(sigma) or sigma == 0:
        raise NumericError("cannot rescale a zero matrix")
    out = matrix.with_scale(1.0 / sigma)
    out._sigma_raw = sigma
    return out


# -- empirical Appendix verifiers --------------------------------------------


def estimate_rip_constant(matrix, s):
    """Exact restricted-isometry constant delta_s by exhaustive enumeration.

    delta_s = max over s-subsets S of the largest |eigenvalue(A_S^T A_S) - 1|.
    Only feasible while C(n, s) <= 1e6.
    """
    if not 1 <= s <= matrix.n:
        raise ConfigError("need 1 <= s <= n")
    if math.comb(matrix.n, s) > 10**6:
        raise ConfigError("combinatorial budget exceeded (C(n, s) > 1e6)")
    dense = matrix.to_dense()
    gram = dense.T @ dense
    delta = 0.0
    for subset in combinations(range(matrix.n), s):
        idx = np.array(subset)
        sub = gram[np.ix_(idx, idx)]
        eigs = np.linalg.eigvalsh(sub)
        delta = max(delta, float(np.max(np.abs(eigs - 1.0))))
    return delta


def column_supports(matrix):
    """Per-column row-support sets of a 0/1 matrix (expander or identity)."""
    if matrix.kind == EXPANDER:
        return [frozenset(map(int, matrix.columns[i])) for i in range(matrix.n)]
    if matrix.kind == IDENTITY_SUBSET:
        dense = matrix.to_dense()
        return [frozenset(np.nonzero(dense[:, i])[0].tolist()) for i in range(matrix.n)]
    raise ConfigError("column supports only defined for 0/1 matrices")


def estimate_expander_theta(matrix, s):
    """Exact expansion constant theta_s by exhaustive subset enumeration.

    theta_s = 1 - min over nonempty I with |I| <= s of |N(I)| / (d |I|),
    where N(I) is the union of the column supports over I.
    """
    if matrix.kind != EXPANDER:
        raise ConfigError("theta_s is defined for expander matrices")
    if not 1 <= s <= matrix.n:
        raise ConfigError("need 1 <= s <= n")
    total = sum(math.comb(matrix.n, k) for k in range(1, s + 1))
    if total > 10**6:
        raise ConfigError("combinatorial budget exceeded (> 1e6 subsets)")
    supports = column_supports(matrix)
    worst = 1.0
    for k in range(1, s + 1):
        for subset in combinations(range(matrix.n), k):
            neigh = frozenset().union(*(supports[i] for i in subset))
            worst = min(worst, len(neigh) / (matrix.d * k))
    return 1.0 - worst
