"""Mixed-integer least-squares solvers over finite alphabets.

Everything here minimizes ``||d - R x||^2`` with each entry of ``x``
constrained to a finite label set: exactly (Schnorr-Euchner sphere
decoding, `sesd_real` / `sesd_complex`), blockwise (`block_sesd`), or by
exhaustive enumeration (`brute_force_mils`, the test oracle).
`regularize_and_factor` turns a possibly rank-deficient Hermitian Gram
matrix into a solvable triangular system by an identity shift, which is
legitimate for unit-modulus alphabets because ``||x||^2`` is constant.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import _kernels

DEFAULT_NODE_CAP = 10**8
BRUTE_FORCE_CAP = 2**20


class ZeroPivotError(ValueError):
    """A diagonal entry of the triangular factor is zero at some level."""

    def __init__(self, level, value=0.0):
        self.level = level
        self.value = value
        super().__init__(f"zero diagonal entry at level {level} (value {value})")


class FactorizationError(np.linalg.LinAlgError):
    """Cholesky failed even after regularization."""

    def __init__(self, smallest_pivot):
        self.smallest_pivot = smallest_pivot
        super().__init__(
            f"Cholesky factorization failed; smallest pivot estimate {smallest_pivot:.3e}"
        )


class EnumerationBudgetError(ValueError):
    """Requested exhaustive enumeration exceeds the configured cap."""


@dataclass(frozen=True)
class LabelSet:
    """Finite alphabet for one coordinate of the search.

    Real mode holds quantization labels on the line; complex mode holds
    unit-modulus reflection coefficients on the circle.
    """

    values: np.ndarray
    complex_mode: bool

    def __post_init__(self):
        vals = np.asarray(
            self.values, dtype=np.complex128 if self.complex_mode else np.float64
        )
        object.__setattr__(self, "values", vals)
        if vals.ndim != 1 or vals.size == 0:
            raise ValueError("label set must be a nonempty 1-D sequence")
        if len(set(vals.tolist())) != vals.size:
            raise ValueError("label values must be pairwise distinct")
        if self.complex_mode:
            if np.max(np.abs(np.abs(vals) - 1.0)) > 1e-12:
                raise ValueError("complex labels must be unit modulus within 1e-12")

    @classmethod
    def real(cls, values):
        return cls(np.asarray(values, dtype=np.float64), complex_mode=False)

    @classmethod
    def unit_modulus(cls, values):
        return cls(np.asarray(values, dtype=np.complex128), complex_mode=True)

    def __len__(self):
        return int(self.values.size)


@dataclass(frozen=True)
class TriangularSystem:
    """Upper-triangular system (R, d) for ``min ||d - R x||^2``."""

    R: np.ndarray
    d: np.ndarray

    def __post_init__(self):
        R = np.asarray(self.R)
        d = np.asarray(self.d)
        if R.ndim != 2 or R.shape[0] != R.shape[1]:
            raise ValueError(f"R must be square, got shape {R.shape}")
        if d.ndim != 1 or d.shape[0] != R.shape[0]:
            raise ValueError(
                f"dimension mismatch: R is {R.shape[0]}x{R.shape[1]}, d has length {d.shape[0]}"
            )
        if R.shape[0] and np.any(np.tril(R, -1) != 0):
            raise ValueError("R has nonzero entries below the diagonal")
        diag = np.diagonal(R)
        zero = np.flatnonzero(diag == 0)
        if zero.size:
            raise ZeroPivotError(int(zero[0]))
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "d", d)

    @property
    def n(self):
        return int(self.d.shape[0])


@dataclass
class SolverOutcome:
    """Result of one mixed-integer least-squares solve."""

    x: np.ndarray
    residual_sq: float
    nodes_visited: int
    budget_exhausted: bool = False
    incumbent_trace: list = None


def residual_sq(R, d, x):
    """Canonical ``||d - R x||^2``; shared by every solver so exact
    comparisons between solvers are meaningful."""
    e = np.asarray(d) - np.asarray(R) @ np.asarray(x)
    return float(np.real(np.vdot(e, e)))


def _as_solver_arrays(sys, labels):
    if labels.complex_mode:
        R = np.ascontiguousarray(sys.R, dtype=np.complex128)
        d = np.ascontiguousarray(sys.d, dtype=np.complex128)
    else:
        if np.iscomplexobj(sys.R) or np.iscomplexobj(sys.d):
            raise ValueError("real label set given a complex system")
        R = np.ascontiguousarray(sys.R, dtype=np.float64)
        d = np.ascontiguousarray(sys.d, dtype=np.float64)
    return R, d, np.ascontiguousarray(labels.values)


def _solve(sys, labels, node_cap, record_trace):
    R, d, vals = _as_solver_arrays(sys, labels)
    if record_trace:
        idx, _, nodes, status, raw_trace = _kernels.sesd_core_traced(
            R, d, vals, node_cap
        )
        trace = [(vals[i], residual_sq(R, d, vals[i])) for i, _ in raw_trace]
    else:
        idx, _, nodes, status = _kernels.sesd_core(R, d, vals, node_cap)
        trace = None
    x = vals[idx]
    return SolverOutcome(
        x=x,
        residual_sq=residual_sq(R, d, x),
        nodes_visited=int(nodes),
        budget_exhausted=(status == _kernels.BUDGET_EXCEEDED),
        incumbent_trace=trace,
    )


def sesd_real(sys, labels, node_cap=DEFAULT_NODE_CAP, record_trace=False):
    """Exact minimizer of ``||d - R x||^2`` over a real alphabet.

    Depth-first Schnorr-Euchner search: levels run from the last entry to
    the first, children per level in ascending one-dimensional distance,
    radius shrunk at every incumbent. Ties between equally distant labels
    go to the lower label index.
    """
    if labels.complex_mode:
        raise ValueError("sesd_real requires a real-mode label set")
    return _solve(sys, labels, node_cap, record_trace)


def sesd_complex(sys, labels, node_cap=DEFAULT_NODE_CAP, record_trace=False):
    """Exact minimizer over a unit-modulus complex alphabet.

    Identical search to `sesd_real` with complex one-dimensional
    distances; used for discrete reflection-coefficient optimization where
    real and imaginary parts cannot be decoupled.
    """
    if not labels.complex_mode:
        raise ValueError("sesd_complex requires a complex-mode label set")
    return _solve(sys, labels, node_cap, record_trace)


def sesd(sys, labels, node_cap=DEFAULT_NODE_CAP, record_trace=False):
    """Mode-dispatching front end for the two solvers above."""
    if labels.complex_mode:
        return sesd_complex(sys, labels, node_cap, record_trace)
    return sesd_real(sys, labels, node_cap, record_trace)


def block_sesd(sys, labels, eta, node_cap=DEFAULT_NODE_CAP):
    """Heuristic solver: split the n levels into eta contiguous blocks of
    size n/eta and solve them exactly one at a time, last block first.

    After each block the residual target of the remaining levels is
    reduced by the already-fixed entries, so every subproblem stays
    upper-triangular. The result is exact within each block but only an
    upper bound on the global minimum; eta=1 recovers the full solver.
    """
    n = sys.n
    if eta < 1 or n % eta != 0:
        raise ValueError(f"eta={eta} must be a positive divisor of n={n}")
    nb = n // eta
    x = np.empty(n, dtype=labels.values.dtype)
    nodes = 0
    exhausted = False
    for i in range(eta - 1, -1, -1):
        lo, hi = i * nb, (i + 1) * nb
        dhat = sys.d[lo:hi] - sys.R[lo:hi, hi:] @ x[hi:]
        sub = TriangularSystem(sys.R[lo:hi, lo:hi], dhat)
        out = _solve(sub, labels, node_cap, record_trace=False)
        x[lo:hi] = out.x
        nodes += out.nodes_visited
        exhausted = exhausted or out.budget_exhausted
    return SolverOutcome(
        x=x,
        residual_sq=residual_sq(sys.R, sys.d, x),
        nodes_visited=nodes,
        budget_exhausted=exhausted,
    )


def brute_force_mils(R, d, labels, cap=BRUTE_FORCE_CAP):
    """Exhaustive-enumeration oracle; R may be any square matrix.

    Enumerates all |labels|^n candidates in mixed-radix order (last
    coordinate fastest) and returns the first one attaining the minimum.
    """
    R = np.asarray(R)
    d = np.asarray(d)
    n = d.shape[0]
    if R.shape != (n, n):
        raise ValueError(f"dimension mismatch: R {R.shape} vs d length {n}")
    vals = labels.values
    nlab = vals.size
    total = nlab**n
    if total > cap:
        raise EnumerationBudgetError(
            f"{nlab}^{n} = {total} candidates exceeds cap {cap}"
        )

    best_res = np.inf
    best_x = None
    chunk = 1 << 14
    # index grids generated chunkwise to bound memory
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total))
        digits = np.empty((idx.size, n), dtype=np.int64)
        rem = idx
        for pos in range(n - 1, -1, -1):
            digits[:, pos] = rem % nlab
            rem = rem // nlab
        X = vals[digits]
        E = d[None, :] - X @ R.T
        res = np.real(np.einsum("ij,ij->i", E, E.conj()))
        k = int(np.argmin(res))
        if res[k] < best_res:
            best_res = float(res[k])
            best_x = X[k].copy()
    return SolverOutcome(
        x=best_x,
        residual_sq=residual_sq(R, d, best_x),
        nodes_visited=int(total),
    )


def default_alpha(A):
    """Identity-shift weight for rank-deficient Gram matrices: large enough
    for stable pivots, small relative to the matrix scale."""
    n = A.shape[0]
    tr = float(np.real(np.trace(A)))
    return max(1e-3 * tr / n, np.finfo(np.float64).eps * tr)


def regularize_and_factor(A, t, alpha=None, validate=True):
    """Turn ``min  x^H A x - 2 Re(t^H x)`` into a triangular system.

    Factors ``A + alpha*I = R^H R`` (Cholesky) and returns
    ``TriangularSystem(R, d)`` with ``d = R^{-H} t``, so that the quadratic
    objective equals ``||d - R x||^2 - d^H d``.  For unit-modulus label
    sets the shift only adds the constant ``alpha * n``, leaving the
    argmin untouched.
    """
    A = np.asarray(A)
    t = np.asarray(t)
    n = A.shape[0]
    if A.shape != (n, n) or t.shape != (n,):
        raise ValueError(f"dimension mismatch: A {A.shape}, t {t.shape}")
    if validate:
        scale = max(1.0, float(np.max(np.abs(A))))
        if np.max(np.abs(A - A.conj().T)) > 1e-9 * scale:
            raise ValueError("A is not Hermitian within 1e-9")
        eigmin = float(scipy.linalg.eigvalsh(A, subset_by_index=(0, 0))[0])
        if eigmin < -1e-9 * scale:
            raise ValueError(f"A is not PSD (smallest eigenvalue {eigmin:.3e})")
    if alpha is None:
        alpha = default_alpha(A)
    shifted = A + alpha * np.eye(n, dtype=A.dtype)
    try:
        L = np.linalg.cholesky(shifted)
    except np.linalg.LinAlgError:
        pivot = float(scipy.linalg.eigvalsh(shifted, subset_by_index=(0, 0))[0])
        raise FactorizationError(pivot) from None
    R = L.conj().T
    dvec = scipy.linalg.solve_triangular(L, t, lower=True)
    return TriangularSystem(R, dvec)
