"""Iterative weighted sum-MSE minimization engine.

Block coordinate descent over (W, theta, beta, c): closed-form receiver
gains and weights, discrete precoding by sphere decoding inside a power
bisection on the Lagrange multiplier, and RIS updates either per element
in closed form (continuous) or by sphere decoding over the reflection
codebook (discrete).  The two literature benchmarks, nearest-point
mapping and per-entry coordinate descent, run through the same loop.

Candidate W/theta blocks are accepted only if they do not increase the
weighted sum MSE, which keeps the objective trace monotone even where the
discrete subproblem solutions carry no improvement guarantee.
"""

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import _kernels
from .metrics import sum_rate, total_power
from .mils import default_alpha
from .quantizer import quantize_real

LN2 = math.log(2.0)

PRECODER_STRATEGIES = ("sesd", "infinite", "cd", "np")
RIS_STRATEGIES = ("continuous", "sesd", "cd", "np", "fixed")


@dataclass(frozen=True)
class RisCodebook:
    """Reflection-coefficient alphabet: continuous circle or 2^bits points."""

    bits: int = None  # None means continuous infinite resolution

    def __post_init__(self):
        if self.bits is not None and self.bits < 1:
            raise ValueError(f"bit resolution must be >= 1, got {self.bits}")

    @property
    def continuous(self):
        return self.bits is None

    def values(self):
        """The 2^b unit-modulus coefficients exp(j*m*pi/2^(b-1)).

        Values landing on the four cardinal points are snapped to their
        exact float representations (1, -1, +-1j) so that set membership
        and distance ties behave exactly.
        """
        if self.continuous:
            raise ValueError("continuous codebook has no discrete values")
        m = np.arange(2**self.bits)
        ph = m * (math.pi / 2 ** (self.bits - 1))
        re, im = np.cos(ph), np.sin(ph)
        re = np.where(np.abs(re - np.round(re)) < 1e-12, np.round(re), re)
        im = np.where(np.abs(im - np.round(im)) < 1e-12, np.round(im), im)
        return re + 1j * im


@dataclass(frozen=True)
class EngineConfig:
    """Knobs of the alternating loop."""

    epsilon: float = 1e-4  # stop when |f(l) - f(l-1)| falls below
    max_iters: int = 100
    power_lo: float = 0.99  # accept power in [power_lo*p, p]
    bisection_max_steps: int = 60
    ris_sweeps: int = 20  # inner alternating sweeps over elements
    ris_sweep_tol: float = 1e-6
    eta: int = 1  # RIS block-SESD split; 1 = exact
    precoder_mode: str = "quantized"  # "quantized" or "infinite"
    node_cap: int = 10**8
    cd_sweeps: int = 50  # cap for coordinate-descent benchmarks
    # accept a candidate block only if it does not increase the weighted
    # sum MSE.  Exact W/theta subproblem solutions satisfy this on their
    # own up to the Lagrangian power term; the guard additionally pins the
    # eta>1 heuristic, at the cost of freezing its from-scratch proposals
    # once the incumbent is good.
    monotone_guards: bool = False

    def __post_init__(self):
        if self.epsilon <= 0 or self.max_iters < 1:
            raise ValueError("epsilon must be positive and max_iters >= 1")
        if not (0 < self.power_lo <= 1):
            raise ValueError("power_lo must lie in (0, 1]")
        if self.precoder_mode not in ("quantized", "infinite"):
            raise ValueError(f"unknown precoder_mode {self.precoder_mode!r}")


@dataclass
class WmmseState:
    """Current iterate of the alternating optimization."""

    W: np.ndarray  # M x K precoding matrix
    theta: np.ndarray  # N-vector of reflection coefficients
    beta: np.ndarray  # K receiver gains
    c: np.ndarray  # K positive weights
    e: np.ndarray  # K per-UE MSEs
    mu: float  # Lagrange multiplier of the power constraint
    objective: float  # sum_k (c_k e_k - log2 c_k)
    iteration: int


@dataclass
class IterationRecord:
    """Objective after each block update, for the monotonicity suite."""

    iteration: int
    f_after_w: float
    f_after_theta: float
    f_after_beta: float
    f: float
    sum_rate: float
    power: float
    nodes_precoding: int = 0
    nodes_ris: int = 0
    w_guard_hit: bool = False
    theta_guard_hit: bool = False


@dataclass
class RunInfo:
    """Side information accumulated over a run."""

    nodes_precoding: int = 0
    nodes_ris: int = 0
    power_floor: bool = False
    budget_exceeded: bool = False
    repair_steps: int = 0
    iterations_used: int = 0
    converged: bool = False
    f_init: float = 0.0
    best_iteration: int = 0


def effective_channels(chs, theta):
    """Rows f_k^T = theta^T F_k of the effective BS->UE channels (K x M)."""
    return np.einsum("n,knm->km", theta, chs.F)


def validate_state(state, p_mw, qspec=None, codebook=None):
    """Check the invariants of a finished engine state; raises on violation."""
    if not np.all(np.abs(np.abs(state.theta) - 1.0) <= 1e-12):
        raise AssertionError("theta entries are not unit modulus within 1e-12")
    if codebook is not None and not codebook.continuous:
        if not np.all(np.isin(state.theta, codebook.values())):
            raise AssertionError("theta entries are not members of the codebook")
    if qspec is not None:
        if not (
            np.all(np.isin(np.real(state.W), qspec.labels))
            and np.all(np.isin(np.imag(state.W), qspec.labels))
        ):
            raise AssertionError("precoding entries are not quantizer labels")
    if total_power(state.W) > p_mw * (1.0 + 1e-6):
        raise AssertionError("power budget violated")
    if np.any(state.e <= 0) or np.any(state.c <= 0):
        raise AssertionError("MSEs and weights must stay positive")


def compute_mse_all(W, theta, beta, chs, noise_mw):
    """Per-UE symbol MSE for receiver gains beta."""
    S = effective_channels(chs, theta) @ W  # S[k, i] = theta^T F_k w_i
    row_pow = np.sum(np.abs(S) ** 2, axis=1)
    return (
        np.abs(beta) ** 2 * (row_pow + noise_mw)
        - 2.0 * np.real(beta * np.diagonal(S))
        + 1.0
    )


def compute_mse(k, W, theta, beta_k, chs, noise_mw):
    """MSE of UE k alone (scalar receiver gain beta_k)."""
    S = effective_channels(chs, theta) @ W
    row_pow = float(np.sum(np.abs(S[k, :]) ** 2))
    return float(
        abs(beta_k) ** 2 * (row_pow + noise_mw)
        - 2.0 * np.real(beta_k * S[k, k])
        + 1.0
    )


def optimal_receiver_gains(W, theta, chs, noise_mw):
    """MSE-minimizing gains: conj(desired) over total received power plus noise."""
    S = effective_channels(chs, theta) @ W
    row_pow = np.sum(np.abs(S) ** 2, axis=1)
    return np.conj(np.diagonal(S)) / (row_pow + noise_mw)


def optimal_weights(e):
    """Weights 1 / (ln 2 * e_k) minimizing sum(c e - log2 c)."""
    return 1.0 / (LN2 * np.asarray(e))


def objective_value(c, e):
    """Weighted sum MSE objective sum_k (c_k e_k - log2 c_k)."""
    return float(np.sum(c * e - np.log2(c)))


def precoding_gram(c, beta, fmat, mu):
    """V = sum_i c_i |beta_i|^2 conj(f_i) f_i^T + mu*I and rows v_k = c_k beta_k f_k."""
    M = fmat.shape[1]
    V = np.einsum("k,km,kn->mn", c * np.abs(beta) ** 2, np.conj(fmat), fmat)
    V = V + mu * np.eye(M)
    vrows = (c * beta)[:, None] * fmat
    return V, vrows


def infinite_precoding(mu, c, beta, fmat):
    """Closed-form unconstrained-alphabet precoders w_k = V^-1 conj(v_k)."""
    V, vrows = precoding_gram(c, beta, fmat, mu)
    try:
        cho = scipy.linalg.cho_factor(V)
    except np.linalg.LinAlgError:
        raise np.linalg.LinAlgError(
            "precoding Gram matrix is singular; rerun with mu > 0"
        ) from None
    return scipy.linalg.cho_solve(cho, np.conj(vrows).T)


def real_stack(R, d):
    """Real embedding [[Re, -Im], [Im, Re]] of a complex system.

    Preserves the residual norm exactly: ||stack(d) - stack(R) x_stacked||
    equals ||d - R x|| for x_stacked = [Re x; Im x].
    """
    Rt = np.block(
        [[np.real(R), -np.imag(R)], [np.imag(R), np.real(R)]]
    )
    dt = np.concatenate([np.real(d), np.imag(d)])
    return Rt, dt


def _real_quadratic(V, vrows):
    """Real SPD embedding of the precoding quadratic.

    w^H V w - 2 Re(v^T w) over complex w equals
    wt^T Vt wt - 2 bt^T wt over the stacked real vector wt = [Re w; Im w]
    with bt = [Re v; -Im v].
    """
    Vt = np.block(
        [[np.real(V), -np.imag(V)], [np.imag(V), np.real(V)]]
    )
    Bt = np.concatenate([np.real(vrows).T, -np.imag(vrows).T], axis=0)
    return Vt, Bt


def precode_fixed_mu(mu, c, beta, fmat, labels, node_cap=10**8):
    """Optimal quantized precoders for a fixed multiplier.

    Builds the stacked-real triangular system from the Cholesky factor of
    the real-embedded Gram matrix and sphere-decodes one system per UE.
    Returns (W, nodes, budget_exceeded).
    """
    M = fmat.shape[1]
    K = fmat.shape[0]
    V, vrows = precoding_gram(c, beta, fmat, mu)
    Vt, Bt = _real_quadratic(V, vrows)
    Lc = np.linalg.cholesky(Vt)  # Vt = Lc Lc^T, so Rt = Lc^T is upper triangular
    Rt = np.ascontiguousarray(Lc.T)
    Dt = scipy.linalg.solve_triangular(Lc, Bt, lower=True)
    W = np.empty((M, K), dtype=np.complex128)
    nodes = 0
    exceeded = False
    for k in range(K):
        idx, _, nk, status = _kernels.sesd_core(
            Rt, np.ascontiguousarray(Dt[:, k]), labels, node_cap
        )
        wt = labels[idx]
        W[:, k] = wt[:M] + 1j * wt[M:]
        nodes += int(nk)
        exceeded = exceeded or status == _kernels.BUDGET_EXCEEDED
    return W, nodes, exceeded


def _cd_sweep_real(Rt, dt, labels, x0, max_sweeps):
    """Per-entry exhaustive descent on ||dt - Rt x||^2 from x0.

    One entry at a time is set to its exhaustive minimizer with the others
    fixed; sweeps repeat until nothing changes.  Returns (x, evals).
    """
    n = dt.shape[0]
    x = x0.copy()
    r = dt - Rt @ x
    col_norm = np.sum(Rt**2, axis=0)
    evals = 0
    for _ in range(max_sweeps):
        changed = False
        for j in range(n):
            col = Rt[:, j]
            proj = col @ r
            # residual after x[j] -> x[j] + delta is ||r - col*delta||^2
            deltas = labels - x[j]
            objs = -2.0 * deltas * proj + deltas**2 * col_norm[j]
            evals += labels.size
            b = int(np.argmin(objs))
            if objs[b] < -1e-15 and labels[b] != x[j]:
                r = r - col * deltas[b]
                x[j] = labels[b]
                changed = True
        if not changed:
            break
    return x, evals


def precode_cd_fixed_mu(mu, c, beta, fmat, labels, qspec, max_sweeps=50):
    """Coordinate-descent benchmark for the fixed-mu precoding subproblem.

    Starts each UE from the quantized unconstrained solution and sweeps
    entries with exhaustive per-entry search.
    """
    M, K = fmat.shape[1], fmat.shape[0]
    V, vrows = precoding_gram(c, beta, fmat, mu)
    Vt, Bt = _real_quadratic(V, vrows)
    Lc = np.linalg.cholesky(Vt)
    Rt = np.ascontiguousarray(Lc.T)
    Dt = scipy.linalg.solve_triangular(Lc, Bt, lower=True)
    Winf = infinite_precoding(mu, c, beta, fmat)
    W = np.empty((M, K), dtype=np.complex128)
    evals = 0
    for k in range(K):
        x0 = quantize_real(
            np.concatenate([np.real(Winf[:, k]), np.imag(Winf[:, k])]), qspec
        )
        x, ev = _cd_sweep_real(Rt, np.ascontiguousarray(Dt[:, k]), labels, x0, max_sweeps)
        W[:, k] = x[:M] + 1j * x[M:]
        evals += ev
    return W, evals


def precode_bisection(
    p_mw,
    c,
    beta,
    fmat,
    cfg,
    labels=None,
    qspec=None,
    strategy="sesd",
    mu_hint=None,
):
    """Find (W, mu) meeting the power constraint near equality.

    Total power of the fixed-mu solution is non-increasing in mu (checked
    each step for the exact strategies), so a geometric bracket search
    followed by bisection homes in on the smallest mu with power <= p.
    If even a huge mu cannot push the discrete solution below the budget
    the best effort is returned with ``floor`` set.
    """
    quantized = strategy in ("sesd", "cd")
    gram_scale = float(np.sum(c * np.abs(beta) ** 2 * np.sum(np.abs(fmat) ** 2, axis=1)))
    gram_scale = max(gram_scale / fmat.shape[1], 1e-300)
    mu_floor = 1e-12 * gram_scale

    nodes = 0
    exceeded = False

    def solve(mu):
        nonlocal nodes, exceeded
        if strategy == "sesd":
            W, nk, ex = precode_fixed_mu(mu, c, beta, fmat, labels, cfg.node_cap)
            nodes += nk
            exceeded = exceeded or ex
        elif strategy == "cd":
            W, nk = precode_cd_fixed_mu(mu, c, beta, fmat, labels, qspec, cfg.cd_sweeps)
            nodes += nk
        else:
            W = infinite_precoding(mu, c, beta, fmat)
        return W, total_power(W)

    power_tol = 1e-9 * max(p_mw, 1.0)
    exact = strategy in ("sesd", "infinite")

    mu0 = mu_hint if (mu_hint is not None and mu_hint > mu_floor) else gram_scale
    W0, P0 = solve(mu0)

    lo = hi = None
    if P0 > p_mw:
        lo, Plo, Wlo = mu0, P0, W0
        m = mu0
        for _ in range(cfg.bisection_max_steps):
            m *= 10.0
            W2, P2 = solve(m)
            if exact and P2 > Plo + power_tol:
                raise RuntimeError("transmit power increased with larger mu")
            if P2 <= p_mw:
                hi, Phi, Whi = m, P2, W2
                break
            lo, Plo, Wlo = m, P2, W2
        if hi is None:
            # discrete labels bound the power from below: budget unreachable
            return Wlo, lo, True, nodes, exceeded
    else:
        hi, Phi, Whi = mu0, P0, W0
        m = mu0
        for _ in range(cfg.bisection_max_steps):
            m /= 10.0
            if m < mu_floor:
                break
            W2, P2 = solve(m)
            if exact and P2 + power_tol < Phi:
                raise RuntimeError("transmit power decreased with smaller mu")
            if P2 > p_mw:
                lo, Plo, Wlo = m, P2, W2
                break
            hi, Phi, Whi = m, P2, W2
        if lo is None:
            return Whi, hi, False, nodes, exceeded  # constraint inactive

    steps = 0
    while (
        not (cfg.power_lo * p_mw <= Phi <= p_mw)
        and (hi - lo) > 1e-12 * hi
        and steps < cfg.bisection_max_steps
    ):
        mid = 0.5 * (lo + hi)
        Wm, Pm = solve(mid)
        if exact and (Pm > Plo + power_tol or Pm + power_tol < Phi):
            raise RuntimeError("transmit power not monotone inside the mu bracket")
        if Pm > p_mw:
            lo, Plo, Wlo = mid, Pm, Wm
        else:
            hi, Phi, Whi = mid, Pm, Wm
        steps += 1
        if quantized and np.array_equal(Wlo, Whi):
            break  # the discrete solution is stable across the bracket
    return Whi, hi, False, nodes, exceeded


def ris_quadratic(W, beta, c, chs):
    """Quadratic form (A, t) of the RIS subproblem.

    With u_{k,i} = conj(beta_k * F_k w_i), the weighted sum MSE equals
    theta^H A theta - 2 Re(t^H theta) plus theta-independent terms, where
    A = sum_k c_k sum_i u_{k,i} u_{k,i}^H and t = sum_k c_k u_{k,k}.
    """
    K = chs.F.shape[0]
    N = chs.F.shape[1]
    FW = np.einsum("knm,mi->kni", chs.F, W)  # F_k w_i stacked
    A = np.zeros((N, N), dtype=np.complex128)
    t = np.zeros(N, dtype=np.complex128)
    for k in range(K):
        for i in range(K):
            u = np.conj(beta[k] * FW[k, :, i])
            A += c[k] * np.outer(u, np.conj(u))
            if i == k:
                t += c[k] * u
    return 0.5 * (A + A.conj().T), t  # exact Hermitian symmetrization


def ris_quadratic_objective(A, t, theta):
    """theta^H A theta - 2 Re(t^H theta)."""
    return float(np.real(np.vdot(theta, A @ theta)) - 2.0 * np.real(np.vdot(t, theta)))


def ris_continuous(A, t, theta0, max_sweeps=20, tol=1e-6):
    """Alternating per-element minimization on the unit circle.

    Element n is set to -conj(cn)/|cn| where cn collects its linear
    coefficient in the quadratic form; each update cannot increase the
    objective.  A zero coefficient leaves the element unchanged.  Sweeps
    stop when one full pass changes the objective by less than tol.
    """
    theta = np.asarray(theta0, dtype=np.complex128).copy()
    n = theta.shape[0]
    diag = np.diagonal(A)
    for _ in range(max_sweeps):
        # z[j] = sum_n A[n, j] * conj(theta_n); refreshed per sweep to keep
        # the incremental updates from drifting
        z = A.T @ np.conj(theta)
        delta = 0.0
        for j in range(n):
            cn = z[j] - diag[j] * np.conj(theta[j]) - np.conj(t[j])
            mag = abs(cn)
            if mag == 0.0:
                continue  # any phase is optimal; keep the previous one
            new = -np.conj(cn) / mag
            step = 2.0 * (np.real(new * cn) - np.real(theta[j] * cn))
            if step > 1e-9 * mag:
                raise RuntimeError("RIS element update increased the objective")
            if new != theta[j]:
                z += A[j, :] * (np.conj(new) - np.conj(theta[j]))
                delta += max(-step, 0.0)
                theta[j] = new
        if delta < tol:
            break
    return theta


def ris_discrete(A, t, codebook, eta=1, node_cap=10**8, alpha=None):
    """Optimal (eta=1) or blockwise discrete RIS configuration.

    Shifts A by alpha*I (constant objective offset for unit-modulus sets)
    so the Cholesky factor has strictly positive pivots even when A is the
    rank-deficient sum of K^2 outer products, then sphere-decodes over the
    codebook.  Returns (theta, nodes, budget_exceeded).
    """
    vals = codebook.values()
    N = t.shape[0]
    if eta < 1 or N % eta != 0:
        raise ValueError(f"eta={eta} must divide the element count {N}")
    if alpha is None:
        alpha = default_alpha(A)
    try:
        Lc = np.linalg.cholesky(A + alpha * np.eye(N))
    except np.linalg.LinAlgError:
        pivot = float(scipy.linalg.eigvalsh(A + alpha * np.eye(N), subset_by_index=(0, 0))[0])
        raise np.linalg.LinAlgError(
            f"RIS Gram factorization failed; smallest pivot estimate {pivot:.3e}"
        ) from None
    R = np.ascontiguousarray(Lc.conj().T)
    d = scipy.linalg.solve_triangular(Lc, t, lower=True)
    nb = N // eta
    theta = np.empty(N, dtype=np.complex128)
    nodes = 0
    exceeded = False
    for i in range(eta - 1, -1, -1):
        lo, hi = i * nb, (i + 1) * nb
        dhat = np.ascontiguousarray(d[lo:hi] - R[lo:hi, hi:] @ theta[hi:])
        idx, _, nk, status = _kernels.sesd_core(
            np.ascontiguousarray(R[lo:hi, lo:hi]), dhat, vals, node_cap
        )
        theta[lo:hi] = vals[idx]
        nodes += int(nk)
        exceeded = exceeded or status == _kernels.BUDGET_EXCEEDED
    return theta, nodes, exceeded


def ris_coordinate_descent(A, t, codebook, theta0, max_sweeps=50):
    """Per-element exhaustive search benchmark over the discrete codebook."""
    vals = codebook.values()
    theta = np.asarray(theta0, dtype=np.complex128).copy()
    n = theta.shape[0]
    diag = np.diagonal(A)
    z = A.T @ np.conj(theta)
    evals = 0
    in_codebook = np.isin(theta, vals)  # off-codebook starts are forced in
    for _ in range(max_sweeps):
        changed = False
        for j in range(n):
            cn = z[j] - diag[j] * np.conj(theta[j]) - np.conj(t[j])
            objs = 2.0 * np.real(vals * cn)
            evals += vals.size
            b = int(np.argmin(objs))
            cur = 2.0 * np.real(theta[j] * cn)
            if not in_codebook[j] or (vals[b] != theta[j] and objs[b] < cur - 1e-15):
                z += A[j, :] * (np.conj(vals[b]) - np.conj(theta[j]))
                changed = changed or vals[b] != theta[j]
                theta[j] = vals[b]
                in_codebook[j] = True
        if not changed:
            break
    return theta, evals


def nearest_codebook_point(theta, codebook):
    """Map each coefficient to its nearest codebook value (ties to the
    lower label index)."""
    vals = codebook.values()
    dist = np.abs(np.asarray(theta)[:, None] - vals[None, :])
    return vals[np.argmin(dist, axis=1)]


def rzf_init(chs, theta, p_mw, noise_mw):
    """Regularized zero-forcing through the cascaded channel, scaled to
    transmit exactly the power budget."""
    K = chs.G.shape[0]
    GTH = (chs.G * theta[None, :]) @ chs.H  # K x M cascade rows g_k^T Theta H
    gram = GTH @ GTH.conj().T + (K * noise_mw / p_mw) * np.eye(K)
    W = GTH.conj().T @ np.linalg.inv(gram)
    pw = total_power(W)
    if pw == 0.0:
        raise ValueError("RZF initialization produced a zero precoder")
    return W * math.sqrt(p_mw / pw)


def quantize_matrix(W, qspec):
    """Apply the fronthaul quantizer entrywise."""
    return quantize_real(np.real(W), qspec) + 1j * quantize_real(np.imag(W), qspec)


def repair_power(W, qspec, p_mw):
    """Walk quantized entries toward zero until the power budget holds.

    Used after nearest-point quantization, which does not respect the
    budget by itself.  Each step moves the largest-magnitude component to
    the next smaller-magnitude label of the same sign, which strictly
    decreases power; entries already at the minimum magnitude are left
    alone.  Returns (W, steps, feasible).
    """
    labels = np.sort(qspec.labels)
    min_mag = float(np.min(np.abs(labels)))
    W = W.copy()
    steps = 0
    while total_power(W) > p_mw:
        parts = np.concatenate([np.real(W).ravel(), np.imag(W).ravel()])
        mags = np.abs(parts)
        movable = mags > min_mag + 1e-15
        if not np.any(movable):
            return W, steps, False
        j = int(np.argmax(np.where(movable, mags, -np.inf)))
        v = parts[j]
        smaller = labels[np.abs(labels) < abs(v) - 1e-15]
        same_side = smaller[np.sign(smaller) == np.sign(v)]
        if same_side.size:
            newv = same_side[np.argmax(np.abs(same_side))]
        elif np.any(smaller == 0.0):
            newv = 0.0
        else:
            newv = smaller[np.argmin(np.abs(smaller))]
        parts[j] = newv
        half = parts.size // 2
        W = (parts[:half] + 1j * parts[half:]).reshape(W.shape)
        steps += 1
    return W, steps, True


def _draw_theta_init(rng, n):
    """Random initial configuration: i.i.d. uniform phases.

    Used for every RIS strategy; discrete strategies land in the codebook
    at their first update, so only the iterate-0 bookkeeping sees the
    continuous draw.
    """
    return np.exp(1j * rng.uniform(0.0, 2.0 * math.pi, n))


def run(
    chs,
    cfg,
    codebook,
    qspec,
    p_mw,
    noise_mw,
    rng,
    precoder_strategy=None,
    ris_strategy=None,
    theta_fixed=None,
):
    """Run the alternating loop; returns (WmmseState, [IterationRecord], RunInfo).

    Block order per iteration: precoding W (bisection on mu), RIS theta,
    receiver gains beta, weights c.  Stops when the objective changes by
    less than epsilon or after max_iters.  Deterministic given rng state.

    The returned state is the best-objective iterate of the trace: without
    guards the coupled discrete blocks can limit-cycle at coarse
    resolutions, and then the iterate the iteration cap happens to land on
    is arbitrary.  For converged or guarded runs best and last coincide.
    """
    quantized = cfg.precoder_mode == "quantized"
    if precoder_strategy is None:
        precoder_strategy = "sesd" if quantized else "infinite"
    if ris_strategy is None:
        ris_strategy = "continuous" if (codebook is None or codebook.continuous) else "sesd"
    if precoder_strategy not in PRECODER_STRATEGIES:
        raise ValueError(f"unknown precoder strategy {precoder_strategy!r}")
    if ris_strategy not in RIS_STRATEGIES:
        raise ValueError(f"unknown RIS strategy {ris_strategy!r}")
    if not quantized and precoder_strategy in ("sesd", "cd", "np"):
        precoder_strategy = "infinite"
    if (codebook is None or codebook.continuous) and ris_strategy in ("sesd", "cd", "np"):
        ris_strategy = "continuous"

    K, N, M = chs.F.shape
    labels = np.ascontiguousarray(np.sort(qspec.labels)) if quantized else None
    info = RunInfo()

    if theta_fixed is not None:
        theta = np.asarray(theta_fixed, dtype=np.complex128).copy()
    else:
        theta = _draw_theta_init(rng, N)

    # iterate 0 keeps the unconstrained regularized zero-forcing precoder;
    # the first W block replaces it with a feasible quantized one
    W = rzf_init(chs, theta, p_mw, noise_mw)
    beta = optimal_receiver_gains(W, theta, chs, noise_mw)
    c = np.ones(K)
    e = compute_mse_all(W, theta, beta, chs, noise_mw)
    f_prev = objective_value(c, e)
    info.f_init = f_prev
    mu = 0.0
    mu_hint = None
    trace = []
    best = (np.inf, W, theta, beta, c, e, mu, 0)  # best-objective iterate

    for it in range(1, cfg.max_iters + 1):
        rec = IterationRecord(
            iteration=it, f_after_w=0.0, f_after_theta=0.0, f_after_beta=0.0,
            f=0.0, sum_rate=0.0, power=0.0,
        )

        # --- precoding block at the bisection's mu
        fmat = effective_channels(chs, theta)
        W_cand, mu_new, floor, nodes_w, exceeded = precode_bisection(
            p_mw, c, beta, fmat, cfg,
            labels=labels, qspec=qspec,
            strategy=precoder_strategy if precoder_strategy != "np" else "infinite",
            mu_hint=mu_hint,
        )
        info.power_floor = info.power_floor or floor
        info.budget_exceeded = info.budget_exceeded or exceeded
        rec.nodes_precoding = nodes_w
        info.nodes_precoding += nodes_w
        e_cand = compute_mse_all(W_cand, theta, beta, chs, noise_mw)
        # iteration 1 must accept: the incumbent is the unquantized init
        accept = (
            it == 1
            or floor
            or not cfg.monotone_guards
            or float(np.sum(c * e_cand)) <= float(np.sum(c * e))
        )
        if accept:
            W, e, mu, mu_hint = W_cand, e_cand, mu_new, mu_new
        else:
            rec.w_guard_hit = True  # keep the previous feasible precoder
        rec.f_after_w = objective_value(c, e)

        # --- RIS block
        if ris_strategy != "fixed":
            A, t = ris_quadratic(W, beta, c, chs)
            obj_old = ris_quadratic_objective(A, t, theta)
            if ris_strategy in ("continuous", "np"):
                theta_cand = ris_continuous(A, t, theta, cfg.ris_sweeps, cfg.ris_sweep_tol)
            elif ris_strategy == "sesd":
                theta_cand, nodes_r, exceeded = ris_discrete(
                    A, t, codebook, cfg.eta, cfg.node_cap
                )
                rec.nodes_ris = nodes_r
                info.nodes_ris += nodes_r
                info.budget_exceeded = info.budget_exceeded or exceeded
            else:  # cd
                theta_cand, nodes_r = ris_coordinate_descent(
                    A, t, codebook, theta, cfg.cd_sweeps
                )
                rec.nodes_ris = nodes_r
                info.nodes_ris += nodes_r
            if not cfg.monotone_guards or ris_quadratic_objective(A, t, theta_cand) <= obj_old:
                theta = theta_cand
                e = compute_mse_all(W, theta, beta, chs, noise_mw)
            else:
                rec.theta_guard_hit = True
        rec.f_after_theta = objective_value(c, e)

        # --- receiver gains and weights in closed form
        beta = optimal_receiver_gains(W, theta, chs, noise_mw)
        e = compute_mse_all(W, theta, beta, chs, noise_mw)
        rec.f_after_beta = objective_value(c, e)
        c = optimal_weights(e)
        f_new = objective_value(c, e)

        rec.f = f_new
        rec.sum_rate = sum_rate(W, theta, chs, noise_mw)
        rec.power = total_power(W)
        trace.append(rec)

        if f_new < best[0]:
            best = (f_new, W, theta, beta, c, e, mu, it)

        gap = abs(f_new - f_prev)
        f_prev = f_new
        info.iterations_used = it
        if gap < cfg.epsilon:
            info.converged = True
            break

    f_prev, W, theta, beta, c, e, mu, info.best_iteration = best

    # nearest-point benchmarks quantize once after convergence
    if precoder_strategy == "np" and quantized:
        W = quantize_matrix(W, qspec)
        W, rep, ok = repair_power(W, qspec, p_mw)
        info.repair_steps += rep
        info.power_floor = info.power_floor or not ok
    if ris_strategy == "np":
        theta = nearest_codebook_point(theta, codebook)
    if (precoder_strategy == "np" and quantized) or ris_strategy == "np":
        beta = optimal_receiver_gains(W, theta, chs, noise_mw)
        e = compute_mse_all(W, theta, beta, chs, noise_mw)
        c = optimal_weights(e)
        f_prev = objective_value(c, e)

    state = WmmseState(
        W=W, theta=theta, beta=beta, c=c, e=e,
        mu=mu, objective=f_prev, iteration=info.best_iteration,
    )
    return state, trace, info


def nearest_point_run(chs, cfg, codebook, qspec, p_mw, noise_mw, rng, theta_fixed=None):
    """Benchmark: infinite-resolution updates during the loop, one
    quantization at the end (precoding when the codebook is continuous,
    RIS mapping when it is discrete)."""
    if codebook is None or codebook.continuous:
        return run(
            chs, cfg, codebook, qspec, p_mw, noise_mw, rng,
            precoder_strategy="np", ris_strategy="continuous", theta_fixed=theta_fixed,
        )
    return run(
        chs, cfg, codebook, qspec, p_mw, noise_mw, rng,
        precoder_strategy="sesd", ris_strategy="np", theta_fixed=theta_fixed,
    )


def coordinate_descent_run(chs, cfg, codebook, qspec, p_mw, noise_mw, rng, theta_fixed=None):
    """Benchmark: per-entry exhaustive sweeps inside every iteration."""
    if codebook is None or codebook.continuous:
        return run(
            chs, cfg, codebook, qspec, p_mw, noise_mw, rng,
            precoder_strategy="cd", ris_strategy="continuous", theta_fixed=theta_fixed,
        )
    return run(
        chs, cfg, codebook, qspec, p_mw, noise_mw, rng,
        precoder_strategy="sesd", ris_strategy="cd", theta_fixed=theta_fixed,
    )


def run_method(method, chs, cfg, codebook, qspec, p_mw, noise_mw, rng):
    """Dispatch one experiment-harness method name to an engine run.

    ``sesd``: sphere-decoded precoding and RIS update per the codebook.
    ``nearest_point`` / ``coordinate_descent``: the two benchmarks, applied
    to whichever vector the codebook leaves discrete.  ``random_ris``:
    phase shifts drawn once and frozen (rough-surface scattering).
    """
    if method == "sesd":
        return run(chs, cfg, codebook, qspec, p_mw, noise_mw, rng)
    if method == "nearest_point":
        return nearest_point_run(chs, cfg, codebook, qspec, p_mw, noise_mw, rng)
    if method == "coordinate_descent":
        return coordinate_descent_run(chs, cfg, codebook, qspec, p_mw, noise_mw, rng)
    if method == "random_ris":
        n = chs.F.shape[1]
        theta = np.exp(1j * rng.uniform(0.0, 2.0 * math.pi, n))
        return run(
            chs, cfg, codebook, qspec, p_mw, noise_mw, rng,
            ris_strategy="fixed", theta_fixed=theta,
        )
    raise ValueError(f"unknown method {method!r}")
