"""Finite-depth bounds for the pressure P(q) = lim (1/n) log sum_{|J|=n} ||M_J||^q.

Upper bounds come from sub-additivity: P(q) = inf_m a_m / m with
a_m = log Z_m.  Lower bounds are the maximum over these routes:

``periodic``
    P(q) >= (q/m) log rho(M_J) for any word J of length m.
``min_singular``
    P(q) >= (1/m) log sum_{|K|=m} sigma_min(M_K)^q, since
    ||A B|| >= ||A|| sigma_min(B).
``psd_cone`` (even integer q only)
    with N_i = M_i^{(x) q/2} and S_r = sum_{|J|=r} N_J N_J^*, the map
    X -> sum_i N_i X N_i^* is order preserving, so S_n >= c S_r gives
    P(q) >= log(c) / (n - r).
``connecting`` (opt-in)
    (a_m + q log D - log(k+1)) / (m+k) given an irreducibility certificate
    and a connecting estimate (k, D).  Conditional when (k, D) is empirical.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .decomp import ConnectingEstimate, connecting_constant
from .errors import BudgetExceeded, InputError, NumericalFailure, PreconditionError
from .matfam import MatrixFamily, check_norm
from .words import DEFAULT_BUDGET, iter_level, logsumexp, log_add, safe_log

PSD_MAX_DIM = 64
SPECTRAL_BUDGET = 4096
ACHIEVER_SLACK = 1e-12
PSD_MAX_COND = 1e12
CROSS_TOL = 1e-10


@dataclass
class PressureEstimate:
    q: float
    norm: str
    upper: float
    lower: float
    depth: int
    per_depth_values: list = field(default_factory=list)  # (m, a_m / m)
    method_tags: tuple = ()
    lower_routes: dict = field(default_factory=dict)
    conditional: bool = False
    trivial: bool = False

    @property
    def width(self):
        if self.upper == -np.inf and self.lower == -np.inf:
            return 0.0
        return self.upper - self.lower

    @property
    def midpoint(self):
        if self.lower == -np.inf:
            return self.upper
        return 0.5 * (self.upper + self.lower)

    def contains(self, value, slack=0.0):
        return self.lower - slack <= value <= self.upper + slack


@dataclass
class BlockPressure:
    estimate: PressureEstimate
    block_estimates: dict  # j -> PressureEstimate, j in Lambda
    achievers: tuple
    trivial: bool = False


@dataclass
class PressureCurve:
    q_grid: tuple
    estimates: list
    achievers: list = None

    def rows(self):
        for i, (q, e) in enumerate(zip(self.q_grid, self.estimates)):
            ach = self.achievers[i] if self.achievers else ()
            yield q, e.lower, e.upper, e.width, ach


def _check_q(q):
    q = float(q)
    if not q > 0 or not np.isfinite(q):
        raise InputError(f"q must be positive and finite, got {q}")
    return q


class _LevelSweep:
    """One pass over Sigma_m collecting what every lower/upper route needs, for many q."""

    def __init__(self, family, qs, norm, budget):
        self.family = family
        self.qs = np.asarray(qs, dtype=float)
        self.norm = norm
        self.budget = budget

    def level(self, m, spectral=True):
        nq = len(self.qs)
        a = np.full(nq, -np.inf)
        smin = np.full(nq, -np.inf)
        best_rho = -np.inf
        for shift, block in iter_level(self.family, m, self.budget):
            sv = np.linalg.svd(block, compute_uv=False)
            if self.norm == "operator":
                lnorm = safe_log(sv[:, 0]) + shift
            else:
                lnorm = safe_log(np.sqrt(np.sum(np.abs(block) ** 2, axis=(1, 2)))) + shift
            lmin = safe_log(sv[:, -1]) + shift
            for i, q in enumerate(self.qs):
                a[i] = log_add(a[i], logsumexp(q * lnorm))
                smin[i] = log_add(smin[i], logsumexp(q * lmin))
            if spectral:
                rho = np.max(np.abs(np.linalg.eigvals(block)), axis=1)
                best_rho = max(best_rho, float(np.max(safe_log(rho))) + shift)
        return a, smin, best_rho


def log_partition_sum(family, q, n, norm="operator", budget=DEFAULT_BUDGET):
    """log sum_{|J|=n} ||M_J||^q, or -inf when every length-n product vanishes."""
    q = _check_q(q)
    check_norm(norm)
    if n < 1:
        raise InputError("n must be >= 1")
    total = -np.inf
    for shift, block in iter_level(family, n, budget):
        if norm == "operator":
            nrm = np.linalg.svd(block, compute_uv=False)[:, 0]
        else:
            nrm = np.sqrt(np.sum(np.abs(block) ** 2, axis=(1, 2)))
        total = log_add(total, logsumexp(q * (safe_log(nrm) + shift)))
    return total


def _psd_cone_lower(family, q, n):
    """Lower bound from S_n >= c S_r in the PSD order, or -inf if not applicable."""
    p = int(round(q / 2))
    mats = family.matrices
    if p == 1:
        N = mats
    else:
        N = []
        for M in mats:
            X = M
            for _ in range(p - 1):
                X = np.kron(X, M)
            N.append(X)
        N = np.array(N)
    D = N.shape[1]
    S = [np.eye(D, dtype=N.dtype)]
    logscale = [0.0]
    for _ in range(n):
        X = np.einsum("aij,jk,alk->il", N, S[-1], N.conj())
        tr = float(np.real(np.trace(X)))
        if tr <= 0:
            return -np.inf
        S.append(X / tr)
        logscale.append(logscale[-1] + np.log(tr))
    best = -np.inf
    Sn = 0.5 * (S[n] + S[n].conj().T)
    for r in range(n):
        Sr = 0.5 * (S[r] + S[r].conj().T)
        w = np.linalg.eigvalsh(Sr)
        if w[0] <= 0 or w[-1] / w[0] > PSD_MAX_COND:
            continue
        try:
            c = sla.eigh(Sn, Sr, eigvals_only=True)[0]
        except (np.linalg.LinAlgError, ValueError):
            continue
        if c <= 0:
            continue
        best = max(best, (np.log(c) + logscale[n] - logscale[r]) / (n - r))
    return best


def _cone_applicable(family, q):
    p = q / 2
    return p == int(p) and p >= 1 and family.d ** int(p) <= PSD_MAX_DIM


def _bounds_many(family, qs, n, norm, budget, connecting=None, psd=True):
    sweep = _LevelSweep(family, qs, norm, budget)
    nq = len(qs)
    a = np.full((n, nq), -np.inf)
    smin = np.full((n, nq), -np.inf)
    rho_rate = -np.inf
    trivial = False
    for m in range(1, max(n, family.d) + 1):
        am, sm, lr = sweep.level(m, spectral=m <= n)
        if m <= n:
            a[m - 1], smin[m - 1] = am, sm
            rho_rate = max(rho_rate, lr / m)
        if np.all(am == -np.inf):
            trivial = True
            break
    out = []
    for i, q in enumerate(qs):
        if trivial:
            out.append(PressureEstimate(q=q, norm=norm, upper=-np.inf, lower=-np.inf, depth=n,
                                        per_depth_values=[(m, float(a[m - 1, i] / m))
                                                          for m in range(1, n + 1)],
                                        method_tags=("trivial",), trivial=True))
            continue
        per = [(m, float(a[m - 1, i] / m)) for m in range(1, n + 1)]
        upper = min(v for _, v in per)
        routes = {"periodic": q * rho_rate,
                  "min_singular": float(max(smin[m - 1, i] / m for m in range(1, n + 1)))}
        if psd and _cone_applicable(family, q):
            routes["psd_cone"] = float(_psd_cone_lower(family, q, n))
        conditional = False
        if connecting is not None:
            k, D = connecting.k, connecting.D
            routes["connecting"] = float(max((a[m - 1, i] + q * np.log(D) - np.log(k + 1)) / (m + k)
                                             for m in range(1, n + 1)))
            conditional = connecting.empirical
        lower = max(routes.values())
        if lower > upper:
            if lower - upper > CROSS_TOL * max(1.0, abs(upper)):
                raise NumericalFailure(f"lower bound {lower!r} exceeds upper bound {upper!r}")
            # rounding in exactly bracketed cases
            lower = upper
        tags = tuple(sorted(routes))
        if conditional:
            tags += ("conditional on (D,k) estimate",)
        out.append(PressureEstimate(q=q, norm=norm, upper=upper, lower=lower, depth=n,
                                    per_depth_values=per, method_tags=tags,
                                    lower_routes=routes, conditional=conditional))
    return out


def pressure_bounds(family, q, n, norm="operator", budget=DEFAULT_BUDGET, certificate=None,
                    connecting=None, psd=True):
    """Rigorous bracket [lower, upper] for P(q) from words of length <= n.

    The connecting route is used only when both ``certificate`` (irreducible)
    and ``connecting`` (a :class:`ConnectingEstimate`) are given.
    """
    q = _check_q(q)
    check_norm(norm)
    if n < 1:
        raise InputError("n must be >= 1")
    if connecting is not None:
        if certificate is None or not certificate.irreducible:
            raise PreconditionError("the connecting route needs an irreducibility certificate")
    return _bounds_many(family, [q], n, norm, budget, connecting, psd)[0]


def _block_connecting(block, cert, connecting, depth):
    if block.d == 1:
        return ConnectingEstimate(k=0, D=1.0, depth=0, empirical=False, empty_connector=True)
    if connecting:
        return connecting_constant(block, depth, certificate=cert)
    return None


def _pressure_via_blocks_many(family, decomp, qs, n, norm, budget, connecting=False,
                              connect_depth=3):
    if decomp.trivial:
        ests = [PressureEstimate(q=q, norm=norm, upper=-np.inf, lower=-np.inf, depth=n,
                                 method_tags=("blocks", "trivial"), trivial=True) for q in qs]
        return [BlockPressure(e, {}, (), trivial=True) for e in ests]
    per_block = {}
    for j in decomp.lambda_:
        block = decomp.diagonal_blocks[j - 1]
        cert = decomp.certificates[j - 1]
        conn = _block_connecting(block, cert, connecting, connect_depth)
        per_block[j] = _bounds_many(block, qs, n, norm, budget, conn)
    results = []
    for i, q in enumerate(qs):
        ests = {j: per_block[j][i] for j in decomp.lambda_}
        lower = max(e.lower for e in ests.values())
        upper = max(e.upper for e in ests.values())
        slack = ACHIEVER_SLACK * max(1.0, abs(lower))
        achievers = tuple(j for j, e in ests.items() if e.upper >= lower - slack)
        per = [(m, max(e.per_depth_values[m - 1][1] for e in ests.values()))
               for m in range(1, n + 1)]
        est = PressureEstimate(q=q, norm=norm, upper=upper, lower=lower, depth=n,
                               per_depth_values=per, method_tags=("blocks",),
                               lower_routes={f"block_{j}": e.lower for j, e in ests.items()},
                               conditional=any(e.conditional for e in ests.values()))
        results.append(BlockPressure(est, ests, achievers))
    return results


def pressure_via_blocks(family, decomp, q, n, norm="operator", budget=DEFAULT_BUDGET,
                        connecting=False):
    """Bracket for P(q) = max_{j in Lambda} P_j(q) and the candidate achiever blocks.

    1x1 diagonal blocks are bracketed exactly (norms are multiplicative there).
    Larger blocks use the connecting route only when ``connecting`` is set.
    """
    q = _check_q(q)
    check_norm(norm)
    return _pressure_via_blocks_many(family, decomp, [q], n, norm, budget, connecting)[0]


def lift_matrix(family, m):
    """Matrix of X -> sum_i N_i X N_i^* with N_i = M_i^{(x) m}, acting on vec(X)."""
    mats = family.matrices
    N = []
    for M in mats:
        X = M
        for _ in range(m - 1):
            X = np.kron(X, M)
        N.append(X)
    return sum(np.kron(X, X.conj()) for X in N)


def pressure_even_spectral(family, m, size_budget=SPECTRAL_BUDGET):
    """log rho of the degree-2m lift; equals the Frobenius-norm P(2m) exactly."""
    m = int(m)
    if m < 1:
        raise InputError("m must be a positive integer")
    dim = family.d ** (2 * m)
    if dim > size_budget:
        raise BudgetExceeded(f"lift dimension {dim} exceeds budget {size_budget}")
    L = lift_matrix(family, m)
    rho = float(np.max(np.abs(np.linalg.eigvals(L))))
    return float(np.log(rho)) if rho > 0 else -np.inf


def pressure_curve(family, q_grid, n, norm="operator", decomp=None, budget=DEFAULT_BUDGET,
                   connecting=False):
    qs = [_check_q(q) for q in q_grid]
    if any(b <= a for a, b in zip(qs, qs[1:])):
        raise InputError("q grid must be strictly increasing")
    check_norm(norm)
    if decomp is None:
        return PressureCurve(tuple(qs), _bounds_many(family, qs, n, norm, budget))
    res = _pressure_via_blocks_many(family, decomp, qs, n, norm, budget, connecting)
    return PressureCurve(tuple(qs), [r.estimate for r in res], [r.achievers for r in res])
