"""Singular value function phi^q, its pressure P^phi and the affinity dimension.

phi^q(M) = a_1 ... a_k a_{k+1}^(q-k) for 0 <= q < d (k = floor q) and
|det M|^(q/d) for q >= d, where a_1 >= ... >= a_d are the singular values.
Everything is kept in the log domain.

Lower bounds for P^phi(q):

``periodic``   (1/m) psi^q(J), psi^q built from eigenvalue moduli of M_J in
               place of singular values (the limit of (1/k) log phi^q(M_J^k)).
``min_singular`` (1/m) log sum_{|K|=m} a_d(M_K)^q, from a_i(AB) >= a_i(A) a_d(B).
``determinant``  log sum_i |det M_i|^(q/d); exact for q >= d.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, NumericalFailure, PreconditionError
from .ergodic import Mixture, PeriodicOrbit, _check_alphabet
from .matfam import (ZERO_TOL, as_matrix, exterior_power, numerical_rank, op_norm,
                     singular_values, word_product)
from .pressure import PressureEstimate
from .words import DEFAULT_BUDGET, check_budget, iter_level, logsumexp

SEARCH_FACTOR = 2  # affinity search runs over [0, SEARCH_FACTOR * d]
MAX_BISECT = 200


@dataclass(frozen=True)
class SvfValue:
    q: float
    log_value: float

    @property
    def value(self):
        return float(np.exp(self.log_value))


def _check_q(q):
    q = float(q)
    if not q >= 0 or not np.isfinite(q):
        raise InputError(f"q must be a finite non-negative number, got {q}")
    return q


def _log_sv(sv):
    """log of singular values with those below the zero threshold mapped to -inf."""
    sv = np.asarray(sv, dtype=float)
    top = np.max(sv, axis=-1, keepdims=True)
    with np.errstate(divide="ignore"):
        out = np.log(sv)
    return np.where(sv > ZERO_TOL * np.maximum(1.0, top), out, -np.inf)


def log_phi_from_logs(log_s, q):
    """log phi^q from log singular values (or log eigenvalue moduli) sorted descending.

    Works on the last axis, so ``log_s`` may be a stack of shape (..., d).
    """
    log_s = np.asarray(log_s, dtype=float)
    d = log_s.shape[-1]
    if q >= d:
        return (q / d) * np.sum(log_s, axis=-1)
    k = int(np.floor(q))
    frac = q - k
    out = np.sum(log_s[..., :k], axis=-1)
    if frac > 0:
        out = out + frac * log_s[..., k]
    return out


def phi(M, q):
    """log phi^q(M); -inf when a singular value entering the formula vanishes."""
    q = _check_q(q)
    M = as_matrix(M)
    if M.shape[0] != M.shape[1]:
        raise InputError("phi needs a square matrix")
    return SvfValue(q, float(log_phi_from_logs(_log_sv(singular_values(M)), q)))


@dataclass(frozen=True)
class ExteriorCheck:
    lhs: float
    rhs: float
    gap: float


def exterior_identity_check(M, q):
    """Compare log ||M^{wedge q}|| with log phi^q(M) for integer 1 <= q <= d."""
    M = as_matrix(M)
    d = M.shape[0]
    if int(q) != q or not 1 <= q <= d:
        raise InputError(f"q must be an integer in 1..{d}, got {q}")
    lhs = float(np.log(op_norm(exterior_power(M, int(q)))))
    rhs = phi(M, q).log_value
    gap = 0.0 if lhs == rhs else abs(lhs - rhs)
    return ExteriorCheck(lhs, rhs, float(gap))


def _require_invertible(family):
    for i, M in enumerate(family.matrices, 1):
        sv = singular_values(M)
        if numerical_rank(sv) < family.d:
            raise InputError(f"matrix {i} is singular; phi^q needs invertible matrices")


class SvfTables:
    """Per-level log singular values and log eigenvalue moduli, reused across q."""

    def __init__(self, family, n, budget=DEFAULT_BUDGET):
        if n < 1:
            raise InputError("n must be >= 1")
        _require_invertible(family)
        check_budget(family.ell, n, budget)
        self.family = family
        self.n = n
        self.log_sv = []
        self.log_eig = []
        for m in range(1, n + 1):
            svs, eigs = [], []
            for shift, block in iter_level(family, m, budget):
                svs.append(_log_sv(np.linalg.svd(block, compute_uv=False)) + shift)
                mods = -np.sort(-np.abs(np.linalg.eigvals(block)), axis=1)
                with np.errstate(divide="ignore"):
                    eigs.append(np.log(mods) + shift)
            self.log_sv.append(np.concatenate(svs))
            self.log_eig.append(np.concatenate(eigs))
        self.log_det = np.sum(self.log_sv[0], axis=1)

    def bounds(self, q):
        q = _check_q(q)
        d = self.family.d
        per, best_per, best_min = [], -np.inf, -np.inf
        for m in range(1, self.n + 1):
            b = logsumexp(log_phi_from_logs(self.log_sv[m - 1], q))
            per.append((m, float(b / m)))
            psi = log_phi_from_logs(self.log_eig[m - 1], q)
            best_per = max(best_per, float(np.max(psi)) / m)
            smallest = self.log_sv[m - 1][:, -1]
            # phi^0 = 1 even where a deep product is numerically singular
            terms = np.zeros_like(smallest) if q == 0 else q * smallest
            best_min = max(best_min, logsumexp(terms) / m)
        det = logsumexp((q / d) * self.log_det)
        routes = {"periodic": best_per, "min_singular": best_min, "determinant": float(det)}
        upper = min(v for _, v in per)
        lower = max(routes.values())
        if lower > upper:
            if lower - upper > 1e-10 * max(1.0, abs(upper)):
                raise NumericalFailure(f"P^phi lower bound {lower!r} exceeds upper {upper!r}",
                                       residual=lower - upper)
            lower = upper
        return PressureEstimate(q=q, norm="svf", upper=float(upper), lower=float(lower),
                                depth=self.n, per_depth_values=per, method_tags=("svf",),
                                lower_routes=routes)


def svf_pressure_bounds(family, q, n, budget=DEFAULT_BUDGET):
    """Bracket for P^phi(q) = lim (1/n) log sum_{|J|=n} phi^q(M_J) on an invertible family."""
    return SvfTables(family, n, budget).bounds(q)


def _periodic_energy(family, word, q):
    M = word_product(family, word)
    mods = -np.sort(-np.abs(np.linalg.eigvals(M)))
    with np.errstate(divide="ignore"):
        return float(log_phi_from_logs(np.log(mods), q)) / len(word)


def svf_energy(family, measure, q, n, budget=DEFAULT_BUDGET, closed_form=True):
    """phi^q_*(mu) truncated at depth n; periodic orbits use eigenvalue moduli exactly."""
    q = _check_q(q)
    _require_invertible(family)
    _check_alphabet(family, measure)
    if isinstance(measure, Mixture):
        vals = [svf_energy(family, c, q, n, budget, closed_form) for c in measure.components]
        if any(v == -np.inf for v in vals):
            return -np.inf
        return float(sum(w * v for w, v in zip(measure.weights, vals)))
    if isinstance(measure, PeriodicOrbit) and closed_form:
        return _periodic_energy(family, measure.word, q)
    check_budget(family.ell, n, budget)
    masses = measure.level_masses(n, family.ell)
    chunks = [log_phi_from_logs(_log_sv(np.linalg.svd(b, compute_uv=False)) + s, q)
              for s, b in iter_level(family, n, budget)]
    lp = np.concatenate(chunks)
    pos = masses > 0
    if np.any(lp[pos] == -np.inf):
        return -np.inf
    return float(np.sum(masses[pos] * lp[pos]) / n)


@dataclass
class AffinityResult:
    s_low: float
    s_high: float
    iterations: int
    depth: int
    low_interval: tuple   # (lower, upper) of P^phi at s_low
    high_interval: tuple  # (lower, upper) of P^phi at s_high
    trace: list = field(default_factory=list)  # (s, lower, upper) in evaluation order

    @property
    def width(self):
        return self.s_high - self.s_low

    @property
    def midpoint(self):
        return 0.5 * (self.s_low + self.s_high)


def affinity_dimension(family, tol=1e-6, n_max=8, max_iter=MAX_BISECT, budget=DEFAULT_BUDGET):
    """Certified bracket [s_low, s_high] around the zero of s -> P^phi(s).

    ``n_max`` is the enumeration depth of the pressure bounds.  s_high is
    where the upper bound turns negative (so the dimension is <= s_high);
    s_low is where the lower bound is still >= 0.  Each is found by its own
    bisection, since both bound curves are strictly decreasing in s.
    """
    if not tol > 0:
        raise InputError("tol must be positive")
    _require_invertible(family)
    norms = [op_norm(M) for M in family.matrices]
    if max(norms) >= 1:
        raise InputError(f"affinity dimension needs strict contractions, max norm {max(norms)!r}")
    n = n_max
    while n > 1 and family.ell ** n > budget:
        n -= 1
    tables = SvfTables(family, n, budget)
    trace = []
    cache = {}

    def ev(s):
        if s not in cache:
            e = tables.bounds(s)
            cache[s] = (e.lower, e.upper)
            trace.append((s, e.lower, e.upper))
        return cache[s]

    top = float(SEARCH_FACTOR * family.d)
    if ev(top)[1] >= 0:
        raise NumericalFailure(f"P^phi upper bound is still >= 0 at s = {top}")
    if ev(0.0)[0] < 0:
        raise NumericalFailure("P^phi lower bound is negative at s = 0")

    def bisect(which, lo, hi):
        # invariant: curve(lo) >= 0 > curve(hi)
        it = 0
        while hi - lo > tol / 4 and it < max_iter:
            mid = 0.5 * (lo + hi)
            if ev(mid)[which] >= 0:
                lo = mid
            else:
                hi = mid
            it += 1
        return lo, hi, it

    _, s_high, it_hi = bisect(1, 0.0, top)
    s_low, _, it_lo = bisect(0, 0.0, top)
    return AffinityResult(s_low=s_low, s_high=s_high, iterations=it_hi + it_lo, depth=n,
                          low_interval=ev(s_low), high_interval=ev(s_high), trace=trace)


def svf_submultiplicativity_check(family, trials=100, seed=0, max_len=6):
    """max over random pairs (A, B) and q in [0, d] of log phi(AB) - log phi(A) - log phi(B)."""
    _require_invertible(family)
    if trials < 1:
        raise InputError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    worst = -np.inf
    for _ in range(trials):
        wa = tuple(rng.integers(1, family.ell + 1, size=rng.integers(1, max_len + 1)))
        wb = tuple(rng.integers(1, family.ell + 1, size=rng.integers(1, max_len + 1)))
        A = word_product(family, wa)
        B = word_product(family, wb)
        q = float(rng.uniform(0, family.d))
        v = phi(A @ B, q).log_value - phi(A, q).log_value - phi(B, q).log_value
        worst = max(worst, v)
    if worst == -np.inf:
        raise PreconditionError("no finite phi values were sampled")
    return float(worst)
