"""Finite-level equilibrium states.

nu_{n,q}([I]) = ||M_I||^q / Z_n(q) on Sigma_n, its Cesaro shift-average on
Sigma_m (the finite approximant of the q-equilibrium state), Gibbs-ratio
diagnostics and the one-sided derivatives of P at q.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp as _lse

from .decomp import block_triangularize
from .errors import InputError, PreconditionError
from .matfam import check_norm, format_word, word_from_index, word_index, as_word
from .pressure import _check_q, pressure_bounds, pressure_curve, pressure_via_blocks
from .words import DEFAULT_BUDGET, level_log_norms, logsumexp

NORMALIZATION_TOL = 1e-10


def _lse_axes(x, axis):
    with np.errstate(divide="ignore", invalid="ignore"):
        return _lse(x, axis=axis)


@dataclass(frozen=True, eq=False)
class CylinderDistribution:
    """Probability distribution on Sigma_n, kept as log masses in lexicographic order."""

    level: int
    ell: int
    log_masses: np.ndarray

    def __post_init__(self):
        lm = np.asarray(self.log_masses, dtype=float)
        if lm.shape != (self.ell ** self.level,):
            raise InputError(f"expected {self.ell ** self.level} log masses, got {lm.shape}")
        total = logsumexp(lm)
        if not abs(np.expm1(total)) <= NORMALIZATION_TOL:
            raise InputError(f"masses sum to {np.exp(total)!r}, not 1")
        lm = lm.copy()
        lm.flags.writeable = False
        object.__setattr__(self, "log_masses", lm)

    @property
    def masses(self):
        return np.exp(self.log_masses)

    def mass(self, word):
        word = as_word(word, self.ell)
        if len(word) != self.level:
            raise InputError(f"word length {len(word)} differs from level {self.level}")
        return float(np.exp(self.log_masses[word_index(word, self.ell)]))

    def items(self):
        """(word string, mass, log mass) in lexicographic order."""
        for i, lm in enumerate(self.log_masses):
            yield format_word(word_from_index(i, self.level, self.ell), self.ell), float(np.exp(lm)), float(lm)

    def entropy_rate(self):
        """(1/m) H(dist): an upward-biased estimate of the entropy of the limit state."""
        p = self.masses
        pos = p > 0
        return float(-np.sum(p[pos] * self.log_masses[pos]) / self.level)

    def total_variation(self, other):
        if (other.level, other.ell) != (self.level, self.ell):
            raise InputError("distributions live on different levels")
        return float(0.5 * np.sum(np.abs(self.masses - other.masses)))


def nu_nq(family, q, n, norm="operator", budget=DEFAULT_BUDGET):
    q = _check_q(q)
    check_norm(norm)
    if n < 1:
        raise InputError("n must be >= 1")
    ln = q * level_log_norms(family, n, norm, budget)
    z = logsumexp(ln)
    if z == -np.inf:
        raise PreconditionError(f"every product of length {n} vanishes; nu is undefined")
    return CylinderDistribution(n, family.ell, ln - z)


def marginalize(dist, m):
    if not 1 <= m <= dist.level:
        raise InputError(f"m must lie in 1..{dist.level}, got {m}")
    if m == dist.level:
        return dist
    lm = dist.log_masses.reshape(dist.ell ** m, -1)
    return CylinderDistribution(m, dist.ell, _lse_axes(lm, 1))


def shift_average(dist, m):
    """(1/(n-m+1)) sum_j dist(sigma^-j [I]) over |I| = m."""
    n, ell = dist.level, dist.ell
    if not 1 <= m <= n:
        raise InputError(f"m must lie in 1..{n}, got {m}")
    parts = []
    for j in range(n - m + 1):
        lm = dist.log_masses.reshape(ell ** j, ell ** m, ell ** (n - m - j))
        parts.append(_lse_axes(lm, (0, 2)))
    avg = _lse_axes(np.stack(parts), 0) - np.log(n - m + 1)
    # renormalize away the last few ulps of rounding
    return CylinderDistribution(m, ell, avg - logsumexp(avg))


def cesaro_shift_average(family, q, n, m, norm="operator", budget=DEFAULT_BUDGET):
    """Finite approximant mu_hat_{n,m,q} of the q-equilibrium state on Sigma_m."""
    if not 1 <= m <= n:
        raise InputError(f"need 1 <= m <= n, got m={m}, n={n}")
    return shift_average(nu_nq(family, q, n, norm, budget), m)


@dataclass
class GibbsDiagnostics:
    level: int
    ratio_min: float
    ratio_max: float
    zero_mismatch_count: int
    p_hat: float
    half_width: float
    log_ratios: np.ndarray = field(repr=False, default=None)  # nan where undefined

    @property
    def spread(self):
        return self.ratio_max / self.ratio_min

    def rows(self, ell):
        for i, r in enumerate(self.log_ratios):
            if np.isfinite(r):
                yield format_word(word_from_index(i, self.level, ell), ell), float(np.exp(r))


def gibbs_ratio_stats(family, q, mu_hat, pressure, norm="operator", budget=DEFAULT_BUDGET):
    """Ratios mu_hat([J]) exp(m P_hat) / ||M_J||^q with P_hat the bound midpoint."""
    q = _check_q(q)
    if mu_hat.ell != family.ell:
        raise InputError("distribution and family have different alphabets")
    if pressure.upper == -np.inf:
        raise PreconditionError("pressure is -inf; Gibbs ratios are undefined")
    m = mu_hat.level
    ln = level_log_norms(family, m, norm, budget)
    lm = mu_hat.log_masses
    both = np.isfinite(ln) & np.isfinite(lm)
    mismatch = int(np.sum(np.isfinite(ln) != np.isfinite(lm)))
    p_hat = pressure.midpoint
    half = 0.5 * pressure.width if pressure.lower > -np.inf else np.inf
    logr = np.full(lm.shape, np.nan)
    logr[both] = lm[both] + m * p_hat - q * ln[both]
    if not np.any(both):
        raise PreconditionError("no word has both positive mass and a non-zero product")
    return GibbsDiagnostics(level=m, ratio_min=float(np.exp(np.min(logr[both]))),
                            ratio_max=float(np.exp(np.max(logr[both]))),
                            zero_mismatch_count=mismatch, p_hat=float(p_hat),
                            half_width=float(half), log_ratios=logr)


def state_lyapunov(family, dist, norm="operator", budget=DEFAULT_BUDGET):
    """(1/m) sum mass(J) log ||M_J|| over the words of dist; -inf if a massive word has M_J = 0."""
    ln = level_log_norms(family, dist.level, norm, budget)
    p = dist.masses
    pos = p > 0
    if np.any(ln[pos] == -np.inf):
        return -np.inf
    return float(np.sum(p[pos] * ln[pos]) / dist.level)


def approximant_defect(family, q, dist, pressure, norm="operator", budget=DEFAULT_BUDGET):
    """upper(P(q)) - (q M_hat + h_hat) for a finite-level approximant."""
    lam = state_lyapunov(family, dist, norm, budget)
    if lam == -np.inf:
        return np.inf
    return float(pressure.upper - (q * lam + dist.entropy_rate()))


@dataclass
class EquilibriumDescription:
    q: float
    achiever_blocks: tuple
    extremal_states: dict  # j -> CylinderDistribution on Sigma_m
    block_pressure: object
    note: str = ""

    @property
    def unique(self):
        return len(self.achiever_blocks) == 1


def equilibrium_description(family, decomp, q, n, norm="operator", m=3, budget=DEFAULT_BUDGET):
    """Achiever blocks at q and the finite approximant of each block's equilibrium state.

    The equilibrium set is the convex hull of the listed extremal states.
    """
    q = _check_q(q)
    if decomp.trivial:
        raise PreconditionError("trivial family: P = -inf and there is no equilibrium state")
    m = min(m, n)
    bp = pressure_via_blocks(family, decomp, q, n, norm, budget)
    states = {j: cesaro_shift_average(decomp.diagonal_blocks[j - 1], q, n, m, norm, budget)
              for j in bp.achievers}
    if len(bp.achievers) > 1:
        note = f"{len(bp.achievers)} achiever blocks: the equilibrium set is their convex hull"
    else:
        note = "unique equilibrium state"
    return EquilibriumDescription(q, bp.achievers, states, bp, note)


@dataclass
class DerivativeCheck:
    q: float
    h: float
    finite_difference: float
    left_slope: float
    right_slope: float
    lyapunov_of_state: float
    gap: float
    state_level: int

    @property
    def kink(self):
        return self.right_slope - self.left_slope


def pressure_derivative_check(family, q, h=1e-3, n=10, norm="operator", m=None, decomp=None,
                              budget=DEFAULT_BUDGET):
    """Central and one-sided slopes of P_hat at q against M_* of the level-m approximant.

    Pressure midpoints come from the block route so that 1x1 blocks are exact;
    a decomposition is computed when none is given.  ``gap`` compares the
    central difference with the state exponent and is not judged here.
    """
    q = _check_q(q)
    if not h > 0 or q - h <= 0:
        raise InputError(f"need h > 0 and q - h > 0, got q={q}, h={h}")
    if decomp is None:
        decomp = block_triangularize(family)
    if decomp.trivial:
        raise PreconditionError("trivial family: P = -inf")
    m = min(m if m is not None else 4, n)
    curve = pressure_curve(family, [q - h, q, q + h], n, norm, decomp=decomp, budget=budget)
    lo, mid, hi = (e.midpoint for e in curve.estimates)
    central = (hi - lo) / (2 * h)
    state = cesaro_shift_average(family, q, n, m, norm, budget)
    lam = state_lyapunov(family, state, norm, budget)
    return DerivativeCheck(q=q, h=h, finite_difference=float(central),
                           left_slope=float((mid - lo) / h), right_slope=float((hi - mid) / h),
                           lyapunov_of_state=lam, gap=float(abs(central - lam)), state_level=m)


def direct_pressure(family, q, n, norm="operator", budget=DEFAULT_BUDGET):
    """Convenience wrapper used by the CLI for the Gibbs plug-in pressure."""
    return pressure_bounds(family, q, n, norm, budget)
