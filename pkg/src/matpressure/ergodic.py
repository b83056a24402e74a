"""Shift-invariant measures on the full shift, entropy and Lyapunov exponents.

Three measure kinds are supported: Bernoulli, the invariant measure on a
periodic orbit, and finite convex combinations of these.  Words are tuples of
1-based symbols.
"""

import re
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, PreconditionError
from .matfam import as_word, batch_norms, check_norm, spectral_radius, word_product
from .words import DEFAULT_BUDGET, check_budget, level_log_norms

PROB_TOL = 1e-12


class ShiftMeasure:
    kind = None
    is_ergodic = True

    def mass(self, word):
        raise NotImplementedError

    def entropy(self):
        raise NotImplementedError

    def level_masses(self, n, ell):
        """Masses of all words of length n over {1..ell}, lexicographic."""
        raise NotImplementedError

    @property
    def min_alphabet(self):
        raise NotImplementedError


@dataclass(frozen=True)
class Bernoulli(ShiftMeasure):
    p: tuple
    kind = "bernoulli"

    def __post_init__(self):
        p = tuple(float(x) for x in self.p)
        if not p or any(x < 0 or not np.isfinite(x) for x in p):
            raise InputError(f"Bernoulli weights must be non-negative: {p}")
        if abs(sum(p) - 1) > PROB_TOL:
            raise InputError(f"Bernoulli weights must sum to 1, got {sum(p)!r}")
        object.__setattr__(self, "p", p)

    @property
    def min_alphabet(self):
        return len(self.p)

    def mass(self, word):
        word = as_word(word, len(self.p))
        return float(np.prod([self.p[j - 1] for j in word]))

    def entropy(self):
        return float(-sum(x * np.log(x) for x in self.p if x > 0))

    def level_masses(self, n, ell):
        if ell != len(self.p):
            raise InputError(f"Bernoulli measure on {len(self.p)} symbols, family has {ell}")
        p = np.asarray(self.p)
        out = np.ones(1)
        for _ in range(n):
            out = np.multiply.outer(out, p).reshape(-1)
        return out


@dataclass(frozen=True)
class PeriodicOrbit(ShiftMeasure):
    """Uniform measure on the orbit of w^infinity (the Dirac mass when |w| = 1)."""

    word: tuple
    kind = "periodic_dirac"

    def __post_init__(self):
        object.__setattr__(self, "word", as_word(self.word))

    @property
    def min_alphabet(self):
        return max(self.word)

    def rotations(self):
        w = self.word
        return [w[r:] + w[:r] for r in range(len(w))]

    def prefixes(self, n):
        """(word, mass) pairs carrying all the mass at level n."""
        out = {}
        p = len(self.word)
        for rot in self.rotations():
            reps = -(-n // p)
            pre = (rot * reps)[:n]
            out[pre] = out.get(pre, 0.0) + 1.0 / p
        return out

    def mass(self, word):
        word = as_word(word)
        return float(self.prefixes(len(word)).get(word, 0.0))

    def entropy(self):
        return 0.0

    def level_masses(self, n, ell):
        if self.min_alphabet > ell:
            raise InputError(f"periodic word uses symbols beyond 1..{ell}")
        out = np.zeros(ell ** n)
        for w, m in self.prefixes(n).items():
            idx = 0
            for j in w:
                idx = idx * ell + (j - 1)
            out[idx] += m
        return out


@dataclass(frozen=True)
class Mixture(ShiftMeasure):
    weights: tuple
    components: tuple
    kind = "convex_combination"

    def __post_init__(self):
        w = tuple(float(x) for x in self.weights)
        if len(w) != len(self.components) or not w:
            raise InputError("mixture needs one positive weight per component")
        if any(x <= 0 for x in w) or abs(sum(w) - 1) > PROB_TOL:
            raise InputError(f"mixture weights must be positive and sum to 1: {w}")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "components", tuple(self.components))

    @property
    def is_ergodic(self):
        # trusts the kind tag: a genuine mixture is not ergodic
        return len(self.components) == 1 and self.components[0].is_ergodic

    @property
    def min_alphabet(self):
        return max(c.min_alphabet for c in self.components)

    def mass(self, word):
        return float(sum(w * c.mass(word) for w, c in zip(self.weights, self.components)))

    def entropy(self):
        return float(sum(w * c.entropy() for w, c in zip(self.weights, self.components)))

    def level_masses(self, n, ell):
        return sum(w * c.level_masses(n, ell) for w, c in zip(self.weights, self.components))


def cylinder_mass(measure, word):
    return measure.mass(word)


def entropy(measure):
    return measure.entropy()


_NUM = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"


def parse_measure(text):
    """Parse ``bernoulli:0.5,0.5``, ``dirac:121`` or ``mix:0.3*dirac:1+0.7*bernoulli:0.5,0.5``."""
    text = text.strip()
    kind, _, rest = text.partition(":")
    kind = kind.strip().lower()
    if kind == "bernoulli":
        try:
            return Bernoulli(tuple(float(x) for x in rest.split(",")))
        except ValueError:
            raise InputError(f"bad Bernoulli weights in {text!r}") from None
    if kind == "dirac":
        return PeriodicOrbit(as_word(rest))
    if kind == "mix":
        weights, comps = [], []
        for term in re.split(r"\+(?=\s*" + _NUM + r"\s*\*)", rest):
            w, star, spec = term.partition("*")
            if not star:
                raise InputError(f"mixture term {term!r} must look like weight*measure")
            try:
                weights.append(float(w))
            except ValueError:
                raise InputError(f"bad mixture weight {w!r}") from None
            comps.append(parse_measure(spec))
        return Mixture(tuple(weights), tuple(comps))
    raise InputError(f"unknown measure kind {kind!r}")


def format_measure(measure):
    if isinstance(measure, Bernoulli):
        return "bernoulli:" + ",".join(repr(x) for x in measure.p)
    if isinstance(measure, PeriodicOrbit):
        return "dirac:" + "".join(str(j) for j in measure.word)
    return "mix:" + "+".join(f"{w!r}*{format_measure(c)}"
                             for w, c in zip(measure.weights, measure.components))


# -- Lyapunov exponents -------------------------------------------------------

@dataclass
class LyapunovReport:
    value: float
    method: str
    depth: int = None
    per_depth_values: list = field(default_factory=list)  # (m, truncated value at m)
    samples: int = None
    seed: int = None
    std_error: float = None
    zero_count: int = 0
    block_values: dict = None
    W: float = None
    defect: float = None
    ergodic: bool = None

    @property
    def non_ergodic_flag(self):
        return self.ergodic is False


def _weighted_log_mean(masses, lognorms):
    pos = masses > 0
    if np.any(lognorms[pos] == -np.inf):
        return -np.inf
    return float(np.sum(masses[pos] * lognorms[pos]))


def _check_alphabet(family, measure):
    if measure.min_alphabet > family.ell:
        raise InputError(f"measure needs {measure.min_alphabet} symbols, family has {family.ell}")
    if isinstance(measure, Bernoulli) and len(measure.p) != family.ell:
        raise InputError(f"Bernoulli measure on {len(measure.p)} symbols, family has {family.ell}")


def _periodic_level_value(family, measure, m, norm):
    total = 0.0
    for w, mass in measure.prefixes(m).items():
        M = word_product(family, w)
        nrm = float(batch_norms(M[None], norm)[0])
        if nrm == 0:
            return -np.inf
        total += mass * np.log(nrm)
    return total / m


def lyapunov(family, measure, n, norm="operator", closed_form=True, budget=DEFAULT_BUDGET):
    """Lyapunov exponent M_*(mu), truncated at depth n unless a closed form applies.

    Periodic orbits use (1/|w|) log rho(M_w); mixtures are evaluated affinely
    over their components.  ``per_depth_values`` holds the truncated values
    for m = 1..n.
    """
    check_norm(norm)
    if n < 1:
        raise InputError("n must be >= 1")
    _check_alphabet(family, measure)
    if isinstance(measure, Mixture):
        parts = [lyapunov(family, c, n, norm, closed_form, budget) for c in measure.components]
        vals = [p.value for p in parts]
        value = -np.inf if any(v == -np.inf for v in vals) else float(
            sum(w * v for w, v in zip(measure.weights, vals)))
        per = []
        for m in range(1, n + 1):
            vm = [p.per_depth_values[m - 1][1] for p in parts]
            per.append((m, -np.inf if any(v == -np.inf for v in vm) else float(
                sum(w * v for w, v in zip(measure.weights, vm)))))
        methods = sorted({p.method for p in parts})
        return LyapunovReport(value=value, method="affine[" + ",".join(methods) + "]", depth=n,
                              per_depth_values=per, ergodic=measure.is_ergodic)
    if isinstance(measure, PeriodicOrbit):
        per = [(m, _periodic_level_value(family, measure, m, norm)) for m in range(1, n + 1)]
        if closed_form:
            rho = spectral_radius(word_product(family, measure.word))
            value = float(np.log(rho) / len(measure.word)) if rho > 0 else -np.inf
            return LyapunovReport(value=value, method="closed_form", depth=n,
                                  per_depth_values=per, ergodic=True)
        return LyapunovReport(value=per[-1][1], method=f"exact_enumeration({n})", depth=n,
                              per_depth_values=per, ergodic=True)
    check_budget(family.ell, n, budget)
    per = []
    for m in range(1, n + 1):
        masses = measure.level_masses(m, family.ell)
        per.append((m, _weighted_log_mean(masses, level_log_norms(family, m, norm, budget)) / m))
    return LyapunovReport(value=per[-1][1], method=f"exact_enumeration({n})", depth=n,
                          per_depth_values=per, ergodic=measure.is_ergodic)


def lyapunov_mc(family, measure, n, samples, seed=0, norm="operator"):
    """Monte Carlo estimate of M_*(mu) from i.i.d. words of length n."""
    check_norm(norm)
    if not isinstance(measure, Bernoulli):
        raise PreconditionError("Monte Carlo sampling is defined for Bernoulli measures only")
    _check_alphabet(family, measure)
    if samples < 1 or n < 1:
        raise InputError("samples and n must be >= 1")
    rng = np.random.default_rng(seed)
    symbols = rng.choice(family.ell, size=(samples, n), p=np.asarray(measure.p))
    mats = family.matrices
    d = family.d
    X = np.broadcast_to(np.eye(d, dtype=mats.dtype), (samples, d, d)).copy()
    logacc = np.zeros(samples)
    dead = np.zeros(samples, dtype=bool)
    for t in range(n):
        X = X @ mats[symbols[:, t]]
        s = np.sqrt(np.sum(np.abs(X) ** 2, axis=(1, 2)))
        dead |= s == 0
        s[s == 0] = 1.0
        X /= s[:, None, None]
        logacc += np.log(s)
    final = batch_norms(X, norm)
    dead |= final == 0
    vals = np.where(dead, -np.inf, (logacc + np.log(np.where(dead, 1.0, final))) / n)
    zeros = int(np.sum(dead))
    if zeros:
        mean, se = -np.inf, float("nan")
    else:
        mean = float(np.mean(vals))
        se = float(np.std(vals, ddof=1) / np.sqrt(samples)) if samples > 1 else 0.0
    return LyapunovReport(value=mean, method=f"monte_carlo({samples})", depth=n, samples=samples,
                          seed=seed, std_error=se, zero_count=zeros, ergodic=True)


def block_lyapunov(family, decomp, measure, n, norm="operator", closed_form=True,
                   budget=DEFAULT_BUDGET):
    """M_*(mu) together with the diagonal-block exponents A_*^(j)(mu), j in Lambda.

    ``defect`` = |M_* - W| with W = max_j A_*^(j).  It is expected to vanish
    only for ergodic measures.
    """
    full = lyapunov(family, measure, n, norm, closed_form, budget)
    blocks = {}
    for j in decomp.lambda_:
        blocks[j] = lyapunov(decomp.diagonal_blocks[j - 1], measure, n, norm, closed_form,
                             budget).value
    W = max(blocks.values()) if blocks else -np.inf
    if full.value == -np.inf and W == -np.inf:
        defect = 0.0
    else:
        defect = abs(full.value - W)
    full.block_values = blocks
    full.W = W
    full.defect = float(defect)
    full.ergodic = measure.is_ergodic
    return full


def _lyapunov_infimum(family, measure, n, norm, budget):
    """Smallest available upper estimate of M_*: closed form, else min over depths <= n."""
    if isinstance(measure, Mixture):
        vals = [_lyapunov_infimum(family, c, n, norm, budget) for c in measure.components]
        if any(v == -np.inf for v in vals):
            return -np.inf
        return float(sum(w * v for w, v in zip(measure.weights, vals)))
    rep = lyapunov(family, measure, n, norm, True, budget)
    if rep.method == "closed_form":
        return rep.value
    return min(v for _, v in rep.per_depth_values)


def variational_defect(family, measure, q, pressure_estimate, budget=DEFAULT_BUDGET):
    """upper(P(q)) - (q M_*(mu) + h(mu)).

    M_* is replaced by its least finite-depth value or its closed form.  With
    an estimate from :func:`pressure_bounds` on the same family and depth the
    result is >= 0 up to rounding, since a_m / m >= q M^(m)(mu) + h(mu) at
    every level m.  Sharper uppers (e.g. the block route) may show a small
    negative value caused by the finite-depth bias of M^(m).
    """
    n = pressure_estimate.depth
    V = _lyapunov_infimum(family, measure, n, pressure_estimate.norm, budget)
    if V == -np.inf:
        return np.inf
    return float(pressure_estimate.upper - (q * V + measure.entropy()))
