"""Enumeration of all products M_J over words of a fixed length.

Words of length n are visited in lexicographic order (first symbol most
significant), in fixed-size chunks, so every reduction over Sigma_n is done
in the same order regardless of chunking.  Families are rescaled by their
largest generator norm before multiplying; the scale is returned separately
as a log so callers can work entirely in the log domain.
"""

import numpy as np

from .errors import BudgetExceeded, NumericalFailure
from .matfam import batch_norms

DEFAULT_BUDGET = 2 ** 24
CHUNK_WORDS = 2 ** 14


def check_budget(ell, n, budget=DEFAULT_BUDGET):
    if ell ** n > budget:
        raise BudgetExceeded(f"{ell}^{n} = {ell ** n} words exceeds budget {budget}")


def logsumexp(x):
    """log(sum(exp(x))) that returns -inf for empty or all -inf input."""
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        return -np.inf
    top = np.max(x)
    if top == -np.inf:
        return -np.inf
    if top == np.inf:
        return np.inf
    return float(top + np.log(np.sum(np.exp(x - top))))


def log_add(a, b):
    if a == -np.inf:
        return b
    if b == -np.inf:
        return a
    return float(np.logaddexp(a, b))


def safe_log(x):
    x = np.asarray(x, dtype=float)
    out = np.full(x.shape, -np.inf)
    pos = x > 0
    out[pos] = np.log(x[pos])
    return out


def scaled_generators(family):
    """Generators divided by c = max generator norm, and log c (0 for a zero family)."""
    mats = family.matrices
    c = float(np.max(batch_norms(mats, "operator")))
    if c == 0.0:
        return mats, 0.0
    return mats / c, float(np.log(c))


def all_products(mats, n):
    """All ell^n products of length n as an array (ell^n, d, d)."""
    d = mats.shape[1]
    prods = np.broadcast_to(np.eye(d, dtype=mats.dtype), (1, d, d))
    for _ in range(n):
        prods = (prods[:, None] @ mats[None]).reshape(-1, d, d)
    return prods


def iter_product_chunks(mats, n, chunk=CHUNK_WORDS):
    """Yield consecutive blocks of the lexicographically ordered products of length n."""
    ell = mats.shape[0]
    s = n
    while s > 1 and ell ** s > chunk:
        s -= 1
    suffix = all_products(mats, s)
    if s == n:
        yield suffix
        return
    for prefixes in iter_product_chunks(mats, n - s, chunk):
        for P in prefixes:
            yield P @ suffix


def iter_level(family, n, budget=DEFAULT_BUDGET, chunk=CHUNK_WORDS):
    """Yield (log_scale, chunk) where the true products are exp(log_scale) * chunk."""
    check_budget(family.ell, n, budget)
    mats, logc = scaled_generators(family)
    for block in iter_product_chunks(mats, n, chunk):
        if not np.all(np.isfinite(block)):
            raise NumericalFailure(f"non-finite word products at length {n}")
        yield n * logc, block


def level_log_norms(family, n, norm="operator", budget=DEFAULT_BUDGET):
    """log ||M_J|| for every J in Sigma_n, lexicographic; -inf where M_J = 0."""
    out = []
    for shift, block in iter_level(family, n, budget):
        out.append(safe_log(batch_norms(block, norm)) + shift)
    return np.concatenate(out)


def level_products(family, n, budget=DEFAULT_BUDGET):
    """Unscaled products of length n (use only at desk scale)."""
    check_budget(family.ell, n, budget)
    return all_products(family.matrices, n)
