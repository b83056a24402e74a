"""Dense matrix kernel: families of square matrices over R or C, words,
norms, singular values and exterior powers."""

from dataclasses import dataclass
from itertools import combinations
from math import comb

import numpy as np

from .errors import InputError

FIELDS = ("real", "complex")
NORMS = ("operator", "frobenius")

# singular values at or below ZERO_TOL * max(1, sigma_max) count as zero
ZERO_TOL = 1e-10


def as_matrix(M):
    a = np.asarray(M)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise InputError(f"expected a non-empty 2-d matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InputError("matrix entries must be finite")
    if np.iscomplexobj(a):
        return a.astype(np.complex128)
    return a.astype(np.float64)


@dataclass(frozen=True, eq=False)
class MatrixFamily:
    """A finite family {M_1, ..., M_ell} of d x d matrices.

    ``matrices`` is stored as a read-only array of shape (ell, d, d); float64
    for real families and complex128 for complex ones.
    """

    matrices: np.ndarray
    field: str = "real"

    def __post_init__(self):
        if self.field not in FIELDS:
            raise InputError(f"field must be one of {FIELDS}, got {self.field!r}")
        raw = self.matrices
        if isinstance(raw, (list, tuple)) and len(raw) == 0:
            raise InputError("a family needs at least one matrix")
        a = np.asarray(raw)
        if a.ndim != 3 or a.shape[0] < 1 or a.shape[1] != a.shape[2] or a.shape[1] < 1:
            raise InputError(f"expected shape (ell, d, d) with ell, d >= 1, got {a.shape}")
        if not np.all(np.isfinite(a)):
            raise InputError("matrix entries must be finite")
        if self.field == "real":
            if np.iscomplexobj(a):
                if np.any(a.imag != 0):
                    raise InputError("real-field family has non-zero imaginary parts")
                a = a.real
            a = np.array(a, dtype=np.float64)
        else:
            a = np.array(a, dtype=np.complex128)
        a.flags.writeable = False
        object.__setattr__(self, "matrices", a)

    @classmethod
    def from_matrices(cls, mats, field=None):
        mats = [np.asarray(m) for m in mats]
        if field is None:
            field = "complex" if any(np.iscomplexobj(m) and np.any(m.imag) for m in mats) else "real"
        if not mats:
            raise InputError("a family needs at least one matrix")
        shapes = {m.shape for m in mats}
        if len(shapes) != 1:
            raise InputError(f"matrices have inconsistent shapes {sorted(shapes)}")
        return cls(np.stack(mats), field)

    @property
    def ell(self):
        return self.matrices.shape[0]

    @property
    def d(self):
        return self.matrices.shape[1]

    @property
    def dtype(self):
        return self.matrices.dtype

    def __len__(self):
        return self.ell

    def __getitem__(self, i):
        return self.matrices[i]

    def conjugated(self, G):
        """The family {G^-1 M_i G}."""
        G = as_matrix(G)
        Ginv = np.linalg.inv(G)
        field = "complex" if np.iscomplexobj(G) else self.field
        return MatrixFamily(Ginv @ self.matrices @ G, field)

    def is_zero(self):
        return not np.any(self.matrices)

    def __repr__(self):
        return f"MatrixFamily(ell={self.ell}, d={self.d}, field={self.field!r})"


def check_norm(norm):
    if norm not in NORMS:
        raise InputError(f"norm must be one of {NORMS}, got {norm!r}")
    return norm


# -- words -------------------------------------------------------------------

def as_word(word, ell=None):
    """Normalize a word to a tuple of 1-based symbols.

    Accepts an iterable of ints, a digit string like ``"1212"`` or a
    comma-separated string like ``"1,12,3"``.
    """
    if isinstance(word, str):
        s = word.strip()
        parts = s.split(",") if "," in s else list(s)
        try:
            word = tuple(int(p) for p in parts)
        except ValueError:
            raise InputError(f"cannot parse word {s!r}") from None
    else:
        word = tuple(int(j) for j in word)
    if len(word) == 0:
        raise InputError("words must be non-empty")
    lo = min(word)
    hi = max(word)
    if lo < 1 or (ell is not None and hi > ell):
        raise InputError(f"word symbols must lie in 1..{ell if ell is not None else 'ell'}: {word}")
    return word


def format_word(word, ell):
    if ell > 9:
        return ",".join(str(j) for j in word)
    return "".join(str(j) for j in word)


def word_from_index(index, n, ell):
    """Word of length n at position ``index`` in lexicographic order of Sigma_n."""
    digits = []
    for _ in range(n):
        index, r = divmod(index, ell)
        digits.append(r + 1)
    return tuple(reversed(digits))


def word_index(word, ell):
    idx = 0
    for j in word:
        idx = idx * ell + (j - 1)
    return idx


def word_product(family, word):
    """Left-to-right product M_{j_1} ... M_{j_n}."""
    word = as_word(word, family.ell)
    out = family.matrices[word[0] - 1].copy()
    for j in word[1:]:
        out = out @ family.matrices[j - 1]
    return out


# -- norms and spectra -------------------------------------------------------

def singular_values(M):
    """Singular values of M in non-increasing order."""
    return np.linalg.svd(as_matrix(M), compute_uv=False)


def op_norm(M):
    """Operator 2-norm, i.e. the largest singular value."""
    return float(singular_values(M)[0])


def frobenius_norm(M):
    return float(np.sqrt(np.sum(np.abs(as_matrix(M)) ** 2)))


def matrix_norm(M, norm="operator"):
    return op_norm(M) if check_norm(norm) == "operator" else frobenius_norm(M)


def spectral_radius(M):
    M = as_matrix(M)
    if M.shape[0] != M.shape[1]:
        raise InputError(f"spectral radius needs a square matrix, got {M.shape}")
    return float(np.max(np.abs(np.linalg.eigvals(M))))


def batch_norms(stack, norm="operator"):
    """Norms of a stack of matrices with shape (k, d, d)."""
    if norm == "operator":
        return np.linalg.svd(stack, compute_uv=False)[:, 0]
    return np.sqrt(np.sum(np.abs(stack) ** 2, axis=(1, 2)))


def numerical_rank(sv):
    sv = np.asarray(sv)
    if sv.size == 0:
        return 0
    return int(np.sum(sv > ZERO_TOL * max(1.0, float(sv[0]))))


def is_invertible(M):
    sv = singular_values(M)
    return numerical_rank(sv) == len(sv)


def exterior_power(M, k):
    """k-th exterior power: the C(d,k) x C(d,k) matrix of k x k minors.

    Rows and columns are indexed by k-subsets of {0..d-1} in lexicographic
    order, so that (AB)^k = A^k B^k.
    """
    M = as_matrix(M)
    d = M.shape[0]
    if M.shape[1] != d:
        raise InputError("exterior power needs a square matrix")
    if not 1 <= int(k) <= d or int(k) != k:
        raise InputError(f"exterior power order must be an integer in 1..{d}, got {k}")
    k = int(k)
    subsets = list(combinations(range(d), k))
    n = comb(d, k)
    out = np.empty((n, n), dtype=M.dtype)
    for a, rows in enumerate(subsets):
        sub = M[list(rows)]
        for b, cols in enumerate(subsets):
            out[a, b] = np.linalg.det(sub[:, list(cols)])
    return out
