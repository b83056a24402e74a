"""Irreducibility testing and simultaneous block upper-triangularization.

The complex case is decided exactly (up to rank thresholding) by Burnside's
theorem: a family is irreducible over C^d iff the unital algebra it generates
is all of M_d(C).  Invariant subspaces are found MeatAxe-style: seed vectors
are drawn from eigenspaces of random algebra elements (and of their adjoints,
for the dual module), and each seed's orbit closure is tested for
properness.  Over R the search is not a decision procedure; see
``IrreducibilityCertificate.definitive``.
"""

from dataclasses import dataclass, field
import numpy as np
import scipy.linalg as sla

from .errors import InputError, NumericalFailure, PreconditionError, SearchFailure
from .matfam import ZERO_TOL, MatrixFamily, batch_norms, check_norm
from .words import all_products

RESIDUAL_TOL = 1e-8
COND_WARN = 1e6
N_RANDOM_ELEMENTS = 16
CONNECT_MIN_RATIO = 1e-12


@dataclass
class IrreducibilityCertificate:
    verdict: str  # "irreducible" | "reducible"
    field: str
    d: int
    witness: np.ndarray = None  # orthonormal basis (d, v) of an invariant subspace
    algebra_dim: int = None
    definitive: bool = True
    search: dict = field(default_factory=dict)
    note: str = ""

    @property
    def irreducible(self):
        return self.verdict == "irreducible"

    def witness_residual(self, family):
        """max_i dist(M_i V, V) / ||M_i|| for the witness V."""
        if self.witness is None:
            return 0.0
        Q = self.witness
        P = Q @ Q.conj().T
        worst = 0.0
        for M in family.matrices:
            nm = np.linalg.norm(M, 2)
            if nm == 0:
                continue
            MQ = M @ Q
            worst = max(worst, float(np.linalg.norm(MQ - P @ MQ, 2) / nm))
        return worst


@dataclass
class BlockDecomposition:
    """T^-1 M_i T = (A_i^(j,k)) block upper triangular with sizes ``block_sizes``.

    Block indices in ``lambda_`` are 1-based, as are j, k in :meth:`block`.
    """

    T: np.ndarray
    block_sizes: tuple
    conjugated: np.ndarray  # (ell, d, d), exact zeros below the diagonal blocks
    diagonal_blocks: list
    lambda_: tuple
    condition_number_T: float
    certificates: list
    field: str
    warnings: list = field(default_factory=list)
    vanishing_length: int = None  # smallest n with all length-n products zero, if trivial

    @property
    def t(self):
        return len(self.block_sizes)

    @property
    def offsets(self):
        return np.concatenate([[0], np.cumsum(self.block_sizes)]).astype(int)

    @property
    def trivial(self):
        return len(self.lambda_) == 0

    def block(self, i, j, k):
        """A_i^(j,k) for 1-based i, j, k."""
        o = self.offsets
        return self.conjugated[i - 1, o[j - 1]:o[j], o[k - 1]:o[k]]

    def reconstruction_residual(self, family):
        Tinv = np.linalg.inv(self.T)
        worst = 0.0
        for M, C in zip(family.matrices, self.conjugated):
            err = np.max(np.abs(self.T @ C @ Tinv - M))
            worst = max(worst, float(err / (1.0 + np.linalg.norm(M, 2))))
        return worst

    def summary(self):
        lam = "{" + ",".join(str(j) for j in self.lambda_) + "}" if self.lambda_ else "∅"
        sizes = "[" + ",".join(str(s) for s in self.block_sizes) + "]"
        n0 = self.vanishing_length or self.t + 1
        tail = "non-trivial" if self.lambda_ else (
            f"TRIVIAL: all products of length >= {n0} vanish")
        return f"t={self.t}, blocks {sizes}, Λ={lam}, {tail}"


@dataclass
class ConnectingEstimate:
    """Empirical (k, D) with ||M_IKJ|| >= D ||M_I|| ||M_J|| for some |K| <= k."""

    k: int
    D: float
    depth: int
    empirical: bool = True
    empty_connector: bool = False
    pairs: int = 0


@dataclass
class TrivialityReport:
    trivial: bool
    t: int
    lambda_: tuple
    max_abs_long_product: float  # over all words of length t+1
    nonzero_at_each_length: bool  # some product of each length 1..t+1 is non-zero
    decomposition: BlockDecomposition


# -- linear algebra helpers ---------------------------------------------------

def _orth(vectors):
    """Orthonormal basis (columns) of the span of ``vectors`` under the rank rule."""
    A = np.asarray(vectors)
    if A.size == 0:
        return A.reshape(A.shape[0], 0)
    U, s, _ = np.linalg.svd(A, full_matrices=False)
    r = int(np.sum(s > ZERO_TOL * max(1.0, float(s[0])))) if s.size else 0
    return U[:, :r]


def _complement(Q):
    return sla.null_space(Q.conj().T)


def orbit_closure(mats, V):
    """Smallest subspace containing the columns of V and invariant under ``mats``."""
    Q = _orth(V)
    d = mats.shape[1]
    while 0 < Q.shape[1] < d:
        images = np.concatenate([Q] + [M @ Q for M in mats], axis=1)
        Q_new = _orth(images)
        if Q_new.shape[1] == Q.shape[1]:
            break
        Q = Q_new
    return Q


def _normalized(family):
    mats = family.matrices
    norms = batch_norms(mats, "operator")
    keep = norms > 0
    return mats[keep] / norms[keep][:, None, None]


def algebra_basis(mats, d, dtype):
    """Orthonormal basis (as flattened matrices) of the unital algebra generated by mats."""
    eye = np.eye(d, dtype=dtype).reshape(1, -1) / np.sqrt(d)
    basis = eye
    frontier = [np.eye(d, dtype=dtype) / np.sqrt(d)]
    while frontier and basis.shape[0] < d * d:
        new = []
        for X in frontier:
            for M in mats:
                Y = (M @ X).reshape(-1)
                r = Y - basis.T @ (basis.conj() @ Y)
                r = r - basis.T @ (basis.conj() @ r)
                nr = np.linalg.norm(r)
                if nr > ZERO_TOL:
                    r = r / nr
                    basis = np.vstack([basis, r])
                    new.append(r.reshape(d, d))
                    if basis.shape[0] == d * d:
                        break
            if basis.shape[0] == d * d:
                break
        frontier = new
    return basis.reshape(-1, d, d)


def _eigen_seeds(a, tol=1e-6):
    """Kernel bases of (a - lambda) and (a - lambda)^* for clustered eigenvalues."""
    d = a.shape[0]
    ev = np.linalg.eigvals(a)
    scale = max(1.0, float(np.max(np.abs(ev))))
    clusters = []
    for lam in ev:
        for c in clusters:
            if abs(c[0] - lam) <= tol * scale:
                c.append(lam)
                break
        else:
            clusters.append([lam])
    right, left = [], []
    for c in clusters:
        lam = np.mean(c)
        if np.isrealobj(a) and abs(lam.imag) <= tol * scale:
            lam = lam.real
        B = a - lam * np.eye(d)
        for X, out in ((B, right), (B.conj().T, left)):
            _, s, Vh = np.linalg.svd(X)
            # seeds only need to be close; orbit_closure applies the strict rank rule
            null = s <= 1e-8 * max(1.0, float(s[0]))
            null[-1] = True
            for v in Vh.conj()[null]:
                out.append(v)
    return right, left


def _real_part_subspaces(Q):
    """For complex V = span(Q): real orthonormal bases of V ∩ conj(V) and V + conj(V)."""
    P = (Q @ Q.conj().T).real
    w, U = np.linalg.eigh(P)
    inter = U[:, w > 1 - 1e-8]
    total = U[:, w > 1e-8]
    return inter, total


def _proper(Q, d):
    return 0 < Q.shape[1] < d


def find_invariant_subspace(family, seed=0, n_elements=N_RANDOM_ELEMENTS, _record=None):
    """Orthonormal basis (d, v) of a proper non-zero invariant subspace, or None.

    For complex families None is definitive (Burnside).  For real families the
    search is randomized and may in principle miss a real invariant subspace.
    """
    d = family.d
    record = {} if _record is None else _record
    record.setdefault("seeds_tried", 0)
    record.setdefault("elements_tried", 0)
    if d == 1:
        return None
    real = family.field == "real"
    dtype = np.float64 if real else np.complex128
    if family.is_zero():
        return np.eye(d, dtype=dtype)[:, :1]
    mats = _normalized(family)
    adj = np.conj(np.transpose(mats, (0, 2, 1)))
    basis = algebra_basis(mats, d, dtype)
    record["algebra_dim"] = basis.shape[0]
    if basis.shape[0] == d * d:
        return None

    candidates = []

    def consider(V, dual=False):
        record["seeds_tried"] += 1
        W = orbit_closure(adj if dual else mats, V)
        if not _proper(W, d):
            return
        if dual:
            W = _complement(W)
        if real and np.iscomplexobj(W):
            if np.max(np.abs(W.imag), initial=0.0) > 1e-12:
                inter, total = _real_part_subspaces(W)
                for R in (inter, total):
                    if _proper(R, d):
                        candidates.append(orbit_closure(mats, R))
                return
            W = _orth(W.real)
        if _proper(W, d):
            candidates.append(W)

    def real_plane(v):
        return np.stack([v.real, v.imag], axis=1)

    # kernels and images of the generators
    for M in mats:
        U, s, Vh = np.linalg.svd(M)
        r = int(np.sum(s > ZERO_TOL * max(1.0, float(s[0]))))
        if r < d:
            consider(U[:, :r]) if r > 0 else None
            for v in Vh.conj()[r:]:
                consider(v[:, None])
    if candidates:
        return min(candidates, key=lambda W: W.shape[1])

    rng = np.random.default_rng(seed)
    for _ in range(n_elements):
        record["elements_tried"] += 1
        c = rng.standard_normal(basis.shape[0])
        if not real:
            c = c + 1j * rng.standard_normal(basis.shape[0])
        c /= np.linalg.norm(c)
        a = np.tensordot(c, basis, axes=1)
        right, left = _eigen_seeds(a)
        for v in right:
            if real and np.iscomplexobj(v) and np.max(np.abs(v.imag)) > 1e-12:
                consider(real_plane(v))
            consider(v[:, None])
        for w in left:
            if real and np.iscomplexobj(w) and np.max(np.abs(w.imag)) > 1e-12:
                consider(real_plane(w), dual=True)
            consider(w[:, None], dual=True)
        if candidates:
            W = min(candidates, key=lambda W: W.shape[1])
            return W.real.copy() if real else W
    return None


def is_irreducible(family, seed=0):
    d = family.d
    if d < 1:
        raise InputError("dimension must be positive")
    if d == 1:
        note = "zero 1x1 family: vacuously irreducible, excluded from Λ" if family.is_zero() else ""
        return IrreducibilityCertificate("irreducible", family.field, 1, algebra_dim=1, note=note)
    record = {}
    V = find_invariant_subspace(family, seed=seed, _record=record)
    alg = record.get("algebra_dim", 1)
    if V is not None:
        return IrreducibilityCertificate("reducible", family.field, d, witness=V,
                                         algebra_dim=alg, search=record)
    if alg == d * d:
        return IrreducibilityCertificate("irreducible", family.field, d, algebra_dim=alg,
                                         search=record)
    if family.field == "complex":
        # Burnside says reducible but no subspace was found; refuse to guess
        raise SearchFailure(f"algebra dimension {alg} < {d * d} but no invariant subspace found")
    note = "irreducible over R, reducible over C"
    return IrreducibilityCertificate("irreducible", family.field, d, algebra_dim=alg,
                                     definitive=False, search=record, note=note)


def _in_lambda(fam, cert):
    return cert.irreducible and not fam.is_zero()


def block_triangularize(family, seed=0):
    """Simultaneous block upper-triangularization with irreducible-or-zero diagonal blocks."""
    mats = family.matrices
    d = family.d
    real = family.field == "real"
    dtype = np.float64 if real else np.complex128
    leaves = []  # (offset, size, family, certificate)
    T = np.eye(d, dtype=dtype)
    C = np.array(mats, dtype=dtype)

    def recurse(offset, size):
        sub = MatrixFamily(C[:, offset:offset + size, offset:offset + size], family.field)
        cert = is_irreducible(sub, seed=seed)
        if cert.irreducible:
            leaves.append((offset, size, sub, cert))
            return
        Q1 = cert.witness.astype(dtype)
        v = Q1.shape[1]
        T1 = np.concatenate([Q1, _complement(Q1).astype(dtype)], axis=1)
        # conjugate the whole current matrices by blockdiag(I, T1, I)
        G = np.eye(d, dtype=dtype)
        G[offset:offset + size, offset:offset + size] = T1
        C[:] = G.conj().T @ C @ G
        T[:] = T @ G
        low = C[:, offset + v:offset + size, offset:offset + v]
        scale = np.array([max(np.linalg.norm(M, 2), 1e-300) for M in mats])
        resid = float(np.max(np.abs(low) / scale[:, None, None])) if low.size else 0.0
        if resid > RESIDUAL_TOL:
            raise NumericalFailure(
                f"invariant subspace residual {resid:.3e} exceeds {RESIDUAL_TOL}", residual=resid)
        low[...] = 0
        recurse(offset, v)
        recurse(offset + v, size - v)

    recurse(0, d)
    # zero everything below the diagonal blocks, structurally
    sizes = tuple(s for _, s, _, _ in leaves)
    offs = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
    for j in range(len(sizes)):
        C[:, offs[j + 1]:, offs[j]:offs[j + 1]] = 0
    blocks = [MatrixFamily(C[:, o:o + s, o:o + s], family.field) for o, s, _, _ in leaves]
    certs = [c for _, _, _, c in leaves]
    lam = tuple(j + 1 for j, (b, c) in enumerate(zip(blocks, certs)) if _in_lambda(b, c))
    cond = float(np.linalg.cond(T))
    dec = BlockDecomposition(T=T, block_sizes=sizes, conjugated=C, diagonal_blocks=blocks,
                             lambda_=lam, condition_number_T=cond, certificates=certs,
                             field=family.field)
    if not lam:
        P = np.broadcast_to(np.eye(d, dtype=mats.dtype), (1, d, d))
        for n in range(1, dec.t + 2):
            P = (P[:, None] @ mats[None]).reshape(-1, d, d)
            if not np.any(P):
                dec.vanishing_length = n
                break
    if cond > COND_WARN:
        dec.warnings.append(f"condition number of T is {cond:.3e}")
    if any(not c.definitive for c in certs):
        dec.warnings.append("some real diagonal blocks are irreducible by search, not proof")
    resid = dec.reconstruction_residual(family)
    if resid > RESIDUAL_TOL:
        raise NumericalFailure(f"reconstruction residual {resid:.3e}", residual=resid)
    return dec


def is_trivial(family, seed=0, decomposition=None):
    dec = decomposition or block_triangularize(family, seed=seed)
    t = dec.t
    mats = family.matrices
    prods = all_products(mats, t + 1)
    max_abs = float(np.max(np.abs(prods)))
    nonzero_each = True
    P = np.broadcast_to(np.eye(family.d, dtype=mats.dtype), (1, family.d, family.d))
    for _ in range(t + 1):
        P = (P[:, None] @ mats[None]).reshape(-1, family.d, family.d)
        if not np.any(P):
            nonzero_each = False
            break
    return TrivialityReport(trivial=dec.trivial, t=t, lambda_=dec.lambda_,
                            max_abs_long_product=max_abs,
                            nonzero_at_each_length=nonzero_each, decomposition=dec)


def connecting_constant(family, depth, max_k=4, norm="operator", certificate=None, seed=0):
    """Empirical (k, D) for the connecting-word inequality over |I|, |J| <= depth.

    The empty connector (k = 0) is allowed.  For 1x1 families norms are
    exactly multiplicative and (0, 1) is returned as a non-empirical value.
    """
    check_norm(norm)
    if depth < 1:
        raise InputError("depth must be >= 1")
    cert = certificate or is_irreducible(family, seed=seed)
    if not cert.irreducible or family.is_zero():
        raise PreconditionError("connecting constant needs an irreducible non-zero family")
    if family.d == 1:
        return ConnectingEstimate(k=0, D=1.0, depth=depth, empirical=False,
                                  empty_connector=True)
    mats = family.matrices
    words = np.concatenate([all_products(mats, m) for m in range(1, depth + 1)])
    wn = batch_norms(words, norm)
    keep = wn > 0
    words, wn = words[keep], wn[keep]
    npairs = len(words) ** 2
    best = np.zeros((len(words), len(words)))
    for k in range(0, max_k + 1):
        conns = all_products(mats, k)
        for K in conns:
            IK = words @ K
            prod_ = np.einsum("aij,bjk->abik", IK, words)
            n = batch_norms(prod_.reshape(-1, family.d, family.d), norm).reshape(best.shape)
            best = np.maximum(best, n / np.outer(wn, wn))
        D = float(best.min())
        if D > CONNECT_MIN_RATIO:
            return ConnectingEstimate(k=k, D=D, depth=depth, empirical=True,
                                      empty_connector=(k == 0), pairs=npairs)
    raise SearchFailure(f"no connector of length <= {max_k} found at depth {depth}")
