"""Pointwise exterior algebra over R^{2n} with a compatible (omega, J, g) triple.

Forms are represented exactly on the bitmask basis: a degree-k form on a
2n-dimensional space stores one complex coefficient per k-element subset of
{1..2n}, subsets encoded as integer bitmasks and ordered by increasing mask
value.  All operations are pure; `KForm` and `CompatibleTriple` are immutable
after construction and safe to share across threads.

Coefficients are complex throughout.  Real forms are a subspace recognised by
`KForm.is_real`, because the (p,q) type decomposition is intrinsically
complex; see CONVENTIONS.md for the orientation and J-action conventions.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping

import numpy as np

__all__ = [
    "KForm",
    "CompatibleTriple",
    "BigradedForm",
    "basis_masks",
    "mask_to_indices",
    "indices_to_mask",
    "build_standard_triple",
    "wedge",
    "contract_vector",
    "inner",
    "inner_bilinear",
    "norm",
    "hodge_star",
    "j_action",
    "pq_decompose",
    "weil_operator",
    "form_to_json",
    "form_from_json",
    "triple_to_json",
    "triple_from_json",
]

TOL = 1e-12


# ---------------------------------------------------------------------------
# bitmask basis bookkeeping
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def basis_masks(dim: int, k: int) -> tuple[int, ...]:
    """All k-bit masks over `dim` generators, in increasing numeric order."""
    if k < 0 or k > dim:
        return ()
    masks = [m for m in range(1 << dim) if m.bit_count() == k]
    return tuple(sorted(masks))


@lru_cache(maxsize=None)
def _mask_index(dim: int, k: int) -> dict[int, int]:
    return {m: i for i, m in enumerate(basis_masks(dim, k))}


def mask_to_indices(mask: int) -> tuple[int, ...]:
    """Bitmask -> ascending 1-based generator indices."""
    out = []
    i = 1
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def indices_to_mask(indices: Iterable[int]) -> int:
    mask = 0
    for i in indices:
        bit = 1 << (i - 1)
        if mask & bit:
            raise ValueError(f"repeated index {i}")
        mask |= bit
    return mask


def merge_sign(mask_a: int, mask_b: int) -> int:
    """Sign of sorting the concatenation e^A wedge e^B into ascending order.

    Counts transpositions: pairs (a in A, b in B) with a > b.
    """
    sign = 1
    b = mask_b
    while b:
        low = b & -b
        # generators of A strictly above this generator of B
        above = mask_a >> low.bit_length()
        if above.bit_count() & 1:
            sign = -sign
        b ^= low
    return sign


# ---------------------------------------------------------------------------
# forms
# ---------------------------------------------------------------------------

class KForm:
    """Immutable degree-k exterior form with complex coefficients.

    Parameters
    ----------
    n : int
        Half-dimension; the underlying space is R^{2n}.
    k : int
        Form degree, 0 <= k <= 2n.
    data : array_like of complex, length C(2n, k)
        Coefficients over `basis_masks(2n, k)`.
    """

    __slots__ = ("n", "k", "data")

    def __init__(self, n: int, k: int, data):
        if n < 1:
            raise ValueError(f"n must be >= 1, got {n}")
        if not 0 <= k <= 2 * n:
            raise ValueError(f"degree {k} out of range [0, {2 * n}]")
        arr = np.asarray(data, dtype=complex)
        want = math.comb(2 * n, k)
        if arr.shape != (want,):
            raise ValueError(f"expected {want} coefficients for (n={n}, k={k}), got {arr.shape}")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "data", arr)

    def __setattr__(self, name, value):
        raise AttributeError("KForm is immutable")

    # -- constructors -------------------------------------------------------

    @staticmethod
    def zero(n: int, k: int) -> "KForm":
        return KForm(n, k, np.zeros(math.comb(2 * n, k), dtype=complex))

    @staticmethod
    def basis(n: int, indices: Iterable[int]) -> "KForm":
        """The basis form e^{i1} ^ ... ^ {ik} for ascending 1-based indices."""
        idx = tuple(indices)
        mask = indices_to_mask(idx)
        k = len(idx)
        data = np.zeros(math.comb(2 * n, k), dtype=complex)
        data[_mask_index(2 * n, k)[mask]] = 1.0
        return KForm(n, k, data)

    @staticmethod
    def from_coeffs(n: int, k: int, coeffs: Mapping[tuple[int, ...], complex]) -> "KForm":
        """Build from a sparse {index tuple: coefficient} mapping."""
        data = np.zeros(math.comb(2 * n, k), dtype=complex)
        index = _mask_index(2 * n, k)
        for idx, c in coeffs.items():
            srt = tuple(sorted(idx))
            if srt != tuple(idx):
                raise ValueError(f"indices must be ascending, got {idx}")
            data[index[indices_to_mask(idx)]] += c
        return KForm(n, k, data)

    # -- access -------------------------------------------------------------

    def coeff(self, indices: Iterable[int]) -> complex:
        mask = indices_to_mask(tuple(indices))
        return complex(self.data[_mask_index(2 * self.n, self.k)[mask]])

    def coeffs_dict(self) -> dict[tuple[int, ...], complex]:
        masks = basis_masks(2 * self.n, self.k)
        return {mask_to_indices(m): complex(c) for m, c in zip(masks, self.data) if c != 0}

    def is_real(self, tol: float = TOL) -> bool:
        return bool(np.max(np.abs(self.data.imag), initial=0.0) <= tol)

    def conjugate(self) -> "KForm":
        return KForm(self.n, self.k, np.conj(self.data))

    # -- arithmetic ---------------------------------------------------------

    def _check_compatible(self, other: "KForm"):
        if self.n != other.n or self.k != other.k:
            raise ValueError(
                f"incompatible forms: (n={self.n}, k={self.k}) vs (n={other.n}, k={other.k})"
            )

    def __add__(self, other: "KForm") -> "KForm":
        self._check_compatible(other)
        return KForm(self.n, self.k, self.data + other.data)

    def __sub__(self, other: "KForm") -> "KForm":
        self._check_compatible(other)
        return KForm(self.n, self.k, self.data - other.data)

    def __mul__(self, scalar) -> "KForm":
        return KForm(self.n, self.k, self.data * complex(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> "KForm":
        return KForm(self.n, self.k, -self.data)

    def __repr__(self):
        nz = sum(1 for c in self.data if c != 0)
        return f"KForm(n={self.n}, k={self.k}, {nz} nonzero of {len(self.data)})"


# ---------------------------------------------------------------------------
# compatible triples
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CompatibleTriple:
    """An almost Kahler structure on R^{2n}: matrices (omega, J, g).

    Invariants (checked by `validate`): J^2 = -I, omega(Ju, Jv) = omega(u, v),
    g = omega . J symmetric positive definite, omega nondegenerate.
    """

    n: int
    omega: np.ndarray
    J: np.ndarray
    g: np.ndarray

    def __post_init__(self):
        for name in ("omega", "J", "g"):
            m = np.asarray(getattr(self, name), dtype=float)
            if m.shape != (2 * self.n, 2 * self.n):
                raise ValueError(f"{name} must be {2 * self.n}x{2 * self.n}")
            m = m.copy()
            m.flags.writeable = False
            object.__setattr__(self, name, m)

    def validate(self, tol: float = TOL) -> dict[str, float]:
        """Residuals of the compatibility invariants; raises on violation."""
        eye = np.eye(2 * self.n)
        res = {
            "J_squared": float(np.max(np.abs(self.J @ self.J + eye))),
            "omega_antisymmetric": float(np.max(np.abs(self.omega + self.omega.T))),
            "omega_J_invariant": float(np.max(np.abs(self.J.T @ self.omega @ self.J - self.omega))),
            "g_equals_omega_J": float(np.max(np.abs(self.g - self.omega @ self.J))),
            "g_symmetric": float(np.max(np.abs(self.g - self.g.T))),
        }
        bad = {k: v for k, v in res.items() if v > tol}
        if bad:
            raise ValueError(f"triple violates compatibility: {bad}")
        if abs(np.linalg.det(self.omega)) <= TOL:
            raise ValueError("omega is degenerate")
        if np.min(np.linalg.eigvalsh(self.g)) <= 0:
            raise ValueError("g is not positive definite")
        return res

    @property
    def omega_inv(self) -> np.ndarray:
        return _omega_inv(self)

    @property
    def g_inv(self) -> np.ndarray:
        return _g_inv(self)

    @property
    def sqrt_det_g(self) -> float:
        return float(np.sqrt(np.linalg.det(self.g)))

    def omega_form(self) -> KForm:
        """omega as a 2-form: sum_{i<j} omega_ij e^i ^ e^j."""
        n2 = 2 * self.n
        coeffs = {}
        for i in range(n2):
            for j in range(i + 1, n2):
                if self.omega[i, j] != 0:
                    coeffs[(i + 1, j + 1)] = self.omega[i, j]
        return KForm.from_coeffs(self.n, 2, coeffs)

    def volume_form(self) -> KForm:
        """omega^n / n!  (equals the metric volume form for compatible triples)."""
        w = self.omega_form()
        out = KForm(self.n, 0, [1.0])
        for _ in range(self.n):
            out = wedge(out, w)
        return out * (1.0 / math.factorial(self.n))


def _omega_inv(t: CompatibleTriple) -> np.ndarray:
    return np.linalg.inv(t.omega)


def _g_inv(t: CompatibleTriple) -> np.ndarray:
    return np.linalg.inv(t.g)


def build_standard_triple(n: int) -> CompatibleTriple:
    """The Darboux triple: omega = sum e^{2i-1} ^ e^{2i}, J e_{2i-1} = e_{2i}, g = I."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    n2 = 2 * n
    omega = np.zeros((n2, n2))
    J = np.zeros((n2, n2))
    for i in range(n):
        a, b = 2 * i, 2 * i + 1
        omega[a, b] = 1.0
        omega[b, a] = -1.0
        # J e_a = e_b, J e_b = -e_a  (columns are images)
        J[b, a] = 1.0
        J[a, b] = -1.0
    t = CompatibleTriple(n=n, omega=omega, J=J, g=np.eye(n2))
    t.validate()
    return t


def random_compatible_triple(n: int, rng: np.random.Generator, spread: float = 0.35) -> CompatibleTriple:
    """A random compatible triple: the standard one pulled back along a
    random A in GL(2n, R) with moderate condition number.

    omega' = A^T omega A,  J' = A^{-1} J A,  g' = A^T A-conjugated metric;
    compatibility is inherited exactly (up to roundoff) and re-validated.
    """
    t0 = build_standard_triple(n)
    A = np.eye(2 * n) + spread * rng.standard_normal((2 * n, 2 * n))
    # keep the perturbation well-conditioned so validation stays at 1e-12
    u, s, vt = np.linalg.svd(A)
    s = np.clip(s, 0.5, 2.0)
    A = u @ np.diag(s) @ vt
    Ainv = np.linalg.inv(A)
    omega = A.T @ t0.omega @ A
    J = Ainv @ t0.J @ A
    g = omega @ J
    g = 0.5 * (g + g.T)  # symmetrize away roundoff
    t = CompatibleTriple(n=n, omega=omega, J=J, g=g)
    t.validate(tol=1e-10)
    return t


def triple_from_omega_j(omega: np.ndarray, J: np.ndarray) -> CompatibleTriple:
    """Synthesize g = omega(., J.) from a user-supplied pair and validate.

    Indefinite or non-symmetric results are rejected, not repaired.
    """
    omega = np.asarray(omega, dtype=float)
    J = np.asarray(J, dtype=float)
    n2 = omega.shape[0]
    if n2 % 2 or omega.shape != J.shape:
        raise ValueError("omega and J must be square of equal even dimension")
    g = omega @ J
    t = CompatibleTriple(n=n2 // 2, omega=omega, J=J, g=g)
    t.validate()
    return t


# ---------------------------------------------------------------------------
# multilinear machinery
# ---------------------------------------------------------------------------

def wedge(a: KForm, b: KForm) -> KForm:
    """Graded-anticommutative product, sign by transposition counting."""
    if a.n != b.n:
        raise ValueError(f"mismatched half-dimension: {a.n} vs {b.n}")
    k = a.k + b.k
    if k > 2 * a.n:
        raise ValueError(f"degree overflow: {a.k} + {b.k} > {2 * a.n}")
    dim = 2 * a.n
    out = np.zeros(math.comb(dim, k), dtype=complex)
    index = _mask_index(dim, k)
    masks_a = basis_masks(dim, a.k)
    masks_b = basis_masks(dim, b.k)
    for ia, ma in enumerate(masks_a):
        ca = a.data[ia]
        if ca == 0:
            continue
        for ib, mb in enumerate(masks_b):
            cb = b.data[ib]
            if cb == 0 or (ma & mb):
                continue
            out[index[ma | mb]] += merge_sign(ma, mb) * ca * cb
    return KForm(a.n, k, out)


def contract_vector(a: KForm, v: np.ndarray) -> KForm:
    """Interior product i_v(a) for a vector v = sum v^i e_i (complex allowed)."""
    if a.k == 0:
        return KForm(a.n, 0, [0.0])
    dim = 2 * a.n
    out = np.zeros(math.comb(dim, a.k - 1), dtype=complex)
    index = _mask_index(dim, a.k - 1)
    for ia, ma in enumerate(basis_masks(dim, a.k)):
        ca = a.data[ia]
        if ca == 0:
            continue
        pos = 0
        m = ma
        while m:
            low = m & -m
            i = low.bit_length() - 1  # 0-based generator
            if v[i] != 0:
                out[index[ma ^ low]] += ((-1) ** pos) * v[i] * ca
            pos += 1
            m ^= low
    return KForm(a.n, a.k - 1, out)


def _minor_gram(h: np.ndarray, dim: int, k: int) -> np.ndarray:
    """Gram matrix on Lambda^k induced by a bilinear form h on covectors:
    G[I, J] = det h[I, J] over basis masks."""
    masks = basis_masks(dim, k)
    if k == 0:
        return np.ones((1, 1))
    idx_sets = [np.array(mask_to_indices(m)) - 1 for m in masks]
    G = np.empty((len(masks), len(masks)))
    for i, I in enumerate(idx_sets):
        hi = h[np.ix_(I, range(dim))]
        for j, Jx in enumerate(idx_sets):
            G[i, j] = np.linalg.det(hi[:, Jx]) if k > 1 else hi[0, Jx[0]]
    return G


@lru_cache(maxsize=None)
def _gram_cache(triple_key, which: str, k: int) -> np.ndarray:
    t: CompatibleTriple = triple_key.triple
    h = t.g_inv if which == "g" else t.omega_inv
    G = _minor_gram(h, 2 * t.n, k)
    G.flags.writeable = False
    return G


class _TripleKey:
    """Hashable identity wrapper so per-triple matrices can be lru_cached."""

    __slots__ = ("triple",)

    def __init__(self, triple: CompatibleTriple):
        self.triple = triple

    def __hash__(self):
        return hash((self.triple.n, self.triple.omega.tobytes(), self.triple.J.tobytes()))

    def __eq__(self, other):
        return (
            isinstance(other, _TripleKey)
            and self.triple.n == other.triple.n
            and np.array_equal(self.triple.omega, other.triple.omega)
            and np.array_equal(self.triple.J, other.triple.J)
            and np.array_equal(self.triple.g, other.triple.g)
        )


def metric_gram(t: CompatibleTriple, k: int) -> np.ndarray:
    """Gram matrix of the g-inner product on Lambda^k (real symmetric PD)."""
    return _gram_cache(_TripleKey(t), "g", k)


def omega_gram(t: CompatibleTriple, k: int) -> np.ndarray:
    """Gram-type matrix of the omega^{-1} pairing on Lambda^k (k-symmetric)."""
    return _gram_cache(_TripleKey(t), "omega", k)


def inner(a: KForm, b: KForm, t: CompatibleTriple) -> complex:
    """Hermitian pointwise inner product <a, b>, conjugate-linear in b."""
    a._check_compatible(b)
    G = metric_gram(t, a.k)
    return complex(a.data @ G @ np.conj(b.data))


def inner_bilinear(a: KForm, b: KForm, t: CompatibleTriple) -> complex:
    """Complex-bilinear extension of the g-inner product (no conjugation)."""
    a._check_compatible(b)
    G = metric_gram(t, a.k)
    return complex(a.data @ G @ b.data)


def norm(a: KForm, t: CompatibleTriple) -> float:
    return float(np.sqrt(max(inner(a, a, t).real, 0.0)))


def _star_matrix(t: CompatibleTriple, k: int, gram: np.ndarray, vol_coeff: float) -> np.ndarray:
    """Matrix of the star built from `gram` on Lambda^k: alpha ^ star(beta) =
    gram(alpha, beta) * vol_coeff * e_top."""
    dim = 2 * t.n
    masks_k = basis_masks(dim, k)
    index_c = _mask_index(dim, dim - k)
    top = (1 << dim) - 1
    S = np.zeros((math.comb(dim, dim - k), math.comb(dim, k)))
    Gv = gram * vol_coeff
    for i, m in enumerate(masks_k):
        comp = top ^ m
        S[index_c[comp], :] += merge_sign(m, comp) * Gv[i, :]
    return S


@lru_cache(maxsize=None)
def _hodge_star_matrix(triple_key, k: int) -> np.ndarray:
    t = triple_key.triple
    # The star is taken w.r.t. the orientation induced by omega: the volume
    # form is omega^n/n!, whose top coefficient is the *signed* Pfaffian of
    # omega (= +/- sqrt(det g) for compatible triples).  Using the positive
    # coordinate orientation instead silently flips the star on
    # orientation-reversing triples and breaks every one-star identity.
    vol_coeff = float(t.volume_form().data[0].real)
    S = _star_matrix(t, k, _gram_cache(triple_key, "g", k), vol_coeff)
    S.flags.writeable = False
    return S


def hodge_star(a: KForm, t: CompatibleTriple) -> KForm:
    """Riemannian Hodge star (complex-linear extension): <a,b> dvol = a ^ *b."""
    if np.min(np.linalg.eigvalsh(t.g)) <= 0:
        raise ValueError("degenerate metric")
    S = _hodge_star_matrix(_TripleKey(t), a.k)
    return KForm(a.n, 2 * a.n - a.k, S @ a.data)


def _compound_matrix(M: np.ndarray, dim: int, k: int) -> np.ndarray:
    """Induced matrix on Lambda^k of a covector map with matrix M
    (columns = images of basis covectors in the old basis)."""
    masks = basis_masks(dim, k)
    if k == 0:
        return np.ones((1, 1), dtype=M.dtype)
    idx = [np.array(mask_to_indices(m)) - 1 for m in masks]
    C = np.empty((len(masks), len(masks)), dtype=M.dtype)
    for col, Jx in enumerate(idx):
        sub = M[:, Jx]
        for row, I in enumerate(idx):
            C[row, col] = np.linalg.det(sub[I, :]) if k > 1 else sub[I[0], 0]
    return C


@lru_cache(maxsize=None)
def _j_action_matrix(triple_key, k: int) -> np.ndarray:
    t = triple_key.triple
    # covector pullback c -> c o J has coefficient matrix J^T
    C = _compound_matrix(t.J.T.copy(), 2 * t.n, k)
    C.flags.writeable = False
    return C


def j_action(a: KForm, t: CompatibleTriple) -> KForm:
    """(J a)(u_1, ..., u_k) = a(J u_1, ..., J u_k): pullback along J."""
    C = _j_action_matrix(_TripleKey(t), a.k)
    return KForm(a.n, a.k, C @ a.data)


# ---------------------------------------------------------------------------
# type decomposition
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BigradedForm:
    """(p,q)-components of a degree-k form; sum reconstructs the input."""

    k: int
    components: dict  # (p, q) -> KForm

    def component(self, p: int, q: int) -> KForm:
        return self.components[(p, q)]

    def reconstruct(self) -> KForm:
        it = iter(self.components.values())
        out = next(it)
        for c in it:
            out = out + c
        return out

    def real_components(self) -> dict:
        """Real-convention components keyed by unordered type {p,q}:
        entry (p,q) with p <= q is component(p,q) + component(q,p) (p != q)."""
        out = {}
        for (p, q), c in self.components.items():
            if p > q:
                continue
            if p == q:
                out[(p, q)] = c
            else:
                out[(p, q)] = c + self.components[(q, p)]
        return out


@lru_cache(maxsize=None)
def _complex_frame(triple_key) -> np.ndarray:
    """Columns: a (1,0) coframe phi^1..phi^n followed by its conjugates,
    expressed in the real covector basis.  J phi = i phi."""
    t = triple_key.triple
    n = t.n
    Mcov = t.J.T
    w, v = np.linalg.eig(Mcov)
    cols = [v[:, i] for i in range(2 * n) if abs(w[i] - 1j) < 1e-9]
    if len(cols) != n:
        raise ValueError("J action on covectors does not split into +/- i eigenspaces")
    P = np.empty((2 * n, 2 * n), dtype=complex)
    for a, c in enumerate(cols):
        c = c / np.linalg.norm(c)
        P[:, a] = c
        P[:, n + a] = np.conj(c)
    P.flags.writeable = False
    return P


@lru_cache(maxsize=None)
def _pq_projectors(triple_key, k: int) -> dict:
    """Matrices of Pi^{p,q} on Lambda^k for each p+q = k."""
    t = triple_key.triple
    n, dim = t.n, 2 * t.n
    P = _complex_frame(triple_key)
    C = _compound_matrix(np.asarray(P), dim, k)
    Cinv = np.linalg.inv(C)
    masks = basis_masks(dim, k)
    low = (1 << n) - 1
    out = {}
    for p in range(max(0, k - n), min(k, n) + 1):
        q = k - p
        sel = np.array([1.0 if (m & low).bit_count() == p else 0.0 for m in masks])
        M = C @ (sel[:, None] * Cinv)
        M.flags.writeable = False
        out[(p, q)] = M
    return out


def pq_decompose(a: KForm, t: CompatibleTriple) -> BigradedForm:
    """Split a into its Pi^{p,q} projections with respect to t's J."""
    projs = _pq_projectors(_TripleKey(t), a.k)
    comps = {pq: KForm(a.n, a.k, M @ a.data) for pq, M in projs.items()}
    return BigradedForm(k=a.k, components=comps)


def pq_projector_matrices(t: CompatibleTriple, k: int) -> dict:
    """The Pi^{p,q} matrices on Lambda^k (read-only views)."""
    return dict(_pq_projectors(_TripleKey(t), k))


def weil_operator(a: KForm, t: CompatibleTriple) -> KForm:
    """J-Weil operator: multiplies the (p,q)-part by i^{p-q}."""
    projs = _pq_projectors(_TripleKey(t), a.k)
    out = np.zeros_like(a.data)
    for (p, q), M in projs.items():
        out = out + (1j ** ((p - q) % 4)) * (M @ a.data)
    return KForm(a.n, a.k, out)


# ---------------------------------------------------------------------------
# JSON wire format
# ---------------------------------------------------------------------------

def form_to_json(a: KForm) -> dict:
    """`{"n":, "k":, "coeffs": [{"idx": [...], "re":, "im":}]}`; exact floats."""
    coeffs = []
    for m, c in zip(basis_masks(2 * a.n, a.k), a.data):
        if c != 0:
            coeffs.append({"idx": list(mask_to_indices(m)), "re": float(c.real), "im": float(c.imag)})
    return {"n": a.n, "k": a.k, "coeffs": coeffs}


def form_from_json(obj: dict) -> KForm:
    n, k = int(obj["n"]), int(obj["k"])
    data = np.zeros(math.comb(2 * n, k), dtype=complex)
    index = _mask_index(2 * n, k)
    for entry in obj["coeffs"]:
        mask = indices_to_mask(entry["idx"])
        data[index[mask]] = complex(entry["re"], entry.get("im", 0.0))
    return KForm(n, k, data)


def triple_to_json(t: CompatibleTriple) -> dict:
    return {
        "n": t.n,
        "omega": [[float(x) for x in row] for row in t.omega],
        "J": [[float(x) for x in row] for row in t.J],
        "g": [[float(x) for x in row] for row in t.g],
    }


def triple_from_json(obj: dict) -> CompatibleTriple:
    if "standard" in obj:
        return build_standard_triple(int(obj["standard"]))
    if "g" in obj:
        t = CompatibleTriple(
            n=int(obj["n"]),
            omega=np.array(obj["omega"], dtype=float),
            J=np.array(obj["J"], dtype=float),
            g=np.array(obj["g"], dtype=float),
        )
        t.validate()
        return t
    return triple_from_omega_j(np.array(obj["omega"], dtype=float), np.array(obj["J"], dtype=float))


def roundtrip_form_json(a: KForm) -> KForm:
    return form_from_json(json.loads(json.dumps(form_to_json(a))))
