"""Isometries, transfer operators and dilations.

An isometry ``v`` maps the system space H (dim d) into H (x) K (dim d*k).
Rows of ``v`` are indexed by the pair ``(s, u)`` flattened in C order with
the system index ``s`` most significant, so the Kraus operator attached to
unit vector ``|u>`` is the row slice ``v[u::k]``:

    K_u[s, :] = v[s * k + u, :]        (d x d each, sum_u K_u* K_u = 1)

Transfer operators act on vectorised matrices with column-stacking ``vec``:

    schrodinger   rho  -> sum_u K_u rho K_u*
    heisenberg    X    -> sum_u K_u* X K_u

The two matrices are conjugate transposes of each other, matching the
Hilbert-Schmidt duality Tr(T*(rho) X) = Tr(rho T(X)).
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, NotIsometry, SizeCap, UnitDimMismatch
from .linalg import dag, unvec, vec

__all__ = [
    "Isometry",
    "Superoperator",
    "isometry_from_kraus",
    "channel",
    "sandwich_map",
    "dilation",
    "apply_steps",
    "DEFAULT_TENSOR_CAP",
]

DEFAULT_TENSOR_CAP = 4096


@dataclass(frozen=True)
class Isometry:
    """Isometric encoding of a quantum Markov chain step.

    Attributes
    ----------
    v : (d*k, d) complex ndarray with v* v = 1
    d : system dimension
    k : unit (noise) dimension
    """

    v: np.ndarray
    d: int
    k: int

    def __post_init__(self):
        v = np.ascontiguousarray(np.asarray(self.v, dtype=complex))
        object.__setattr__(self, "v", v)
        if self.d < 1 or self.k < 1:
            raise DimensionMismatch(f"dimensions d={self.d}, k={self.k} must be positive")
        if v.shape != (self.d * self.k, self.d):
            raise DimensionMismatch(
                f"matrix shape {v.shape} does not match (d*k, d) = ({self.d * self.k}, {self.d})"
            )
        defect = np.linalg.norm(dag(v) @ v - np.eye(self.d))
        if defect > 1e-8:
            raise NotIsometry(f"v* v - 1 has norm {defect:.3e} (tolerance 1e-8)")

    @property
    def kraus(self):
        """List of the k Kraus operators K_u = v[u::k]."""
        return [self.v[u :: self.k] for u in range(self.k)]

    def __eq__(self, other):
        return (
            isinstance(other, Isometry)
            and self.d == other.d
            and self.k == other.k
            and np.array_equal(self.v, other.v)
        )


def isometry_from_kraus(kraus, tol=1e-8):
    """Assemble an :class:`Isometry` from a list of d x d Kraus operators."""
    kraus = [np.asarray(K, dtype=complex) for K in kraus]
    if not kraus:
        raise UnitDimMismatch("empty Kraus family")
    d = kraus[0].shape[0]
    for K in kraus:
        if K.shape != (d, d):
            raise UnitDimMismatch(f"Kraus shapes differ: {K.shape} vs ({d}, {d})")
    k = len(kraus)
    total = sum(dag(K) @ K for K in kraus)
    if np.linalg.norm(total - np.eye(d)) > tol:
        raise NotIsometry(
            f"sum K* K - 1 has norm {np.linalg.norm(total - np.eye(d)):.3e} (tolerance {tol:.1e})"
        )
    v = np.zeros((d * k, d), dtype=complex)
    for u, K in enumerate(kraus):
        v[u::k] = K
    return Isometry(v, d, k)


@dataclass(frozen=True)
class Superoperator:
    """Dense matrix of a linear map on (vectorised) matrices."""

    m: np.ndarray
    picture: str
    shape_in: tuple = field(default=())
    shape_out: tuple = field(default=())

    def __post_init__(self):
        m = np.asarray(self.m, dtype=complex)
        object.__setattr__(self, "m", m)
        if not self.shape_in:
            n = int(round(np.sqrt(m.shape[1])))
            object.__setattr__(self, "shape_in", (n, n))
        if not self.shape_out:
            n = int(round(np.sqrt(m.shape[0])))
            object.__setattr__(self, "shape_out", (n, n))

    def __call__(self, x):
        x = np.asarray(x, dtype=complex)
        if x.shape != tuple(self.shape_in):
            raise DimensionMismatch(
                f"operand shape {x.shape} incompatible with map input {self.shape_in}"
            )
        return unvec(self.m @ vec(x), tuple(self.shape_out))

    def spectral_radius(self):
        return float(np.max(np.abs(np.linalg.eigvals(self.m))))


def channel(iso, picture="schrodinger"):
    """Transfer operator of the chain in the requested picture.

    ``schrodinger`` propagates states, ``heisenberg`` observables.  The two
    matrices are mutually adjoint for the Hilbert-Schmidt inner product.
    """
    if picture not in ("schrodinger", "heisenberg"):
        raise ValueError(f"unknown picture {picture!r}")
    kraus = iso.kraus
    d = iso.d
    m = np.zeros((d * d, d * d), dtype=complex)
    for K in kraus:
        if picture == "schrodinger":
            m += np.kron(K.conj(), K)
        else:
            m += np.kron(K.T, dag(K))
    return Superoperator(m, picture, (d, d), (d, d))


def sandwich_map(iso1, iso2):
    """Two-sided deformed transfer operator X -> sum_u K1_u* X K2_u.

    Operands X are d1 x d2 matrices; the map is returned as a dense matrix
    acting on vec(X).  Its spectral radius is at most 1 (up to roundoff)
    because the K1 and K2 families each resolve the identity.
    """
    if iso1.k != iso2.k:
        raise UnitDimMismatch(f"unit dimensions differ: {iso1.k} vs {iso2.k}")
    d1, d2 = iso1.d, iso2.d
    m = np.zeros((d1 * d2, d1 * d2), dtype=complex)
    for K1, K2 in zip(iso1.kraus, iso2.kraus):
        m += np.kron(K2.T, dag(K1))
    return Superoperator(m, "sandwich", (d1, d2), (d1, d2))


def dilation(iso, n, cap=DEFAULT_TENSOR_CAP):
    """Matrix of the n-step dilation H -> H (x) K^n.

    Row index is ``(s, u_1, ..., u_n)`` in C order; ``u_1`` is the first
    emitted unit, i.e. the leftmost (most significant) unit factor.
    """
    d, k = iso.d, iso.k
    if k**n > cap:
        raise SizeCap(f"k^n = {k**n} exceeds cap {cap}")
    cols = []
    eye = np.eye(d, dtype=complex)
    for j in range(d):
        psi = apply_steps(iso, eye[:, j], n, cap=cap)
        cols.append(psi.reshape(-1))
    return np.stack(cols, axis=1)


def apply_steps(iso, phi, n, cap=DEFAULT_TENSOR_CAP):
    """Apply n chain steps to a system vector, keeping the full output tensor.

    Returns an ndarray of shape (d, k, ..., k) with the system axis first and
    unit axes in chronological order (axis 1 = first emitted).
    """
    d, k = iso.d, iso.k
    if k**n > cap:
        raise SizeCap(f"k^n = {k**n} exceeds cap {cap}")
    phi = np.asarray(phi, dtype=complex).reshape(d)
    vt = iso.v.reshape(d, k, d)  # vt[s, u, h] = v[(s, u), h]
    psi = phi
    for _ in range(n):
        # contract the system axis, append the fresh unit axis at the end,
        # then move it to sit right after the existing unit axes
        psi = np.einsum("suh,h...->s...u", vt, psi)
    return psi
