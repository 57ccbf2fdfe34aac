"""Gauge group action, equivalence witnesses and tangent-space machinery.

The gauge group element g = (c, w) (phase c, unitary w on the system) acts
on isometries by

    act(g, v) = conj(c) (w (x) 1) v w*

Two irreducible chains produce the same output statistics exactly when
they sit on the same gauge orbit; ``equivalence_witness`` decides this by
looking at the peripheral spectrum of the two-sided deformed transfer
operator.  The residual stabiliser of a point is the cyclic group
generated by (gamma, Z) from the spectral profile.

Tangent machinery: ``dmu`` pushes a Lie-algebra element (theta, kgen) to a
gauge-orbit direction at v, and ``split`` decomposes an arbitrary tangent
as ``a = dmu(theta, kgen) + a_id`` with ``v* a_id = 0``.  The split is
complex-linear: raw curve velocities (whose ``v* a`` is anti-Hermitian)
are accepted as-is, and then ``theta`` reports the real part of the
complex mean while ``kgen`` may come out non-Hermitian.  For tangents in
the image of ``dmu`` the recovered pair is exactly the Hermitian one that
produced them.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .channels import Isometry, channel, sandwich_map
from .errors import (
    DimensionMismatch,
    GaugeConstraintViolated,
    LabelingFailure,
    NotIdentifiable,
    NotIrreducible,
    NotTangent,
    ResolventIllConditioned,
    SingularResolvent,
    UnitDimMismatch,
    WitnessInconsistent,
)
from .linalg import antiherm_part, dag, proj_distance, unvec, vec

__all__ = [
    "act",
    "equivalence_witness",
    "witness_matches",
    "stabiliser",
    "TangentVector",
    "TangentSplit",
    "dmu",
    "split",
    "restricted_resolvent_solve",
    "tangent_inner",
    "stabiliser_tangent_action",
    "mode_decompose",
    "singular_dimension",
]


def _check_gauge_element(g, d):
    c, w = g
    c = complex(c)
    w = np.asarray(w, dtype=complex)
    if abs(abs(c) - 1.0) > 1e-8:
        raise GaugeConstraintViolated(f"phase has modulus {abs(c):.6f}, expected 1")
    if w.shape != (d, d):
        raise DimensionMismatch(f"unitary shape {w.shape}, expected ({d}, {d})")
    if np.linalg.norm(dag(w) @ w - np.eye(d)) > 1e-8:
        raise GaugeConstraintViolated("matrix part of the gauge element is not unitary")
    return c, w


def act(g, iso):
    """Apply the gauge element g = (c, w) to an isometry."""
    c, w = _check_gauge_element(g, iso.d)
    v_new = np.conj(c) * np.kron(w, np.eye(iso.k)) @ iso.v @ dag(w)
    return Isometry(v_new, iso.d, iso.k)


def equivalence_witness(iso1, iso2, tol=1e-8):
    """Witness (c, w) with (w (x) 1) v2 = c v1 w, or None when inequivalent.

    Both chains must be irreducible and share system and unit dimensions.
    The witness is read off the peripheral eigenvector of the two-sided
    deformed transfer operator; its phase gauge is fixed by making the
    first nonzero entry of the first column of w real and positive.
    """
    if iso1.d != iso2.d:
        raise DimensionMismatch(
            f"system dimensions differ ({iso1.d} vs {iso2.d}); chains on different "
            "spaces are never output-equivalent here"
        )
    if iso1.k != iso2.k:
        raise UnitDimMismatch(f"unit dimensions differ ({iso1.k} vs {iso2.k})")
    from .ergodic import analyze

    for iso in (iso1, iso2):
        prof = analyze(iso)
        if not prof.is_irreducible:
            raise NotIrreducible(prof.diagnostics.get("reason", "input chain not irreducible"))
    d = iso1.d
    smap = sandwich_map(iso1, iso2)
    evals, evecs = np.linalg.eig(smap.m)
    imax = int(np.argmax(np.abs(evals)))
    radius = abs(evals[imax])
    if radius < 1.0 - tol:
        return None
    f = unvec(evecs[:, imax], (d, d))
    gram = dag(f) @ f
    lam = np.trace(gram).real / d
    if np.linalg.norm(gram - lam * np.eye(d)) > 1e-6 * max(lam, 1e-12):
        raise WitnessInconsistent(
            "peripheral eigenvector is not proportional to a unitary "
            f"(deviation {np.linalg.norm(gram - lam * np.eye(d)):.3e})"
        )
    u, _, vh = np.linalg.svd(f)
    w = u @ vh
    # fix the free phase of w
    col = w[:, 0]
    i0 = int(np.argmax(np.abs(col) > 1e-12))
    phase = col[i0] / abs(col[i0])
    w = w * np.conj(phase)
    c = evals[imax] / radius
    residual = np.linalg.norm(np.kron(w, np.eye(iso1.k)) @ iso2.v - c * iso1.v @ w)
    if residual > 1e-6:
        raise WitnessInconsistent(f"witness relation residual {residual:.3e}")
    return complex(c), w


def witness_matches(profile, witness, g, tol=1e-6):
    """Check a witness against a known gauge element, modulo the stabiliser.

    ``g = (c_g, w_g)`` is the element that produced iso2 = act(g, iso1);
    the witness family for that pair is (conj(c_g) gamma^m, Z^m w_g*) over
    m = 0..p-1, each determined only up to a global phase on the unitary.
    """
    profile.require_irreducible()
    c_found, w_found = witness
    c_g, w_g = g
    p = profile.period
    gamma = profile.gamma
    target_w = dag(np.asarray(w_g, dtype=complex))
    for m in range(p):
        zm = np.linalg.matrix_power(profile.zmat, m)
        c_cand = np.conj(complex(c_g)) * gamma**m
        if abs(c_found - c_cand) <= tol and proj_distance(w_found, zm @ target_w) <= tol:
            return True
    return False


def stabiliser(profile):
    """Generators of the residual stabiliser: [(gamma^m, Z^m)] for m < p."""
    profile.require_irreducible()
    out = []
    worst = 0.0
    for m in range(profile.period):
        c = profile.gamma**m
        zm = np.linalg.matrix_power(profile.zmat, m)
        fixed = act((c, zm), profile.iso)
        worst = max(worst, float(np.linalg.norm(fixed.v - profile.iso.v)))
        out.append((complex(c), zm))
    if worst > 1e-7:
        raise LabelingFailure(f"stabiliser candidates move the base point by {worst:.3e}")
    return out


@dataclass(frozen=True)
class TangentVector:
    """Tangent direction at an isometry, normalised so v* a is Hermitian.

    Raw matrices are accepted; an anti-Hermitian component of v* a below
    1e-8 in norm (finite-difference noise) is projected away, anything
    larger is rejected.
    """

    iso: Isometry
    a: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=complex)
        v = self.iso.v
        if a.shape != v.shape:
            raise DimensionMismatch(f"tangent shape {a.shape}, expected {v.shape}")
        skew = antiherm_part(dag(v) @ a)
        res = np.linalg.norm(skew)
        if res > 1e-8 * max(1.0, np.linalg.norm(a)):
            raise NotTangent(
                f"v* a has anti-Hermitian part of norm {res:.3e}; "
                "pass curve velocities directly to split()"
            )
        object.__setattr__(self, "a", a - v @ skew)


@dataclass(frozen=True)
class TangentSplit:
    """Decomposition a = theta v - (kgen (x) 1) v + v kgen + a_id.

    ``theta`` is the real part of the complex mean Tr(rho_ss v* a); its
    imaginary part is kept in ``theta_im`` (zero for tangents satisfying
    the Hermitian convention).  ``resolvent_cond`` reports the condition
    number of the restricted resolvent solve that produced ``kgen``.
    """

    theta: float
    theta_im: float
    kgen: np.ndarray
    a_id: np.ndarray
    resolvent_cond: float


def dmu(iso, theta, kgen, profile=None, rho_ss=None):
    """Push a Lie-algebra element to the gauge-orbit tangent direction.

    ``theta`` must be real and ``kgen`` Hermitian with Tr(rho_ss kgen) = 0.
    Returns theta v - (kgen (x) 1) v + v kgen.
    """
    kgen = np.asarray(kgen, dtype=complex)
    d = iso.d
    if kgen.shape != (d, d):
        raise DimensionMismatch(f"generator shape {kgen.shape}, expected ({d}, {d})")
    if np.linalg.norm(kgen - dag(kgen)) > 1e-10 * max(1.0, np.linalg.norm(kgen)):
        raise GaugeConstraintViolated("generator must be Hermitian")
    if abs(complex(theta).imag) > 0:
        raise GaugeConstraintViolated("theta must be real")
    if rho_ss is None and profile is not None:
        rho_ss = profile.rho_ss
    if rho_ss is not None:
        drift = abs(np.trace(np.asarray(rho_ss) @ kgen))
        if drift > 1e-8 * max(1.0, np.linalg.norm(kgen)):
            raise GaugeConstraintViolated(
                f"Tr(rho_ss kgen) = {drift:.3e}, expected 0 (absorb it into theta)"
            )
    return _dmu_raw(iso, complex(theta), kgen)


def _dmu_raw(iso, theta_c, kgen):
    """Unvalidated push-forward with complex theta and arbitrary kgen."""
    v = iso.v
    return theta_c * v - np.kron(kgen, np.eye(iso.k)) @ v + v @ kgen


def restricted_resolvent_solve(profile, rhs, cond_cap=1e12):
    """Solve (Id - T) x = rhs on the subspace {x : Tr(rho_ss x) = 0}.

    T is the Heisenberg transfer operator.  The right-hand side is
    projected onto the subspace (its component along rho_ss must already
    be negligible for the equation to make sense).  Returns ``(x, cond)``
    with the condition number of the compressed resolvent.
    """
    profile.require_irreducible()
    d = profile.d
    th = channel(profile.iso, "heisenberg")
    constraint = vec(profile.rho_ss).conj()[None, :]
    basis = scipy.linalg.null_space(constraint)  # d^2 x (d^2 - 1), orthonormal
    r = dag(basis) @ (np.eye(d * d) - th.m) @ basis
    cond = float(np.linalg.cond(r))
    if not np.isfinite(cond) or cond > cond_cap:
        raise ResolventIllConditioned(
            f"restricted resolvent condition number {cond:.3e} exceeds {cond_cap:.1e}"
        )
    b = vec(np.asarray(rhs, dtype=complex))
    b = basis @ (dag(basis) @ b)  # defensive projection
    try:
        y = np.linalg.solve(r, dag(basis) @ b)
    except np.linalg.LinAlgError as exc:
        raise SingularResolvent(str(exc)) from None
    return unvec(basis @ y, (d, d)), cond


def split(profile, a):
    """Split a tangent as gauge-orbit part plus identifiable part.

    ``a`` may be a :class:`TangentVector` or a raw (d k, d) matrix; raw
    matrices are treated complex-linearly without symmetrisation, so curve
    velocities can be passed directly.  The returned ``a_id`` always
    satisfies v* a_id = 0.
    """
    profile.require_irreducible()
    iso = profile.iso
    if isinstance(a, TangentVector):
        a = a.a
    a = np.asarray(a, dtype=complex)
    if a.shape != iso.v.shape:
        raise DimensionMismatch(f"tangent shape {a.shape}, expected {iso.v.shape}")
    h = dag(iso.v) @ a
    theta_c = complex(np.trace(profile.rho_ss @ h))
    kgen, cond = restricted_resolvent_solve(profile, h - theta_c * np.eye(iso.d))
    a_id = a - _dmu_raw(iso, theta_c, kgen)
    return TangentSplit(
        theta=float(theta_c.real),
        theta_im=float(theta_c.imag),
        kgen=kgen,
        a_id=a_id,
        resolvent_cond=cond,
    )


def _require_identifiable(iso, a, tol=1e-8):
    a = np.asarray(a, dtype=complex)
    res = np.linalg.norm(dag(iso.v) @ a)
    if res > tol * max(1.0, np.linalg.norm(a)):
        raise NotIdentifiable(f"v* a has norm {res:.3e}; split off the gauge part first")
    return a


def tangent_inner(profile, x, y):
    """Limit-model inner product Tr(rho_ss x* y) on identifiable directions."""
    profile.require_irreducible()
    x = _require_identifiable(profile.iso, x)
    y = _require_identifiable(profile.iso, y)
    return complex(np.trace(profile.rho_ss @ dag(x) @ y))


def stabiliser_tangent_action(profile, m, a):
    """Action of the m-th stabiliser element on an identifiable tangent.

    Returns gamma^m (Z*^m (x) 1) a Z^m; identifiability is preserved.
    """
    profile.require_irreducible()
    a = _require_identifiable(profile.iso, a)
    m = int(m) % profile.period
    zm = np.linalg.matrix_power(profile.zmat, m)
    out = profile.gamma**m * np.kron(dag(zm), np.eye(profile.k)) @ a @ zm
    return out


def mode_decompose(profile, a):
    """Decompose an identifiable tangent into stabiliser eigenmodes.

    Mode m collects the blocks (P_{a+1-m} (x) 1) A P_a; the stabiliser acts
    on it as multiplication by gamma^m.  The modes sum to the input and are
    mutually orthogonal for the limit-model inner product.
    """
    profile.require_irreducible()
    a = _require_identifiable(profile.iso, a)
    p = profile.period
    eye_k = np.eye(profile.k)
    modes = []
    for m in range(p):
        am = np.zeros_like(a)
        for blk in range(p):
            row = np.kron(profile.projections[(blk + 1 - m) % p], eye_k)
            am = am + row @ a @ profile.projections[blk]
        modes.append(am)
    return modes


def singular_dimension(profile):
    """Dimension bookkeeping at a periodic point.

    Returns the real dimensions of the non-identifiable (gauge) directions,
    of the identifiable space, of each stabiliser eigenmode, and the
    headline ``l`` = real dimension of the invariant mode-0 block.
    """
    profile.require_irreducible()
    d, k, p = profile.d, profile.k, profile.period
    dims = [profile.block_dims[a] for a in range(p)]
    mode_dims = []
    for m in range(p):
        dim_m = 2 * sum(
            dims[a] * (dims[(a + 1 - m) % p] * k - dims[(a + m) % p]) for a in range(p)
        )
        mode_dims.append(int(dim_m))
    return {
        "d_nonid": d * d,
        "d_id": 2 * d * d * (k - 1),
        "l": mode_dims[0],
        "mode_dims": mode_dims,
    }
