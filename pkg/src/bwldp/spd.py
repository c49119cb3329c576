"""Dense symmetric-matrix calculus for the Bures-Wasserstein geometry.

Every function takes and returns plain ``numpy`` arrays of shape ``(d, d)``.
Covariances may be positive semi-definite; anchors of transport maps, log and
exp maps must be strictly positive definite.
"""

import numpy as np

from .exceptions import (
    AnchorSingular,
    DimensionMismatch,
    ExtrapolationOutOfRange,
    NonSymmetric,
    NotPSD,
    OutOfInjectivity,
)

EPS_PD = 1e-10
SYM_RTOL = 1e-12
PSD_RTOL = 1e-10


def sym(X):
    """Symmetric part of a square matrix."""
    X = np.asarray(X, dtype=float)
    return 0.5 * (X + X.T)


def as_symmetric(S, name="matrix"):
    """Validate that ``S`` is a square symmetric 2-D array and return it symmetrized."""
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise DimensionMismatch(f"{name} must be a square 2-D array, got shape {S.shape}")
    if not np.all(np.isfinite(S)):
        raise ValueError(f"{name} has non-finite entries")
    scale = max(1.0, float(np.max(np.abs(S)))) if S.size else 1.0
    if np.max(np.abs(S - S.T), initial=0.0) > SYM_RTOL * scale:
        raise NonSymmetric(f"{name} is not symmetric")
    return sym(S)


def psd_eigh(S, name="matrix"):
    """Eigendecomposition of a PSD matrix with small negative eigenvalues clamped to 0.

    Eigenvalues in ``[-eps_psd, 0)`` with ``eps_psd = 1e-10 * ||S||_2`` are treated
    as roundoff; anything below raises :class:`NotPSD`.
    """
    S = as_symmetric(S, name)
    w, V = np.linalg.eigh(S)
    eps_psd = PSD_RTOL * max(abs(w[0]), abs(w[-1])) if w.size else 0.0
    if w.size and w[0] < -eps_psd:
        raise NotPSD(f"{name} has eigenvalue {w[0]:.3e} < -{eps_psd:.3e}")
    return np.clip(w, 0.0, None), V


def _from_eig(w, V):
    return sym((V * w) @ V.T)


def is_psd(S):
    try:
        psd_eigh(S)
    except (NotPSD, NonSymmetric):
        return False
    return True


def is_strictly_positive(S, eps=EPS_PD):
    """True when the smallest eigenvalue of symmetric ``S`` exceeds ``eps``."""
    try:
        S = as_symmetric(S)
    except NonSymmetric:
        return False
    return bool(np.linalg.eigvalsh(S)[0] > eps)


def _anchor_eigh(M, eps=EPS_PD):
    M = as_symmetric(M, "anchor")
    w, V = np.linalg.eigh(M)
    if w[0] <= eps:
        raise AnchorSingular(f"anchor has minimum eigenvalue {w[0]:.3e} <= {eps:g}")
    return w, V


def sym_sqrt(S):
    """Principal (PSD) square root via symmetric eigendecomposition.

    Parameters
    ----------
    S : ndarray, shape (d, d)
        Symmetric positive semi-definite matrix.

    Returns
    -------
    R : ndarray, shape (d, d)
        The unique PSD matrix with ``R @ R == S``.
    """
    w, V = psd_eigh(S)
    return _from_eig(np.sqrt(w), V)


def sqrt_and_inv_sqrt(M, eps=EPS_PD):
    """Return ``(M^{1/2}, M^{-1/2})`` for a strictly positive anchor ``M``."""
    w, V = _anchor_eigh(M, eps)
    r = np.sqrt(w)
    return _from_eig(r, V), _from_eig(1.0 / r, V)


def bw_distance(S1, S2):
    r"""Bures-Wasserstein distance between two PSD matrices.

    Evaluated in the Procrustes form

    .. math::
        \Pi(S_1, S_2) = \min_{U \in O(d)} \Vert S_1^{1/2} - S_2^{1/2} U \Vert_F,

    with the minimizer taken from the SVD of :math:`S_2^{1/2} S_1^{1/2}`. This is
    algebraically equal to
    :math:`\sqrt{\mathrm{tr} S_1 + \mathrm{tr} S_2 - 2\,\mathrm{tr}(S_1^{1/2} S_2 S_1^{1/2})^{1/2}}`
    (see :func:`bw_distance_trace`) but does not lose half the digits to
    cancellation when the two matrices are close.
    """
    R1 = sym_sqrt(S1)
    R2 = sym_sqrt(S2)
    if R1.shape != R2.shape:
        raise DimensionMismatch(f"shapes {R1.shape} and {R2.shape} differ")
    U, _, Vt = np.linalg.svd(R2 @ R1)
    return float(np.linalg.norm(R1 - R2 @ (U @ Vt)))


def bw_distance_trace(S1, S2):
    """Direct trace formula for the Bures-Wasserstein distance.

    Inner value is clamped at 0 before the square root. Accurate only to about
    ``sqrt(machine eps) * trace`` for nearly equal inputs.
    """
    R1 = sym_sqrt(S1)
    S2 = as_symmetric(S2)
    psd_eigh(S2)
    if R1.shape != S2.shape:
        raise DimensionMismatch(f"shapes {R1.shape} and {S2.shape} differ")
    w = np.clip(np.linalg.eigvalsh(sym(R1 @ S2 @ R1)), 0.0, None)
    inner = np.trace(R1 @ R1) + np.trace(S2) - 2.0 * np.sum(np.sqrt(w))
    return float(np.sqrt(max(inner, 0.0)))


def transport_map(M, S):
    r"""Optimal transport map :math:`t_M^S = M^{-1/2}(M^{1/2} S M^{1/2})^{1/2} M^{-1/2}`.

    ``M`` must be strictly positive; ``S`` only PSD. The result is symmetric PSD
    and pushes ``M`` forward to ``S``: ``t @ M @ t == S``.
    """
    R, Rinv = sqrt_and_inv_sqrt(M)
    S = as_symmetric(S, "target")
    if S.shape != R.shape:
        raise DimensionMismatch(f"shapes {R.shape} and {S.shape} differ")
    C = sym_sqrt(sym(R @ S @ R))
    return sym(Rinv @ C @ Rinv)


def log_map(M, S):
    """Logarithm map ``t_M^S - I`` into the tangent space at ``M``."""
    T = transport_map(M, S)
    return T - np.eye(T.shape[0])


def exp_map(M, A):
    """Exponential map ``(A + I) M (A + I)``.

    Raises :class:`OutOfInjectivity` if ``A + I`` has a negative eigenvalue, and
    :class:`AnchorSingular` if ``M`` is not strictly positive.
    """
    _anchor_eigh(M)
    M = sym(M)
    A = as_symmetric(A, "tangent vector")
    if A.shape != M.shape:
        raise DimensionMismatch(f"shapes {M.shape} and {A.shape} differ")
    B = A + np.eye(A.shape[0])
    lam = np.linalg.eigvalsh(B)
    if lam[0] < -SYM_RTOL * max(1.0, abs(lam[-1])):
        raise OutOfInjectivity(f"A + I has eigenvalue {lam[0]:.3e}")
    return sym(B @ M @ B)


def m_inner(M, A, B):
    """Inner product ``tr(A M B)`` on the tangent space at ``M``."""
    M, A, B = (np.asarray(X, dtype=float) for X in (M, A, B))
    if not (M.shape == A.shape == B.shape) or M.ndim != 2:
        raise DimensionMismatch(f"shapes {M.shape}, {A.shape}, {B.shape} are inconsistent")
    return float(np.einsum("ij,jk,ki->", A, M, B))


def m_norm(M, A):
    return float(np.sqrt(max(m_inner(M, A, A), 0.0)))


class Geodesic:
    """Constant-speed geodesic (McCann interpolant) between two covariances.

    The transport map from ``start`` to ``end`` is computed once at construction.
    ``point(t)`` for ``t`` outside ``[0, 1]`` extrapolates as long as
    ``(1 - t) I + t T`` stays PSD.
    """

    def __init__(self, start, end):
        self.start = as_symmetric(start, "start")
        self.end = as_symmetric(end, "end")
        self.transport = transport_map(self.start, self.end)

    def point(self, t):
        d = self.start.shape[0]
        B = (1.0 - t) * np.eye(d) + t * self.transport
        if not 0.0 <= t <= 1.0:
            lam = np.linalg.eigvalsh(B)
            if lam[0] < -SYM_RTOL * max(1.0, abs(lam[-1])):
                raise ExtrapolationOutOfRange(
                    f"geodesic cannot be extended to t={t:g}: map has eigenvalue {lam[0]:.3e}"
                )
        return sym(B @ self.start @ B)

    def __call__(self, t):
        return self.point(t)

    @property
    def length(self):
        return m_norm(self.start, self.transport - np.eye(self.start.shape[0]))


def geodesic_point(g, t):
    return g.point(t)


def sym_basis(d):
    """Frobenius-orthonormal basis of the d x d symmetric matrices, shape (d(d+1)/2, d, d).

    Order: diagonal units ``E_ii`` first, then ``(e_i e_j^T + e_j e_i^T)/sqrt(2)`` for i < j.
    """
    basis = []
    for i in range(d):
        E = np.zeros((d, d))
        E[i, i] = 1.0
        basis.append(E)
    for i in range(d):
        for j in range(i + 1, d):
            E = np.zeros((d, d))
            E[i, j] = E[j, i] = 1.0 / np.sqrt(2.0)
            basis.append(E)
    return np.array(basis)
