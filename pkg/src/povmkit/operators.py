"""Dense Hermitian linear algebra for small dimensions.

Operators are plain complex ndarrays.  The Hermitian matrices of size d
form a real vector space of dimension d**2; this module fixes an
isometric real coordinate map on that space (diagonal entries first,
then sqrt(2)-scaled real/imaginary parts of the upper triangle) so that
rank and kernel questions reduce to real SVDs.  Everything here targets
d <= 16, where dense LAPACK routines are effectively exact.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .errors import InvalidDimension, NonHermitianInput, NumericalRankAmbiguity

MAX_DIM = 16

TOL_HERM = 1e-10
TOL_PSD = 1e-9
TOL_TRACE = 1e-9
TOL_COMPLETE = 1e-9
GAP_THRESHOLD = 1e-8

# Width of the band around the rank threshold in which a singular value or
# eigenvalue is considered too close to call.
GAP_BAND = 16.0


def frobenius(a: np.ndarray) -> float:
    """Frobenius norm of a matrix."""
    return float(np.linalg.norm(a))


def as_operator(a, dim: int | None = None) -> np.ndarray:
    """Coerce input to a square complex matrix, checking finiteness.

    Parameters
    ----------
    a : array_like
        Square matrix.
    dim : int, optional
        If given, the required dimension.
    """
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidDimension(f"expected a square matrix, got shape {m.shape}")
    d = m.shape[0]
    if d < 1 or d > MAX_DIM:
        raise InvalidDimension(f"dimension {d} outside supported range 1..{MAX_DIM}")
    if dim is not None and d != dim:
        raise InvalidDimension(f"expected dimension {dim}, got {d}")
    if not np.all(np.isfinite(m.view(float))):
        raise NonHermitianInput("matrix contains NaN or Inf entries")
    return m


def check_hermitian(a, tol: float = TOL_HERM, name: str = "operator") -> np.ndarray:
    """Validate Hermitian symmetry within ``tol * (1 + ||a||_F)``.

    Returns the exactly symmetrized matrix ``(a + a†)/2`` so downstream
    eigensolvers see clean input.
    """
    m = as_operator(a)
    defect = frobenius(m - m.conj().T)
    if defect > tol * (1.0 + frobenius(m)):
        raise NonHermitianInput(
            f"{name} is not Hermitian: symmetry defect {defect:.3e}"
        )
    return 0.5 * (m + m.conj().T)


def eigh(a, tol: float = TOL_HERM) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix, eigenvalues descending.

    Returns ``(w, v)`` with ``a == v @ diag(w) @ v†`` and orthonormal
    columns in ``v``.
    """
    m = check_hermitian(a, tol=tol)
    w, v = np.linalg.eigh(m)
    return w[::-1].copy(), v[:, ::-1].copy()


def min_eigenvalue(a, tol: float = TOL_HERM) -> float:
    w, _ = eigh(a, tol=tol)
    return float(w[-1])


def is_psd(a, tol: float = TOL_PSD) -> bool:
    """True iff the minimum eigenvalue is ``>= -tol * (1 + ||a||_F)``."""
    m = check_hermitian(a)
    return min_eigenvalue(m) >= -tol * (1.0 + frobenius(m))


def check_density_matrix(rho, tol_psd: float = TOL_PSD, tol_trace: float = TOL_TRACE) -> np.ndarray:
    """Validate a density matrix (Hermitian, PSD, unit trace)."""
    m = check_hermitian(rho, name="state")
    if not is_psd(m, tol=tol_psd):
        raise NonHermitianInput("state is not positive semidefinite")
    tr = float(np.trace(m).real)
    if abs(tr - 1.0) > tol_trace * (1.0 + frobenius(m)):
        raise NonHermitianInput(f"state trace {tr} differs from 1")
    return m


def support(
    a,
    threshold: float = GAP_THRESHOLD,
    check_band: bool = False,
) -> tuple[np.ndarray, np.ndarray]:
    """Support eigenpairs of a PSD matrix.

    Eigenvalues above ``threshold * max(1, λ_max)`` count as nonzero.
    With ``check_band`` a value falling inside the ambiguity band
    ``(thr/16, 16*thr)`` raises :class:`NumericalRankAmbiguity`; rank
    decisions in the decomposition engine must not hinge on such values.

    Returns ``(vecs, vals)`` where ``vecs`` holds orthonormal support
    columns and ``vals`` the matching (descending) eigenvalues.
    """
    w, v = eigh(a)
    scale = max(1.0, float(w[0])) if w.size else 1.0
    thr = threshold * scale
    if check_band:
        lo, hi = thr / GAP_BAND, thr * GAP_BAND
        if np.any((w > lo) & (w < hi)):
            raise NumericalRankAmbiguity(
                f"eigenvalue inside gap band ({lo:.3e}, {hi:.3e})"
            )
    mask = w > thr
    return v[:, mask], w[mask]


def support_rank(a, threshold: float = GAP_THRESHOLD) -> int:
    return int(support(a, threshold=threshold)[0].shape[1])


# --- real coordinates on the Hermitian space -------------------------------

_SQRT2 = np.sqrt(2.0)


def hermitian_to_coords(a: np.ndarray) -> np.ndarray:
    """Isometric real coordinates of a Hermitian matrix (length d**2)."""
    d = a.shape[0]
    out = np.empty(d * d)
    out[:d] = np.diag(a).real
    k = d
    for i in range(d):
        for j in range(i + 1, d):
            out[k] = _SQRT2 * a[i, j].real
            out[k + 1] = _SQRT2 * a[i, j].imag
            k += 2
    return out


def coords_to_hermitian(v: np.ndarray, d: int) -> np.ndarray:
    """Inverse of :func:`hermitian_to_coords`."""
    a = np.zeros((d, d), dtype=complex)
    a[np.diag_indices(d)] = v[:d]
    k = d
    for i in range(d):
        for j in range(i + 1, d):
            z = (v[k] + 1j * v[k + 1]) / _SQRT2
            a[i, j] = z
            a[j, i] = np.conj(z)
            k += 2
    return a


def hermitian_basis(d: int) -> list[np.ndarray]:
    """Orthonormal (Frobenius) basis of the d x d Hermitian matrices."""
    basis = []
    for k in range(d * d):
        v = np.zeros(d * d)
        v[k] = 1.0
        basis.append(coords_to_hermitian(v, d))
    return basis


def tuple_to_coords(ts: Sequence[np.ndarray]) -> np.ndarray:
    """Concatenated coordinates of a tuple of Hermitian matrices."""
    return np.concatenate([hermitian_to_coords(t) for t in ts])


def coords_to_tuple(v: np.ndarray, dims: Sequence[int]) -> tuple[np.ndarray, ...]:
    out = []
    k = 0
    for d in dims:
        out.append(coords_to_hermitian(v[k : k + d * d], d))
        k += d * d
    return tuple(out)


HermitianTuple = tuple[np.ndarray, ...]


def hermitian_nullspace(
    constraint: Callable[[HermitianTuple], HermitianTuple],
    domain_basis: Sequence[HermitianTuple],
    gap: float = GAP_THRESHOLD,
) -> list[HermitianTuple]:
    """Orthonormal kernel basis of a real-linear map on Hermitian tuples.

    Parameters
    ----------
    constraint : callable
        Real-linear map sending a tuple of Hermitian matrices to another
        tuple of Hermitian matrices.  Only evaluations on ``domain_basis``
        are used.
    domain_basis : sequence of tuples of ndarray
        Linearly independent Hermitian tuples spanning the domain.
    gap : float
        Singular values below ``gap * max(1, s_max)`` count as zero.

    Returns
    -------
    list of tuples of ndarray
        Kernel basis, orthonormal under the trace inner product summed
        over tuple slots.  Empty list for a trivial kernel.
    """
    if not domain_basis:
        return []
    dims = [t.shape[0] for t in domain_basis[0]]
    n = len(domain_basis)
    cols = [tuple_to_coords(constraint(b)) for b in domain_basis]
    a = np.column_stack(cols)
    _, s, vt = np.linalg.svd(a)
    scale = max(1.0, float(s[0])) if s.size else 1.0
    rank = int(np.count_nonzero(s > gap * scale))
    if rank >= n:
        return []
    coeffs = vt[rank:].T  # (n, k) kernel coefficients w.r.t. domain_basis

    dom = np.column_stack([tuple_to_coords(b) for b in domain_basis])
    kern = dom @ coeffs
    # Re-orthonormalize in ambient coordinates; domain_basis need not be
    # orthonormal itself.
    q, r = np.linalg.qr(kern)
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    q = q * signs
    return [coords_to_tuple(q[:, j], dims) for j in range(q.shape[1])]
