"""Ready-made POVMs used throughout tests, docs, and the CLI."""

from __future__ import annotations

import numpy as np

from .outcomes import SPHERE, FiniteLabels
from .povm import FinitePOVM

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


def projective_basis_povm(d: int) -> FinitePOVM:
    """Projective measurement onto the computational basis of dimension d."""
    eye = np.eye(d, dtype=complex)
    entries = [(k, np.outer(eye[:, k], eye[:, k].conj())) for k in range(d)]
    return FinitePOVM(dim=d, space=FiniteLabels(d), entries=tuple(entries))


def coin_flip_povm(d: int = 2) -> FinitePOVM:
    """Two identical outcomes {I/2, I/2}: maximal classical randomness."""
    half = np.eye(d, dtype=complex) / 2.0
    return FinitePOVM(dim=d, space=FiniteLabels(2), entries=((0, half), (1, half)))


TETRAHEDRON_AXES = np.array(
    [
        [1.0, 1.0, 1.0],
        [1.0, -1.0, -1.0],
        [-1.0, 1.0, -1.0],
        [-1.0, -1.0, 1.0],
    ]
) / np.sqrt(3.0)


def sic_tetrahedron_povm() -> FinitePOVM:
    """Qubit SIC POVM: four subnormalized projectors at tetrahedron vertices.

    Elements are ``(I + a_i . sigma) / 4`` with the four ``a_i`` summing to
    zero, so each has trace 1/2 and the family resolves the identity.
    Outcome points are the vertex directions on the sphere.
    """
    entries = []
    for a in TETRAHEDRON_AXES:
        el = (np.eye(2, dtype=complex) + a[0] * PAULI_X + a[1] * PAULI_Y + a[2] * PAULI_Z) / 4.0
        entries.append((a.copy(), el))
    return FinitePOVM(dim=2, space=SPHERE, entries=tuple(entries))


def random_povm(
    rng: np.random.Generator,
    dim: int,
    n_outcomes: int,
    element_rank: int | None = None,
) -> FinitePOVM:
    """Random POVM via Gaussian factors and symmetric normalization.

    Draw ``A_i = G_i G_i†`` with complex Gaussian ``G_i`` of width
    ``element_rank`` (defaults to ``dim``), then conjugate each by
    ``S^{-1/2}`` where ``S = sum(A_i)``.  Outcome points are labels.
    """
    k = element_rank or dim
    if n_outcomes * k < dim:
        raise ValueError("need n_outcomes * element_rank >= dim for completeness")
    raw = []
    for _ in range(n_outcomes):
        g = rng.normal(size=(dim, k)) + 1j * rng.normal(size=(dim, k))
        raw.append(g @ g.conj().T)
    total = np.sum(raw, axis=0)
    w, v = np.linalg.eigh(total)
    inv_sqrt = v @ np.diag(1.0 / np.sqrt(w)) @ v.conj().T
    entries = [(i, inv_sqrt @ a @ inv_sqrt) for i, a in enumerate(raw)]
    return FinitePOVM(dim=dim, space=FiniteLabels(n_outcomes), entries=tuple(entries))


def random_density_matrix(rng: np.random.Generator, dim: int, rank: int | None = None) -> np.ndarray:
    """Random mixed state from a normalized Wishart factor."""
    k = rank or dim
    g = rng.normal(size=(dim, k)) + 1j * rng.normal(size=(dim, k))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_pure_state(rng: np.random.Generator, dim: int) -> np.ndarray:
    psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    psi /= np.linalg.norm(psi)
    return np.outer(psi, psi.conj())
