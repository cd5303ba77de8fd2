"""Dual data processing for informationally complete measurements.

For a finite POVM whose elements span the Hermitian space, any operator
A admits outcome coefficients with ``sum_i f(i) P_i = A``; averaging
``f`` over measurement records then estimates ``Tr[rho A]`` without
reconstructing the state.  The spin-direction family has the closed-form
continuous dual ``f_A(n) = a0 + 3 a . n`` for ``A = a0 I + a . sigma``;
the phase family only spans the diagonal-constant (Toeplitz) operators
and gets a Fourier dual on that span.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import operators as op
from . import quadrature as quad
from .errors import EmptySample, NotInformationallyComplete
from .families import PAULI, phase_kets, plus_spinors
from .outcomes import TWO_PI
from .povm import FinitePOVM
from .sampling import OutcomeRecords


def is_informationally_complete(p: FinitePOVM, gap: float = op.GAP_THRESHOLD) -> bool:
    """True iff the elements span the d**2-dimensional Hermitian space."""
    coords = np.column_stack([op.hermitian_to_coords(el) for el in p.elements])
    s = np.linalg.svd(coords, compute_uv=False)
    scale = max(1.0, float(s[0])) if s.size else 1.0
    rank = int(np.count_nonzero(s > gap * scale))
    return rank == p.dim**2


@dataclass(frozen=True)
class DualProcessing:
    """Outcome function reproducing a target operator under the POVM.

    ``kind`` selects the evaluation rule:

    * ``"finite"``: per-entry coefficients, evaluated by entry index;
    * ``"spin"``: ``f(n) = a0 + 3 a . n`` on sphere points;
    * ``"phase"``: trigonometric polynomial on angles.
    """

    target: np.ndarray
    kind: str
    coefficients: np.ndarray | None = field(default=None, compare=False)
    a0: float = 0.0
    avec: np.ndarray | None = field(default=None, compare=False)
    fourier: np.ndarray | None = field(default=None, compare=False)

    def evaluate(self, records) -> np.ndarray:
        """Per-record processing values ``f(omega)`` (or ``f(i)``)."""
        if self.kind == "finite":
            if isinstance(records, OutcomeRecords):
                if records.i is not None:
                    return self.coefficients[records.i]
                return self.coefficients[np.asarray(records.omega, dtype=int)]
            return self.coefficients[np.asarray(records, dtype=int)]
        omega = records.omega if isinstance(records, OutcomeRecords) else records
        if self.kind == "spin":
            pts = np.atleast_2d(np.asarray(omega, dtype=float))
            return self.a0 + 3.0 * pts @ self.avec
        phis = np.asarray(omega, dtype=float)
        d = self.target.shape[0]
        vals = np.full(phis.shape, float(self.fourier[0].real))
        for k in range(1, d):
            vals += 2.0 * (self.fourier[k] * np.exp(1j * k * phis)).real
        return vals


def dual_coefficients(p: FinitePOVM, a: np.ndarray, gap: float = op.GAP_THRESHOLD) -> DualProcessing:
    """Solve ``sum_i f(i) P_i = A`` in real Hermitian coordinates.

    Uses the minimum-norm least-squares solution, unique when the
    elements are linearly independent (SIC case).
    """
    a = op.check_hermitian(a, name="target")
    if a.shape[0] != p.dim:
        raise NotInformationallyComplete("target dimension does not match POVM")
    if not is_informationally_complete(p, gap=gap):
        raise NotInformationallyComplete(
            "POVM elements do not span the operator space"
        )
    mat = np.column_stack([op.hermitian_to_coords(el) for el in p.elements])
    rhs = op.hermitian_to_coords(a)
    coeff, *_ = np.linalg.lstsq(mat, rhs, rcond=None)
    residual = op.frobenius(
        sum(c * el for c, el in zip(coeff, p.elements)) - a
    )
    if residual > 1e-8 * (1.0 + op.frobenius(a)):
        raise NotInformationallyComplete(f"dual residual {residual:.3e} too large")
    return DualProcessing(target=a, kind="finite", coefficients=coeff)


def pauli_components(a: np.ndarray) -> tuple[float, np.ndarray]:
    """Decompose a 2x2 Hermitian ``A = a0 I + a . sigma``."""
    a = op.check_hermitian(a, name="target")
    a0 = float(np.trace(a).real) / 2.0
    avec = np.array(
        [float(np.trace(a @ PAULI[k]).real) / 2.0 for k in ("x", "y", "z")]
    )
    return a0, avec


def spin_dual(a: np.ndarray) -> DualProcessing:
    """Closed-form dual for the spin-direction family.

    ``f_A(n) = a0 + 3 a . n`` reproduces A because the direction density
    has first moment ``n/3`` per axis under ``dn/2pi`` normalization.
    """
    a0, avec = pauli_components(a)
    return DualProcessing(target=np.asarray(a, dtype=complex), kind="spin", a0=a0, avec=avec)


def phase_dual(d: int, a: np.ndarray) -> DualProcessing:
    """Fourier dual for the phase family, defined on the Toeplitz span.

    Requires A constant along diagonals; other operators are invisible
    to phase statistics.
    """
    a = op.check_hermitian(a, name="target")
    if a.shape[0] != d:
        raise NotInformationallyComplete("target dimension mismatch")
    fourier = np.zeros(d, dtype=complex)
    for k in range(d):
        diag = np.diagonal(a, offset=k)
        if diag.size > 1 and np.max(np.abs(diag - diag[0])) > 1e-10:
            raise NotInformationallyComplete(
                "phase statistics determine only diagonal-constant operators"
            )
        fourier[k] = diag[0]
    return DualProcessing(target=a, kind="phase", fourier=fourier)


def spin_dual_residual(dual: DualProcessing, budget: int = 2048) -> float:
    """``|| int dn/2pi f(n) |n><n| - A ||_F`` by sphere quadrature."""
    n_u = max(8, int(round(np.sqrt(budget / 2.0))))
    pts, w = quad.sphere_nodes(n_u, 2 * n_u)
    spin = plus_spinors(pts)
    f = dual.evaluate(pts)
    integral = np.einsum("n,ni,nj->ij", w / TWO_PI * f, spin, spin.conj())
    return op.frobenius(integral - dual.target)


def phase_dual_residual(dual: DualProcessing, budget: int = 1024) -> float:
    d = dual.target.shape[0]
    phis, w = quad.circle_nodes(max(64, budget))
    kets = phase_kets(d, phis)
    f = dual.evaluate(phis)
    integral = np.einsum("n,ni,nj->ij", w / TWO_PI * f, kets, kets.conj())
    return op.frobenius(integral - dual.target)


@dataclass(frozen=True)
class EstimateReport:
    """Sample-mean estimate of ``Tr[rho A]`` with its standard error."""

    estimate: float
    std_error: float
    n: int
    exact: float | None = None


def estimate_expectation(
    records,
    dual: DualProcessing,
    rho_exact: np.ndarray | None = None,
) -> EstimateReport:
    """Average the dual processing over measurement records."""
    if len(records) == 0:
        raise EmptySample("no records to average")
    vals = np.asarray(dual.evaluate(records), dtype=float)
    n = len(vals)
    mean = float(vals.mean())
    se = float(vals.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    exact = None
    if rho_exact is not None:
        rho = op.check_density_matrix(rho_exact)
        exact = float(np.trace(rho @ dual.target).real)
    return EstimateReport(estimate=mean, std_error=se, n=n, exact=exact)
