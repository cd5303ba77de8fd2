"""Continuous measurement families and their randomized realizations.

Two continuous POVMs are built in:

* direction measurement for a spin-1/2 system, density ``|n><n|`` with
  base measure ``dn / 2*pi`` over the unit sphere, where ``|n>`` is the
  spin-up eigenvector along ``n``;
* covariant phase measurement in dimension d, density ``|phi><phi| / d``
  with base measure ``d * dphi / 2*pi``, where
  ``|phi> = sum_n exp(i n phi) |n>`` (squared norm d).

Each comes with its exact randomization: a classical mixing distribution
over a parameter x together with a map from x to a finite POVM whose
relabeled outcomes reproduce the continuous statistics — a uniformly
oriented two-outcome projective measurement for the spin family, and a
uniformly shifted d-point phase comb for the phase family.  Region
probabilities of scheme averages agree with the continuous POVM exactly;
`verify_scheme_equivalence` checks that numerically state by state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import operators as op
from . import quadrature as quad
from .errors import InvalidDimension, SpaceMismatch, UnsupportedFamily
from .outcomes import (
    CIRCLE,
    SPHERE,
    TWO_PI,
    FiniteLabels,
    OutcomeSpace,
    Region,
    normalize_angle,
    require_same_space,
)
from .povm import FinitePOVM, born_probabilities, probability_of_region

PAULI = {
    "x": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    "y": np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    "z": np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
}


# --- state vectors ----------------------------------------------------------

def plus_spinors(points: np.ndarray) -> np.ndarray:
    """Spin-up eigenvectors along unit vectors, shape (m, 2).

    Gauge fixed as ``(cos(theta/2), exp(i phi) sin(theta/2))``; at the
    poles the azimuth is taken to be zero.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    u = np.clip(pts[:, 2], -1.0, 1.0)
    c = np.sqrt((1.0 + u) / 2.0)
    s = np.sqrt((1.0 - u) / 2.0)
    r = np.hypot(pts[:, 0], pts[:, 1])
    phase = np.where(r > 1e-15, (pts[:, 0] + 1j * pts[:, 1]) / np.where(r > 1e-15, r, 1.0), 1.0)
    return np.column_stack([c.astype(complex), phase * s])


def spinor_expectations(rho: np.ndarray, spinors: np.ndarray) -> np.ndarray:
    """``<psi|rho|psi>`` for each row, clipped to [0, 1]."""
    vals = np.einsum("ni,ij,nj->n", spinors.conj(), rho, spinors).real
    return np.clip(vals, 0.0, 1.0)


def phase_kets(d: int, phis: np.ndarray) -> np.ndarray:
    """Unnormalized phase vectors ``sum_n exp(i n phi)|n>``, shape (m, d)."""
    phis = np.atleast_1d(np.asarray(phis, dtype=float))
    return np.exp(1j * np.outer(phis, np.arange(d)))


def phase_intensity(rho: np.ndarray, phis: np.ndarray) -> np.ndarray:
    """``<phi|rho|phi>``; nonnegative, integrates to 1 against dphi/2pi."""
    kets = phase_kets(rho.shape[0], phis)
    return np.clip(np.einsum("ni,ij,nj->n", kets.conj(), rho, kets).real, 0.0, None)


# --- continuous POVMs -------------------------------------------------------

class ContinuousPOVM:
    """Base: a density of unit-trace PSD matrices over circle or sphere."""

    dim: int
    space: OutcomeSpace
    family: str
    base_measure: str

    def density(self, omega) -> np.ndarray:
        raise NotImplementedError

    def region_operator(self, region: Region) -> np.ndarray:
        raise NotImplementedError

    def region_probability(self, rho: np.ndarray, region: Region) -> float:
        require_same_space(self.space, region.space, "POVM and region")
        rho = op.check_density_matrix(rho)
        val = float(np.trace(rho @ self.region_operator(region)).real)
        return min(max(val, 0.0), 1.0)


class SpinDirectionPOVM(ContinuousPOVM):
    """Direction measurement for spin 1/2: density ``|n><n|``, measure dn/2pi."""

    def __init__(self):
        self.dim = 2
        self.space = SPHERE
        self.family = "spin_direction"
        self.base_measure = "dn/(2*pi)"

    def density(self, omega) -> np.ndarray:
        psi = plus_spinors(np.asarray(omega, dtype=float))[0]
        return np.outer(psi, psi.conj())

    @staticmethod
    def cap_operator(axis, angle: float) -> np.ndarray:
        """Exact integral of ``|n><n| dn/2pi`` over a closed cap.

        Equals ``(1 - c) I/2 + (1 - c^2)/4 (axis . sigma)`` with
        ``c = cos(angle)``.
        """
        c = float(np.cos(angle))
        ax = np.asarray(axis, dtype=float)
        sig = ax[0] * PAULI["x"] + ax[1] * PAULI["y"] + ax[2] * PAULI["z"]
        return (1.0 - c) * np.eye(2, dtype=complex) / 2.0 + (1.0 - c * c) / 4.0 * sig

    def region_operator(self, region: Region) -> np.ndarray:
        if region.caps is None:
            raise SpaceMismatch("spin-direction regions are cap unions")
        if not region.caps_pairwise_disjoint():
            raise ValueError(
                "exact region operators need pairwise disjoint caps"
            )
        total = np.zeros((2, 2), dtype=complex)
        for cap in region.caps:
            total += self.cap_operator(cap.axis_array, cap.angle)
        if region.complement:
            total = np.eye(2, dtype=complex) - total
        return total


class CirclePhasePOVM(ContinuousPOVM):
    """Covariant phase measurement: density ``|phi><phi|/d``, measure d*dphi/2pi."""

    def __init__(self, d: int):
        if d < 2:
            raise InvalidDimension(f"phase measurement needs d >= 2, got {d}")
        if d > op.MAX_DIM:
            raise InvalidDimension(f"dimension {d} beyond supported {op.MAX_DIM}")
        self.dim = d
        self.space = CIRCLE
        self.family = "phase"
        self.base_measure = "d*dphi/(2*pi)"

    def density(self, omega) -> np.ndarray:
        ket = phase_kets(self.dim, float(omega))[0]
        return np.outer(ket, ket.conj()) / self.dim

    @staticmethod
    def _interval_operator(d: int, a: float, b: float) -> np.ndarray:
        """``int_a^b dphi/2pi |phi><phi|`` entrywise in closed form."""
        m = np.arange(d)
        k = m[:, None] - m[None, :]
        out = np.empty((d, d), dtype=complex)
        np.fill_diagonal(out, (b - a) / TWO_PI)
        off = k != 0
        kk = k[off]
        out[off] = (np.exp(1j * kk * b) - np.exp(1j * kk * a)) / (TWO_PI * 1j * kk)
        return out

    def region_operator(self, region: Region) -> np.ndarray:
        if region.arcs is None:
            raise SpaceMismatch("phase regions are arc unions")
        total = np.zeros((self.dim, self.dim), dtype=complex)
        for a, b in region.arcs:
            total += self._interval_operator(self.dim, a, b)
        return total


def spin_direction_povm() -> SpinDirectionPOVM:
    return SpinDirectionPOVM()


def phase_povm(d: int) -> CirclePhasePOVM:
    return CirclePhasePOVM(d)


# --- randomized schemes -----------------------------------------------------

class RandomizedScheme:
    """Classical mixture over x of finite POVMs with relabeled outcomes."""

    parameter_space: OutcomeSpace
    outcome_space: OutcomeSpace
    dim: int
    family: str

    def member(self, x) -> FinitePOVM:
        raise NotImplementedError

    def sample_x(self, rng: np.random.Generator, size: int):
        raise NotImplementedError

    def member_probabilities(self, xs, rho: np.ndarray) -> np.ndarray:
        """Born probabilities of each member's entries, shape (m, n_entries)."""
        return np.array([born_probabilities(self.member(x), rho) for x in xs])

    def outcome_points(self, xs):
        """Outcome points per member entry, aligned with member_probabilities."""
        return [self.member(x).points for x in xs]

    def average_region_probability(
        self,
        rho: np.ndarray,
        region: Region,
        mode: str = "deterministic",
        budget: int | None = None,
        rng: np.random.Generator | None = None,
    ) -> tuple[float, float | None]:
        """Mixing average of member region probabilities.

        Returns ``(value, standard_error)``; the standard error is None
        in deterministic mode.
        """
        raise NotImplementedError

    def _montecarlo_average(self, rho, region, n: int, rng) -> tuple[float, float]:
        xs = self.sample_x(rng, n)
        probs = self.member_probabilities(xs, rho)
        vals = np.zeros(len(xs))
        points = self.outcome_points(xs)
        for j, pts in enumerate(points):
            inside = region.contains(
                np.array(pts) if region.caps is not None else np.array(pts, dtype=float)
            )
            vals[j] = float(np.sum(probs[j][inside]))
        return float(vals.mean()), float(vals.std(ddof=1) / np.sqrt(len(vals)))


class SternGerlachScheme(RandomizedScheme):
    """Uniformly oriented two-outcome projective spin measurement.

    The mixing parameter is the field direction n, uniform on the sphere
    (density ``1/4pi``); the member at n projects onto ``|n>`` and
    ``|-n>`` with outcomes relabeled to the directions ``+n`` and ``-n``.
    Two zero elements pad each member to four entries, so the member
    format matches the generic bound of ``dim**2`` outcomes.
    """

    def __init__(self):
        self.parameter_space = SPHERE
        self.outcome_space = SPHERE
        self.dim = 2
        self.family = "stern_gerlach"

    def member(self, x) -> FinitePOVM:
        n = np.asarray(x, dtype=float)
        psi_p = plus_spinors(n)[0]
        psi_m = plus_spinors(-n)[0]
        zero = np.zeros((2, 2), dtype=complex)
        return FinitePOVM(
            dim=2,
            space=SPHERE,
            entries=(
                (n, np.outer(psi_p, psi_p.conj())),
                (-n, np.outer(psi_m, psi_m.conj())),
                (n, zero),
                (-n, zero),
            ),
            allow_duplicates=True,
        )

    def sample_x(self, rng: np.random.Generator, size: int) -> np.ndarray:
        u = rng.uniform(-1.0, 1.0, size)
        phi = rng.uniform(0.0, TWO_PI, size)
        s = np.sqrt(1.0 - u * u)
        return np.column_stack([s * np.cos(phi), s * np.sin(phi), u])

    def member_probabilities(self, xs, rho: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(xs, dtype=float))
        q_up = spinor_expectations(rho, plus_spinors(pts))
        q_dn = spinor_expectations(rho, plus_spinors(-pts))
        zeros = np.zeros_like(q_up)
        return np.column_stack([q_up, q_dn, zeros, zeros])

    def outcome_points(self, xs):
        pts = np.atleast_2d(np.asarray(xs, dtype=float))
        return np.stack([pts, -pts, pts, -pts], axis=1)

    def average_region_probability(self, rho, region, mode="deterministic",
                                   budget=None, rng=None):
        require_same_space(self.outcome_space, region.space, "scheme and region")
        rho = op.check_density_matrix(rho)
        if mode in ("deterministic", "det"):
            budget = budget or quad.DEFAULT_SPHERE_BUDGET
            mirrored = Region.of_caps(
                [(tuple(-c.axis_array), c.angle) for c in region.caps],
                complement=region.complement,
            )

            def q_up(pts):
                return self.member_probabilities(pts, rho)[:, 0]

            def q_dn(pts):
                return self.member_probabilities(pts, rho)[:, 1]

            total = quad.integrate_sphere_region(q_up, region, budget)
            total += quad.integrate_sphere_region(q_dn, mirrored, budget)
            return float(total) / (2.0 * TWO_PI), None
        if mode in ("montecarlo", "mc"):
            if rng is None:
                raise ValueError("montecarlo mode needs an rng")
            return self._montecarlo_average(rho, region, budget or 100_000, rng)
        raise ValueError(f"unknown mode {mode!r}")


class PhaseShiftScheme(RandomizedScheme):
    """Uniformly shifted d-point phase comb.

    The member at shift x measures the subnormalized projectors onto the
    phase vectors at ``2*pi*n/d + x`` and declares the matching angle.
    The comb is ``2*pi/d``-periodic up to relabeling, so the mixing
    parameter is uniform on one period ``[0, 2*pi/d)`` with density
    ``d/2pi``; integrating the unfolded ``[0, 2*pi)`` form with density
    ``1/2pi`` gives the same averages.
    """

    def __init__(self, d: int):
        if d < 2:
            raise InvalidDimension(f"phase scheme needs d >= 2, got {d}")
        self.parameter_space = CIRCLE
        self.outcome_space = CIRCLE
        self.dim = d
        self.family = "phase"
        self.window = TWO_PI / d
        self.comb = np.arange(d) * self.window

    def member(self, x) -> FinitePOVM:
        x = float(x)
        entries = []
        for n in range(self.dim):
            angle = float(normalize_angle(self.comb[n] + x))
            ket = phase_kets(self.dim, angle)[0]
            entries.append((angle, np.outer(ket, ket.conj()) / self.dim))
        return FinitePOVM(dim=self.dim, space=CIRCLE, entries=tuple(entries))

    def sample_x(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.uniform(0.0, self.window, size)

    def member_probabilities(self, xs, rho: np.ndarray) -> np.ndarray:
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        angles = xs[:, None] + self.comb[None, :]
        flat = phase_intensity(rho, angles.ravel()) / self.dim
        return flat.reshape(len(xs), self.dim)

    def outcome_points(self, xs):
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        return normalize_angle(xs[:, None] + self.comb[None, :])

    def average_region_probability(self, rho, region, mode="deterministic",
                                   budget=None, rng=None):
        require_same_space(self.outcome_space, region.space, "scheme and region")
        rho = op.check_density_matrix(rho)
        if mode in ("deterministic", "det"):
            budget = budget or 1024
            total = 0.0
            for n in range(self.dim):
                shifted = Region.of_arcs(
                    [(a - self.comb[n], b - self.comb[n]) for a, b in region.arcs]
                )
                pieces = quad.intersect_arcs_with_window(
                    shifted.arcs, 0.0, self.window
                )
                if not pieces:
                    continue
                order = int(min(64, max(12, budget // max(1, len(pieces) * self.dim))))

                def q_n(x, n=n):
                    return self.member_probabilities(x, rho)[:, n]

                total += quad.integrate_intervals(q_n, pieces, order=order)
            return float(total) * self.dim / TWO_PI, None
        if mode in ("montecarlo", "mc"):
            if rng is None:
                raise ValueError("montecarlo mode needs an rng")
            return self._montecarlo_average(rho, region, budget or 100_000, rng)
        raise ValueError(f"unknown mode {mode!r}")


class FiniteMixtureScheme(RandomizedScheme):
    """Explicit finite mixture of finite POVMs over a shared outcome space."""

    def __init__(self, terms):
        terms = [(float(w), povm) for w, povm in terms]
        if not terms:
            raise ValueError("mixture needs at least one term")
        total = sum(w for w, _ in terms)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"mixture weights sum to {total}, not 1")
        first = terms[0][1]
        for _, povm in terms:
            require_same_space(first.space, povm.space, "mixture members")
        self.terms = terms
        self.parameter_space = FiniteLabels(len(terms))
        self.outcome_space = first.space
        self.dim = first.dim
        self.family = "finite_mixture"

    def member(self, x) -> FinitePOVM:
        return self.terms[int(x)][1]

    def sample_x(self, rng: np.random.Generator, size: int) -> np.ndarray:
        w = np.array([w for w, _ in self.terms])
        return rng.choice(len(self.terms), size=size, p=w / w.sum())

    def average_region_probability(self, rho, region, mode="deterministic",
                                   budget=None, rng=None):
        rho = op.check_density_matrix(rho)
        if mode in ("montecarlo", "mc"):
            if rng is None:
                raise ValueError("montecarlo mode needs an rng")
            return self._montecarlo_average(rho, region, budget or 100_000, rng)
        val = sum(
            w * probability_of_region(povm, rho, region) for w, povm in self.terms
        )
        return float(val), None


class ConstantScheme(RandomizedScheme):
    """Degenerate one-member wrapper around a continuous POVM.

    Useful as the identity-mixing baseline: equivalence against the
    wrapped POVM is zero by construction.
    """

    def __init__(self, c: ContinuousPOVM):
        self.wrapped = c
        self.parameter_space = FiniteLabels(1)
        self.outcome_space = c.space
        self.dim = c.dim
        self.family = f"constant({c.family})"

    def member(self, x):
        raise UnsupportedFamily("constant scheme has no finite member")

    def sample_x(self, rng, size):
        return np.zeros(size, dtype=int)

    def average_region_probability(self, rho, region, mode="deterministic",
                                   budget=None, rng=None):
        return self.wrapped.region_probability(rho, region), None


def stern_gerlach_scheme() -> SternGerlachScheme:
    return SternGerlachScheme()


def phase_scheme(d: int) -> PhaseShiftScheme:
    return PhaseShiftScheme(d)


def scheme_from_decomposition(result) -> FiniteMixtureScheme:
    """View a convex decomposition as a finite randomized scheme."""
    return FiniteMixtureScheme(list(result.terms))


# --- equivalence checking ---------------------------------------------------

@dataclass(frozen=True)
class EquivalenceRow:
    state_id: str
    region_id: str
    p_continuous: float
    p_scheme: float
    diff: float
    std_error: float | None


@dataclass(frozen=True)
class EquivalenceReport:
    mode: str
    budget: int | None
    rows: tuple[EquivalenceRow, ...]

    @property
    def max_abs_diff(self) -> float:
        return max(abs(r.diff) for r in self.rows)


def _with_ids(items, prefix):
    out = []
    for k, item in enumerate(items):
        if isinstance(item, tuple) and len(item) == 2 and isinstance(item[0], str):
            out.append(item)
        else:
            out.append((f"{prefix}{k}", item))
    return out


def verify_scheme_equivalence(
    c: ContinuousPOVM,
    s: RandomizedScheme,
    states,
    regions,
    mode: str = "deterministic",
    budget: int | None = None,
    seed: int | None = None,
) -> EquivalenceReport:
    """Compare continuous region probabilities with scheme averages.

    ``states`` is a list of density matrices (optionally ``(id, rho)``
    pairs), ``regions`` a list of regions (optionally ``(id, region)``).
    Deterministic mode integrates the mixing parameter with product
    quadrature split along region boundaries; montecarlo mode draws
    mixing parameters with the given seed and reports standard errors.
    """
    require_same_space(c.space, s.outcome_space, "continuous POVM and scheme")
    rng = None
    if mode in ("montecarlo", "mc"):
        if seed is None:
            raise ValueError("montecarlo mode requires a seed")
        from .sampling import make_rng

        rng = make_rng(seed)
    rows = []
    for sid, rho in _with_ids(states, "state"):
        rho = op.check_density_matrix(rho)
        for rid, region in _with_ids(regions, "region"):
            require_same_space(c.space, region.space, "POVM and region")
            p_cont = c.region_probability(rho, region)
            p_sch, se = s.average_region_probability(
                rho, region, mode=mode, budget=budget, rng=rng
            )
            rows.append(
                EquivalenceRow(
                    state_id=sid,
                    region_id=rid,
                    p_continuous=p_cont,
                    p_scheme=p_sch,
                    diff=p_sch - p_cont,
                    std_error=se,
                )
            )
    return EquivalenceReport(mode=mode, budget=budget, rows=tuple(rows))
