"""Outcome generation and statistical comparison.

Two routes produce outcomes of a continuous measurement:

* direct sampling from the exact outcome density (inverse-CDF methods:
  a quadratic inversion for the spin family, closed-form trigonometric
  CDF plus bisection for the phase family);
* the two-stage route: draw the classical mixing parameter, measure the
  finite member POVM, declare the member's outcome point.

Both use counter-based Philox generators keyed by explicit seeds, so
every run is reproducible and parallel streams never overlap by
construction.  `compare_samples` runs a two-sample chi-square test over
a region partition to check that the two routes are statistically
indistinguishable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaincc

from . import operators as op
from . import quadrature as quad
from .errors import EmptySample, SparseBins, UnsupportedFamily
from .families import (
    CirclePhasePOVM,
    ContinuousPOVM,
    PhaseShiftScheme,
    RandomizedScheme,
    SpinDirectionPOVM,
    SternGerlachScheme,
)
from .outcomes import TWO_PI, normalize_angle

_MASK64 = (1 << 64) - 1


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based Philox generator keyed by (seed, stream).

    Distinct streams are statistically independent; the same pair always
    reproduces the same sequence.
    """
    if seed < 0 or stream < 0:
        raise ValueError("seed and stream must be nonnegative")
    key = np.array([seed & _MASK64, stream & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class OutcomeRecord:
    """One measurement outcome; ``x``/``i`` absent for direct sampling."""

    omega: object
    i: int | None = None
    x: object = None


class OutcomeRecords:
    """Columnar list of outcome records.

    Behaves as a sequence of :class:`OutcomeRecord` while storing the
    columns as arrays, which the estimators and the goodness-of-fit
    machinery consume directly.
    """

    def __init__(self, space, omega: np.ndarray, i: np.ndarray | None = None,
                 x: np.ndarray | None = None):
        self.space = space
        self.omega = omega
        self.i = i
        self.x = x

    def __len__(self) -> int:
        return len(self.omega)

    def __getitem__(self, k: int) -> OutcomeRecord:
        return OutcomeRecord(
            omega=self.omega[k],
            i=None if self.i is None else int(self.i[k]),
            x=None if self.x is None else self.x[k],
        )

    def __iter__(self):
        for k in range(len(self)):
            yield self[k]


# --- direct sampling --------------------------------------------------------

def _bloch_vector(psi: np.ndarray) -> np.ndarray:
    a, b = psi
    return np.array(
        [2.0 * (np.conj(a) * b).real, 2.0 * (np.conj(a) * b).imag,
         (abs(a) ** 2 - abs(b) ** 2)]
    )


def _sample_spin_direct(rho: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
    """Directions from the density ``<n|rho|n>/2pi`` via exact inversion.

    In the eigenframe of ``rho`` the polar cosine u has density
    ``(1 + r u)/2`` with r = 2*(top eigenvalue) - 1, inverted in closed
    form; the azimuth is uniform.
    """
    w, v = op.eigh(rho)
    axis = _bloch_vector(v[:, 0])
    r = 2.0 * float(w[0]) - 1.0
    vdraw = rng.uniform(0.0, 1.0, n)
    if abs(r) < 1e-12:
        u = 2.0 * vdraw - 1.0
    else:
        u = (-1.0 + np.sqrt((1.0 - r) ** 2 + 4.0 * r * vdraw)) / r
    u = np.clip(u, -1.0, 1.0)
    phi = rng.uniform(0.0, TWO_PI, n)
    s = np.sqrt(1.0 - u * u)
    local = np.column_stack([s * np.cos(phi), s * np.sin(phi), u])
    return local @ quad.rotation_to(axis).T


def spin_polar_cdf(rho: np.ndarray, u: np.ndarray) -> np.ndarray:
    """CDF of the polar cosine in the state's eigenframe (test hook)."""
    w, _ = op.eigh(rho)
    r = 2.0 * float(w[0]) - 1.0
    return (u + 1.0) / 2.0 + r * (u * u - 1.0) / 4.0


def phase_cdf(rho: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """Closed-form CDF of the phase outcome density ``<phi|rho|phi>/2pi``."""
    d = rho.shape[0]
    phi = np.asarray(phi, dtype=float)
    total = phi.astype(float).copy()
    for k in range(1, d):
        ck = np.trace(rho, offset=k)
        total += (2.0 / k) * (ck * (np.exp(1j * k * phi) - 1.0)).imag
    return total / TWO_PI


def _sample_phase_direct(rho: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
    """Phases by bisecting the closed-form CDF to 1e-12."""
    targets = rng.uniform(0.0, 1.0, n)
    lo = np.zeros(n)
    hi = np.full(n, TWO_PI)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        below = phase_cdf(rho, mid) < targets
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


def sample_direct(c: ContinuousPOVM, rho: np.ndarray, n: int, seed: int) -> OutcomeRecords:
    """i.i.d. outcomes of a named continuous family from its exact density."""
    rho = op.check_density_matrix(rho)
    rng = make_rng(seed)
    if isinstance(c, SpinDirectionPOVM):
        pts = _sample_spin_direct(rho, n, rng)
        return OutcomeRecords(space=c.space, omega=pts)
    if isinstance(c, CirclePhasePOVM):
        if rho.shape[0] != c.dim:
            raise UnsupportedFamily("state dimension does not match family")
        return OutcomeRecords(space=c.space, omega=_sample_phase_direct(rho, n, rng))
    raise UnsupportedFamily(f"no direct sampler for family {c.family!r}")


# --- two-stage sampling -----------------------------------------------------

def sample_two_stage(s: RandomizedScheme, rho: np.ndarray, n: int, seed: int) -> OutcomeRecords:
    """Outcomes via the randomization recipe.

    Draw the mixing parameter, then an apparatus outcome from the member
    POVM's Born probabilities, then record the member's outcome point.
    """
    rho = op.check_density_matrix(rho)
    rng = make_rng(seed)
    if isinstance(s, SternGerlachScheme):
        xs = s.sample_x(rng, n)
        q_up = s.member_probabilities(xs, rho)[:, 0]
        i = (rng.uniform(0.0, 1.0, n) >= q_up).astype(int)
        omega = np.where(i[:, None] == 0, xs, -xs)
        return OutcomeRecords(space=s.outcome_space, omega=omega, i=i, x=xs)
    if isinstance(s, PhaseShiftScheme):
        xs = s.sample_x(rng, n)
        probs = s.member_probabilities(xs, rho)
        cum = np.cumsum(probs, axis=1)
        cum /= cum[:, -1:]
        draws = rng.uniform(0.0, 1.0, n)
        i = (draws[:, None] > cum).sum(axis=1)
        omega = normalize_angle(xs + s.comb[i])
        return OutcomeRecords(space=s.outcome_space, omega=omega, i=i, x=xs)
    # generic route: one member at a time
    xs = s.sample_x(rng, n)
    idx = np.empty(n, dtype=int)
    omegas = []
    for j in range(n):
        member = s.member(xs[j])
        from .povm import born_probabilities

        p = born_probabilities(member, rho)
        total = p.sum()
        p = p / total if total > 0 else np.full(len(p), 1.0 / len(p))
        idx[j] = rng.choice(len(p), p=p)
        omegas.append(member.points[idx[j]])
    omega = np.array(omegas)
    return OutcomeRecords(space=s.outcome_space, omega=omega, i=idx, x=np.asarray(xs))


# --- goodness of fit --------------------------------------------------------

@dataclass(frozen=True)
class GofReport:
    """Two-sample chi-square result over a fixed partition."""

    statistic: float
    dof: int
    p_value: float
    bin_spec: str


def sphere12_bins(points: np.ndarray) -> np.ndarray:
    """Hemisphere x 6 azimuthal sectors: 12 equal-area bins."""
    pts = np.atleast_2d(points)
    phi = normalize_angle(np.arctan2(pts[:, 1], pts[:, 0]))
    sector = np.minimum((phi / (TWO_PI / 6.0)).astype(int), 5)
    hemi = (pts[:, 2] < 0.0).astype(int)
    return hemi * 6 + sector


def circle16_bins(points: np.ndarray) -> np.ndarray:
    phi = normalize_angle(np.asarray(points, dtype=float))
    return np.minimum((phi / (TWO_PI / 16.0)).astype(int), 15)


_PRESETS = {"sphere12": (sphere12_bins, 12), "circle16": (circle16_bins, 16)}


def _bin_indices(records, bins) -> tuple[np.ndarray, int, str]:
    omega = records.omega if isinstance(records, OutcomeRecords) else np.asarray(records)
    if isinstance(bins, str):
        if bins not in _PRESETS:
            raise ValueError(f"unknown bin preset {bins!r}")
        fn, count = _PRESETS[bins]
        return fn(omega), count, bins
    # explicit region partition
    member = np.stack([r.contains(omega) for r in bins])
    hits = member.sum(axis=0)
    if np.any(hits != 1):
        raise ValueError("bins are not a disjoint cover of the sampled points")
    return member.argmax(axis=0), len(bins), f"{len(bins)} regions"


def compare_samples(a, b, bins, min_expected: float = 5.0) -> GofReport:
    """Two-sample chi-square test that two outcome lists share a law.

    ``bins`` is a preset name (``"sphere12"``, ``"circle16"``) or a list
    of disjoint covering regions.  Expected counts below ``min_expected``
    raise :class:`SparseBins`; the p-value comes from the regularized
    upper incomplete gamma function.
    """
    ia, n_bins, spec = _bin_indices(a, bins)
    ib, n_bins_b, _ = _bin_indices(b, bins)
    if n_bins != n_bins_b:
        raise ValueError("bin specs disagree")
    ca = np.bincount(ia, minlength=n_bins).astype(float)
    cb = np.bincount(ib, minlength=n_bins).astype(float)
    ka, kb = ca.sum(), cb.sum()
    if ka == 0 or kb == 0:
        raise EmptySample("both samples must be nonempty")
    pooled = (ca + cb) / (ka + kb)
    if np.any(ka * pooled < min_expected) or np.any(kb * pooled < min_expected):
        raise SparseBins(
            f"expected count below {min_expected} in some bin; coarsen the partition"
        )
    ra, rb = np.sqrt(kb / ka), np.sqrt(ka / kb)
    stat = float(np.sum((ra * ca - rb * cb) ** 2 / (ca + cb)))
    dof = n_bins - 1
    p = float(gammaincc(dof / 2.0, stat / 2.0))
    return GofReport(statistic=stat, dof=dof, p_value=p, bin_spec=spec)
