"""Bogoliubov transformations and pair-amplitude charts.

A map carries matrices (u, v), an affine shift (bosonic only) and a parity
flag (fermionic only), and acts on ladder operators as

    b_i = sum_j u_ij a_j + sum_j v_ij a*_j + shift_i ,

together with the conjugate relation for b*_i.  Valid bosonic maps preserve
the canonical commutators, which at matrix level reads

    u u^dag - v v^dag = 1,   u v^T = v u^T ,

and valid fermionic maps preserve the anticommutators,

    u u^dag + v v^dag = 1,   u v^T = -v u^T .

Charts: an even (nondegenerate, in the fermionic case) Gaussian state is
written as  normalization * displacement(shift) * exp(1/2 z_ij a*_i a*_j) vac
with z symmetric of norm < 1 (Bose) or antisymmetric (Fermi).

Generators: the pair (pair, shift) labels the unitary

    exp(i (X + Y)),  X = 1/2 sum_ij pair_ij a*_i a*_j + h.c.,
                     Y = sum_i shift_i a*_i + h.c.

The half-sum in X makes the closed forms below exact: the chart matrix of the
generated state is  z = i tanh(s)/s pair  (Bose) or  i tan(s)/s pair  (Fermi)
with s the singular-value argument sqrt(pair pair^dag).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    ChartDomainError,
    DegeneracyError,
    InvalidGeneratorError,
    InvalidMapError,
    StatisticsMismatchError,
)
from .wick import Statistics, WickPolynomial

#: Relative singular-value threshold below which a fermionic state counts as
#: having no vacuum overlap (the chart blows up there).
DEGENERACY_RTOL = 1e-10


def _readonly(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=complex)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class BogoliubovMap:
    stats: Statistics
    u: np.ndarray
    v: np.ndarray
    shift: np.ndarray
    odd: bool = False

    def __post_init__(self):
        u = _readonly(self.u)
        v = _readonly(self.v)
        shift = _readonly(self.shift)
        n = u.shape[0]
        if u.shape != (n, n) or v.shape != (n, n) or shift.shape != (n,):
            raise InvalidMapError("u, v must be square and shift a matching vector")
        if self.stats is Statistics.FERMI and np.any(shift != 0):
            raise InvalidMapError("fermionic maps carry no affine shift")
        if self.stats is Statistics.BOSE and self.odd:
            raise InvalidMapError("bosonic maps have no odd parity sector")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "shift", shift)

    @property
    def n_modes(self) -> int:
        return self.u.shape[0]


def _require_same(m1: BogoliubovMap, m2: BogoliubovMap) -> None:
    if m1.stats is not m2.stats or m1.n_modes != m2.n_modes:
        raise StatisticsMismatchError("maps differ in statistics or mode count")


def residual_norms(m: BogoliubovMap) -> tuple[float, float]:
    """Frobenius norms of the two matrix-level group conditions."""
    sign = 1.0 if m.stats is Statistics.FERMI else -1.0
    eye = np.eye(m.n_modes)
    r1 = np.linalg.norm(m.u @ m.u.conj().T + sign * (m.v @ m.v.conj().T) - eye)
    r2 = np.linalg.norm(m.u @ m.v.T + sign * (m.v @ m.u.T))
    return float(r1), float(r2)


def require_valid(m: BogoliubovMap, tol: float = 1e-10) -> None:
    r1, r2 = residual_norms(m)
    if r1 > tol or r2 > tol:
        raise InvalidMapError(f"map violates group conditions: residuals ({r1:.3e}, {r2:.3e})")


def preserves_form(m: BogoliubovMap, rng: np.random.Generator, n_pairs: int = 20) -> float:
    """Largest sampled violation of the invariant bilinear form.

    The linear part z -> u z + v conj(z) must preserve Im <z|z'> for bosons
    and Re <z|z'> for fermions; the affine shift drops out on differences.
    """
    n = m.n_modes
    worst = 0.0
    part = np.imag if m.stats is Statistics.BOSE else np.real
    for _ in range(n_pairs):
        z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        w = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        tz = m.u @ z + m.v @ np.conj(z)
        tw = m.u @ w + m.v @ np.conj(w)
        worst = max(worst, abs(part(np.vdot(tz, tw)) - part(np.vdot(z, w))))
    return worst


def identity(n: int, stats: Statistics) -> BogoliubovMap:
    return BogoliubovMap(stats, np.eye(n, dtype=complex), np.zeros((n, n), complex),
                         np.zeros(n, complex))


def compose(m1: BogoliubovMap, m2: BogoliubovMap) -> BogoliubovMap:
    """Map whose conjugation action applies m2 first, then m1."""
    _require_same(m1, m2)
    u = m2.u @ m1.u + m2.v @ np.conj(m1.v)
    v = m2.u @ m1.v + m2.v @ np.conj(m1.u)
    shift = m2.u @ m1.shift + m2.v @ np.conj(m1.shift) + m2.shift
    return BogoliubovMap(m1.stats, u, v, shift, odd=m1.odd ^ m2.odd)


def inverse(m: BogoliubovMap) -> BogoliubovMap:
    """Group inverse, via the adjoint closed form (no matrix inversion needed)."""
    sign = 1.0 if m.stats is Statistics.FERMI else -1.0
    u = m.u.conj().T
    v = sign * m.v.T
    shift = -(u @ m.shift + v @ np.conj(m.shift))
    return BogoliubovMap(m.stats, u, v, shift, odd=m.odd)


def number_conserving(p: np.ndarray, stats: Statistics) -> BogoliubovMap:
    """Gauge map mixing only like operators; p must be unitary."""
    p = np.asarray(p, dtype=complex)
    n = p.shape[0]
    if np.linalg.norm(p @ p.conj().T - np.eye(n)) > 1e-10:
        raise InvalidMapError("number-conserving maps require a unitary matrix")
    return BogoliubovMap(stats, p, np.zeros((n, n), complex), np.zeros(n, complex))


def reflection(direction: np.ndarray, stats: Statistics = Statistics.FERMI) -> BogoliubovMap:
    """Odd fermionic map implemented by the unitary  y_i a*_i + conj(y_i) a_i.

    Conjugation by that unitary sends a_k to  (y y^dag - 1) a + (y y^T) a*,
    which is what this returns; ``direction`` must be a unit vector.
    """
    if stats is not Statistics.FERMI:
        raise StatisticsMismatchError("reflections exist only for fermions")
    y = np.asarray(direction, dtype=complex)
    if abs(np.linalg.norm(y) - 1.0) > 1e-12:
        raise InvalidMapError("reflection direction must have unit norm")
    n = y.shape[0]
    u = np.outer(y, np.conj(y)) - np.eye(n)
    v = np.outer(y, y)
    return BogoliubovMap(stats, u, v, np.zeros(n, complex), odd=True)


@dataclass(frozen=True)
class Generator:
    """Quadratic-plus-linear Hermitian generator data (see module docstring)."""

    stats: Statistics
    pair: np.ndarray
    shift: np.ndarray

    def __post_init__(self):
        pair = _readonly(self.pair)
        shift = _readonly(self.shift)
        n = pair.shape[0]
        if pair.shape != (n, n) or shift.shape != (n,):
            raise InvalidGeneratorError("pair must be square and shift a matching vector")
        scale = max(1.0, float(np.max(np.abs(pair))) if pair.size else 0.0)
        if self.stats is Statistics.BOSE:
            if np.max(np.abs(pair - pair.T)) > 1e-12 * scale:
                raise InvalidGeneratorError("bosonic pair matrix must be symmetric")
        else:
            if np.max(np.abs(pair + pair.T)) > 1e-12 * scale:
                raise InvalidGeneratorError("fermionic pair matrix must be antisymmetric")
            if np.any(shift != 0):
                raise InvalidGeneratorError("fermionic generators carry no linear part")
        object.__setattr__(self, "pair", pair)
        object.__setattr__(self, "shift", shift)

    @property
    def n_modes(self) -> int:
        return self.pair.shape[0]

    def scaled(self, factor: float) -> "Generator":
        return Generator(self.stats, factor * self.pair, factor * self.shift)

    @property
    def norm(self) -> float:
        return math.sqrt(
            float(np.linalg.norm(self.pair, "fro")) ** 2 + float(np.linalg.norm(self.shift)) ** 2
        )

    @classmethod
    def zero(cls, n: int, stats: Statistics) -> "Generator":
        return cls(stats, np.zeros((n, n), complex), np.zeros(n, complex))


def adjoint_action_matrix(g: Generator) -> np.ndarray:
    """2n x 2n matrix of the generator acting on the column (a, a*)."""
    n = g.n_modes
    a = np.zeros((2 * n, 2 * n), dtype=complex)
    a[:n, n:] = -1j * g.pair
    a[n:, :n] = 1j * np.conj(g.pair)
    return a


def from_generator(g: Generator) -> BogoliubovMap:
    """Bogoliubov map of conjugation by the generated unitary.

    Computed as one matrix exponential of the adjoint-action matrix, with an
    affine column appended for the bosonic linear part.
    """
    n = g.n_modes
    a = adjoint_action_matrix(g)
    if g.stats is Statistics.BOSE and np.any(g.shift != 0):
        aug = np.zeros((2 * n + 1, 2 * n + 1), dtype=complex)
        aug[: 2 * n, : 2 * n] = a
        aug[:n, 2 * n] = -1j * g.shift
        aug[n : 2 * n, 2 * n] = 1j * np.conj(g.shift)
        e = scipy.linalg.expm(aug)
        shift = e[:n, 2 * n]
    else:
        e = scipy.linalg.expm(a)
        shift = np.zeros(n, complex)
    return BogoliubovMap(g.stats, e[:n, :n], e[:n, n : 2 * n], shift)


def generator_polynomial(g: Generator) -> WickPolynomial:
    """The generator as a normal-ordered polynomial (it already is one)."""
    n = g.n_modes
    entries = []
    for i in range(n):
        for j in range(n):
            c = g.pair[i, j]
            if c != 0:
                entries.append(((i + 1, j + 1), (), 0.5 * c))
                entries.append(((), (j + 1, i + 1), 0.5 * np.conj(c)))
    for i in range(n):
        y = g.shift[i]
        if y != 0:
            entries.append(((i + 1,), (), y))
            entries.append(((), (i + 1,), np.conj(y)))
    return WickPolynomial.from_terms(n, g.stats, entries)


def _matrix_function_times(pair: np.ndarray, fn) -> np.ndarray:
    """Apply fn(sqrt(pair pair^dag)) (Hermitian eigendecomposition) times pair."""
    s = pair @ pair.conj().T
    w, vecs = np.linalg.eigh(s)
    args = np.sqrt(np.clip(w, 0.0, None))
    return (vecs * fn(args)) @ vecs.conj().T @ pair


def chart_from_generator(g: Generator) -> "ThoulessChart":
    """Pair-amplitude chart of the generated state.

    Bose:  z = i tanh(s)/s pair;  Fermi:  z = i tan(s)/s pair with the chart
    domain restricted to spectral norm below pi/2.
    """
    n = g.n_modes
    if g.stats is Statistics.FERMI:
        top = float(np.linalg.norm(g.pair, 2)) if n else 0.0
        if top >= math.pi / 2:
            raise ChartDomainError(
                f"generator norm {top:.6f} >= pi/2 leaves the nondegenerate chart"
            )
        fn = lambda s: np.where(s > 1e-30, np.tan(s) / np.where(s > 1e-30, s, 1.0), 1.0)
    else:
        fn = lambda s: np.where(s > 1e-30, np.tanh(s) / np.where(s > 1e-30, s, 1.0), 1.0)
    z = 1j * _matrix_function_times(g.pair, fn)
    if g.stats is Statistics.BOSE:
        z = (z + z.T) / 2
        shift = (
            chart_from_map(from_generator(g)).shift
            if np.any(g.shift != 0)
            else np.zeros(n, complex)
        )
    else:
        z = (z - z.T) / 2
        shift = np.zeros(n, complex)
    return ThoulessChart(g.stats, z, shift)


@dataclass(frozen=True)
class ThoulessChart:
    """Pair-amplitude chart data (z, shift) of a Gaussian state."""

    stats: Statistics
    z: np.ndarray
    shift: np.ndarray

    def __post_init__(self):
        z = _readonly(self.z)
        shift = _readonly(self.shift)
        n = z.shape[0]
        if z.shape != (n, n) or shift.shape != (n,):
            raise ChartDomainError("z must be square and shift a matching vector")
        scale = max(1.0, float(np.max(np.abs(z))) if z.size else 0.0)
        if self.stats is Statistics.BOSE:
            if np.max(np.abs(z - z.T)) > 1e-10 * scale:
                raise ChartDomainError("bosonic chart matrix must be symmetric")
            if n and np.linalg.norm(z, 2) >= 1.0:
                raise ChartDomainError("bosonic chart requires spectral norm below 1")
        else:
            if np.max(np.abs(z + z.T)) > 1e-10 * scale:
                raise ChartDomainError("fermionic chart matrix must be antisymmetric")
            if np.any(shift != 0):
                raise ChartDomainError("fermionic charts carry no displacement")
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "shift", shift)

    @property
    def n_modes(self) -> int:
        return self.z.shape[0]


def chart_from_map(m: BogoliubovMap) -> ThoulessChart:
    """Chart of the state obtained by applying the map to the vacuum.

    Fermionic maps must be even and nondegenerate (u invertible within the
    rank tolerance); bosonic u blocks are always invertible.
    """
    n = m.n_modes
    if m.stats is Statistics.FERMI:
        if m.odd:
            raise DegeneracyError("odd maps have zero vacuum overlap, no chart exists")
        svals = np.linalg.svd(m.u, compute_uv=False)
        if n and svals[-1] < DEGENERACY_RTOL * max(svals[0], 1e-300):
            deficiency = int(np.sum(svals < DEGENERACY_RTOL * svals[0]))
            raise DegeneracyError(
                f"degenerate state: u block is rank deficient by {deficiency}"
            )
    z = -np.linalg.solve(m.u, m.v)
    if m.stats is Statistics.BOSE:
        z = (z + z.T) / 2
        top = m.u.conj().T @ m.shift - m.v.T @ np.conj(m.shift)
        shift = 1j * top
    else:
        z = (z - z.T) / 2
        shift = np.zeros(n, complex)
    return ThoulessChart(m.stats, z, shift)


def random_generator(
    n: int,
    stats: Statistics,
    rng: np.random.Generator,
    pair_scale: float = 0.2,
    shift_scale: float = 0.0,
) -> Generator:
    """Random generator with the right symmetry; scales set the entry size."""
    raw = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    pair = (raw + raw.T) / 2 if stats is Statistics.BOSE else (raw - raw.T) / 2
    pair = pair_scale * pair
    shift = np.zeros(n, complex)
    if stats is Statistics.BOSE and shift_scale:
        shift = shift_scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    return Generator(stats, pair, shift)


def random_number_conserving(
    n: int, stats: Statistics, rng: np.random.Generator
) -> BogoliubovMap:
    """Haar-ish random gauge map (unitary mixing of like operators)."""
    raw = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(raw)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    return number_conserving(q, stats)
