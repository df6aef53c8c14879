"""Canonical polynomials in creation/annihilation operators.

A polynomial is a keyed collection mapping a canonical term key, the pair
(creation index tuple, annihilation index tuple), to a complex coefficient.
The key ``((i1, ..., ik), (j1, ..., jm))`` stands for the normal-ordered
monomial ``a*_{i1} ... a*_{ik} a_{j1} ... a_{jm}`` with 1-based mode indices.

Canonical form: bosonic index tuples are sorted non-decreasing, fermionic
tuples strictly increasing.  Fermionic reordering signs are applied to the
coefficient at insertion time, and a repeated fermionic index kills the term.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping, Sequence, Tuple

import numpy as np

from .errors import DegreeCapError, IndexRangeError, StatisticsMismatchError

#: Coefficients with magnitude below this threshold are dropped at insertion.
PRUNE_THRESHOLD = 1e-14

#: Largest supported total degree; normal-ordering cost grows combinatorially.
DEGREE_CAP = 8

TermKey = Tuple[Tuple[int, ...], Tuple[int, ...]]


class Statistics(Enum):
    BOSE = "bose"
    FERMI = "fermi"


class TermParity(Enum):
    EVEN = "even"
    ODD = "odd"
    MIXED = "mixed"


def _check_indices(indices: Sequence[int], n_modes: int | None) -> None:
    for i in indices:
        if not isinstance(i, (int, np.integer)) or i < 1:
            raise IndexRangeError(f"mode index {i!r} is not a positive integer")
        if n_modes is not None and i > n_modes:
            raise IndexRangeError(f"mode index {i} exceeds n_modes={n_modes}")


def _canonical_indices(stats: Statistics, indices: Sequence[int]) -> tuple[Tuple[int, ...], int]:
    """Sort one index list; returns (tuple, sign).  Sign 0 kills the term."""
    idx = [int(i) for i in indices]
    if stats is Statistics.BOSE:
        return tuple(sorted(idx)), 1
    # Insertion sort with a transposition count keeps the permutation sign exact.
    sign = 1
    for i in range(1, len(idx)):
        j = i
        while j > 0 and idx[j - 1] > idx[j]:
            idx[j - 1], idx[j] = idx[j], idx[j - 1]
            sign = -sign
            j -= 1
    for a, b in zip(idx, idx[1:]):
        if a == b:
            return tuple(idx), 0
    return tuple(idx), sign


def canonicalize_term(
    stats: Statistics,
    creation: Sequence[int],
    annihilation: Sequence[int],
    coeff: complex,
    n_modes: int | None = None,
) -> tuple[TermKey, complex]:
    """Bring one monomial to canonical key form.

    Returns the sorted key together with the coefficient multiplied by the
    fermionic permutation sign (bosonic coefficients pass through unchanged).
    A fermionic list with a repeated index returns coefficient zero.
    """
    _check_indices(creation, n_modes)
    _check_indices(annihilation, n_modes)
    cr, s1 = _canonical_indices(stats, creation)
    an, s2 = _canonical_indices(stats, annihilation)
    return (cr, an), complex(coeff) * (s1 * s2)


def _finalize(n_modes: int, stats: Statistics, accum: dict[TermKey, complex]) -> "WickPolynomial":
    terms: dict[TermKey, complex] = {}
    for key in sorted(accum):
        c = accum[key]
        if abs(c) < PRUNE_THRESHOLD:
            continue
        if len(key[0]) + len(key[1]) > DEGREE_CAP:
            raise DegreeCapError(
                f"term of degree {len(key[0]) + len(key[1])} exceeds the cap {DEGREE_CAP}"
            )
        terms[key] = c
    poly = WickPolynomial.__new__(WickPolynomial)
    object.__setattr__(poly, "n_modes", n_modes)
    object.__setattr__(poly, "stats", stats)
    object.__setattr__(poly, "terms", MappingProxyType(terms))
    return poly


@dataclass(frozen=True)
class WickPolynomial:
    """Immutable normal-ordered polynomial in ladder operators."""

    n_modes: int
    stats: Statistics
    terms: Mapping[TermKey, complex]

    @classmethod
    def empty(cls, n_modes: int, stats: Statistics) -> "WickPolynomial":
        if n_modes < 1:
            raise IndexRangeError("n_modes must be positive")
        return _finalize(n_modes, stats, {})

    @classmethod
    def from_terms(
        cls,
        n_modes: int,
        stats: Statistics,
        entries: Iterable[tuple[Sequence[int], Sequence[int], complex]],
    ) -> "WickPolynomial":
        poly = cls.empty(n_modes, stats)
        accum: dict[TermKey, complex] = {}
        for creation, annihilation, coeff in entries:
            key, c = canonicalize_term(stats, creation, annihilation, coeff, n_modes)
            if c != 0:
                accum[key] = accum.get(key, 0j) + c
        return _finalize(n_modes, stats, accum)

    def add_term(
        self, creation: Sequence[int], annihilation: Sequence[int], coeff: complex
    ) -> "WickPolynomial":
        """Return a new polynomial with the monomial accumulated in."""
        key, c = canonicalize_term(self.stats, creation, annihilation, coeff, self.n_modes)
        accum = dict(self.terms)
        if c != 0:
            accum[key] = accum.get(key, 0j) + c
        return _finalize(self.n_modes, self.stats, accum)

    def coefficient(self, creation: Sequence[int], annihilation: Sequence[int]) -> complex:
        """Coefficient of the given monomial, including any reordering sign."""
        key, sign = canonicalize_term(self.stats, creation, annihilation, 1.0, self.n_modes)
        if sign == 0:
            return 0j
        return sign * self.terms.get(key, 0j)

    def items(self) -> Iterator[tuple[TermKey, complex]]:
        return iter(self.terms.items())

    def __len__(self) -> int:
        return len(self.terms)

    def degree(self) -> int:
        return max((len(k[0]) + len(k[1]) for k in self.terms), default=0)

    def max_abs_coeff(self) -> float:
        return max((abs(c) for c in self.terms.values()), default=0.0)

    def parity(self) -> TermParity:
        """EVEN/ODD if every term has even/odd total degree, MIXED otherwise.

        The empty polynomial counts as even.
        """
        saw_even = saw_odd = False
        for (cr, an) in self.terms:
            if (len(cr) + len(an)) % 2 == 0:
                saw_even = True
            else:
                saw_odd = True
        if saw_odd and saw_even:
            return TermParity.MIXED
        if saw_odd:
            return TermParity.ODD
        return TermParity.EVEN

    def adjoint(self) -> "WickPolynomial":
        """Hermitian adjoint, with exact fermionic reordering signs."""
        accum: dict[TermKey, complex] = {}
        for (cr, an), c in self.terms.items():
            # (a*_{i1}..a*_{ik} a_{j1}..a_{jm})^† = a*_{jm}..a*_{j1} a_{ik}..a_{i1}
            key, cc = canonicalize_term(
                self.stats, tuple(reversed(an)), tuple(reversed(cr)), np.conj(c)
            )
            if cc != 0:
                accum[key] = accum.get(key, 0j) + cc
        return _finalize(self.n_modes, self.stats, accum)

    def is_hermitian(self, tol: float) -> bool:
        """True iff the polynomial equals its adjoint coefficientwise within tol."""
        if tol <= 0:
            raise ValueError("tol must be positive")
        adj = self.adjoint()
        for key in set(self.terms) | set(adj.terms):
            if abs(self.terms.get(key, 0j) - adj.terms.get(key, 0j)) > tol:
                return False
        return True

    def scaled(self, factor: complex) -> "WickPolynomial":
        accum = {k: factor * c for k, c in self.terms.items()}
        return _finalize(self.n_modes, self.stats, accum)

    def __mul__(self, factor: complex) -> "WickPolynomial":
        return self.scaled(factor)

    __rmul__ = __mul__

    def __add__(self, other: "WickPolynomial") -> "WickPolynomial":
        _require_compatible(self, other)
        accum = dict(self.terms)
        for k, c in other.terms.items():
            accum[k] = accum.get(k, 0j) + c
        return _finalize(self.n_modes, self.stats, accum)

    def __sub__(self, other: "WickPolynomial") -> "WickPolynomial":
        return self + other.scaled(-1.0)

    def max_abs_diff(self, other: "WickPolynomial") -> float:
        _require_compatible(self, other)
        keys = set(self.terms) | set(other.terms)
        return max(
            (abs(self.terms.get(k, 0j) - other.terms.get(k, 0j)) for k in keys),
            default=0.0,
        )


def _require_compatible(a: WickPolynomial, b: WickPolynomial) -> None:
    if a.stats is not b.stats or a.n_modes != b.n_modes:
        raise StatisticsMismatchError(
            f"incompatible polynomials: ({a.stats.value}, n={a.n_modes}) vs "
            f"({b.stats.value}, n={b.n_modes})"
        )


@dataclass(frozen=True)
class TransformedBlocks:
    """Degree-sorted blocks of a normal-ordered polynomial.

    The decomposition is

        constant
        + sum_i conj(linear_i) b_i + linear_i b*_i
        + sum_ij pairing_ij b*_j b*_i + conj(pairing_ij) b_i b_j
        + sum_ij single_particle_ij b*_i b_j
        + remainder            (total degree >= 3)

    ``pairing`` is symmetric (Bose) or antisymmetric (Fermi); its entries and
    the ``linear`` vector are read off the creation-side coefficients.  For
    input whose annihilation-side coefficients are not the conjugates of the
    creation side (non-Hermitian low-degree blocks) the mismatch is reported
    in ``linear_defect`` / ``pairing_defect`` and the reassembly identity
    holds only up to those defects.
    """

    stats: Statistics
    n_modes: int
    constant: complex
    linear: np.ndarray
    pairing: np.ndarray
    single_particle: np.ndarray
    remainder: WickPolynomial
    linear_defect: float
    pairing_defect: float

    def __post_init__(self):
        for name in ("linear", "pairing", "single_particle"):
            arr = np.array(getattr(self, name), dtype=complex)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def linear_norm(self) -> float:
        return float(np.linalg.norm(self.linear))

    @property
    def pairing_norm(self) -> float:
        return float(np.linalg.norm(self.pairing, "fro"))

    @property
    def residual(self) -> float:
        """Stationarity residual: 2-norm of linear plus Frobenius norm of pairing."""
        return self.linear_norm + self.pairing_norm


def extract_blocks(poly: WickPolynomial) -> TransformedBlocks:
    """Split a polynomial into constant, linear, quadratic and remainder blocks."""
    n = poly.n_modes
    fermi = poly.stats is Statistics.FERMI
    constant = poly.terms.get(((), ()), 0j)
    linear = np.zeros(n, dtype=complex)
    linear_low = np.zeros(n, dtype=complex)
    pair_coeffs: dict[tuple[int, int], complex] = {}
    pair_low: dict[tuple[int, int], complex] = {}
    single = np.zeros((n, n), dtype=complex)
    remainder: dict[TermKey, complex] = {}
    for (cr, an), c in poly.terms.items():
        k, m = len(cr), len(an)
        if k + m == 0:
            continue
        if k + m >= 3:
            remainder[(cr, an)] = c
        elif (k, m) == (1, 0):
            linear[cr[0] - 1] = c
        elif (k, m) == (0, 1):
            linear_low[an[0] - 1] = c
        elif (k, m) == (2, 0):
            pair_coeffs[cr] = c
        elif (k, m) == (0, 2):
            pair_low[an] = c
        else:  # (1, 1)
            single[cr[0] - 1, an[0] - 1] = c

    pairing = np.zeros((n, n), dtype=complex)
    for (i, j), c in pair_coeffs.items():
        if i == j:
            pairing[i - 1, i - 1] = c
        elif fermi:
            pairing[i - 1, j - 1] = -c / 2
            pairing[j - 1, i - 1] = c / 2
        else:
            pairing[i - 1, j - 1] = c / 2
            pairing[j - 1, i - 1] = c / 2

    linear_defect = float(np.max(np.abs(linear_low - np.conj(linear)))) if n else 0.0
    low_sign = -1.0 if fermi else 1.0
    defect = 0.0
    for key in set(pair_coeffs) | set(pair_low):
        expected = low_sign * np.conj(pair_coeffs.get(key, 0j))
        defect = max(defect, abs(pair_low.get(key, 0j) - expected))

    return TransformedBlocks(
        stats=poly.stats,
        n_modes=n,
        constant=constant,
        linear=linear,
        pairing=pairing,
        single_particle=single,
        remainder=_finalize(n, poly.stats, remainder),
        linear_defect=linear_defect,
        pairing_defect=float(defect),
    )


def reassemble(blocks: TransformedBlocks) -> WickPolynomial:
    """Rebuild the polynomial encoded by a block decomposition."""
    n = blocks.n_modes
    accum: dict[TermKey, complex] = {}

    def put(creation, annihilation, coeff):
        key, c = canonicalize_term(blocks.stats, creation, annihilation, coeff, n)
        if c != 0:
            accum[key] = accum.get(key, 0j) + c

    if blocks.constant != 0:
        put((), (), blocks.constant)
    for i in range(n):
        put((i + 1,), (), blocks.linear[i])
        put((), (i + 1,), np.conj(blocks.linear[i]))
    for i in range(n):
        for j in range(n):
            put((j + 1, i + 1), (), blocks.pairing[i, j])
            put((), (i + 1, j + 1), np.conj(blocks.pairing[i, j]))
            put((i + 1,), (j + 1,), blocks.single_particle[i, j])
    for key, c in blocks.remainder.terms.items():
        accum[key] = accum.get(key, 0j) + c
    return _finalize(n, blocks.stats, accum)
