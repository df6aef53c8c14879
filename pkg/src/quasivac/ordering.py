"""Normal ordering of ladder-operator products.

Rewrites products and linear substitutions into Wick order by bubbling the
inserted operator through a canonical monomial one adjacent swap at a time,
emitting a contraction term at every matching pair:

    a_i a*_j = s a*_j a_i + delta_ij,   s = +1 (Bose), -1 (Fermi)

Fermionic signs are accumulated as exact integer factors before any floating
multiplication, so antisymmetry cancellations are exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import StatisticsMismatchError
from .wick import PRUNE_THRESHOLD, Statistics, TermKey, WickPolynomial, _finalize


class Side(Enum):
    LEFT = "left"
    RIGHT = "right"


@dataclass(frozen=True)
class LinearOperator:
    """Affine combination  sum_i creation_i b*_i + sum_i annihilation_i b_i + scalar."""

    creation: np.ndarray
    annihilation: np.ndarray
    scalar: complex = 0j

    def __post_init__(self):
        cr = np.asarray(self.creation, dtype=complex)
        an = np.asarray(self.annihilation, dtype=complex)
        if cr.ndim != 1 or an.ndim != 1 or cr.shape != an.shape:
            raise StatisticsMismatchError("creation/annihilation vectors must share one length")
        cr.setflags(write=False)
        an.setflags(write=False)
        object.__setattr__(self, "creation", cr)
        object.__setattr__(self, "annihilation", an)
        object.__setattr__(self, "scalar", complex(self.scalar))

    @property
    def n_modes(self) -> int:
        return self.creation.shape[0]

    @classmethod
    def zero(cls, n: int) -> "LinearOperator":
        return cls(np.zeros(n, complex), np.zeros(n, complex))

    @classmethod
    def unit_creation(cls, n: int, i: int) -> "LinearOperator":
        u = np.zeros(n, complex)
        u[i - 1] = 1.0
        return cls(u, np.zeros(n, complex))

    @classmethod
    def unit_annihilation(cls, n: int, i: int) -> "LinearOperator":
        v = np.zeros(n, complex)
        v[i - 1] = 1.0
        return cls(np.zeros(n, complex), v)

    def adjoint(self) -> "LinearOperator":
        return LinearOperator(
            np.conj(self.annihilation), np.conj(self.creation), np.conj(self.scalar)
        )


def _acc(out: dict, key: TermKey, val: complex) -> None:
    out[key] = out.get(key, 0j) + val


def _insert(stats: Statistics, tup: tuple, j: int, count: str) -> tuple | None:
    """Insert index j into a sorted tuple; returns (tuple, sign) or None.

    ``count`` selects which neighbours the operator is swapped past when it
    travels to its sorted slot: "greater" when appended from the right,
    "less" when prepended from the left.
    """
    if stats is Statistics.FERMI and j in tup:
        return None
    pos = 0
    while pos < len(tup) and tup[pos] <= j:
        pos += 1
    new = tup[:pos] + (j,) + tup[pos:]
    if stats is Statistics.BOSE:
        return new, 1
    passed = len(tup) - pos if count == "greater" else pos
    return new, (-1) ** passed


def _mul_right_creator(stats: Statistics, terms: dict, j: int) -> dict:
    """Normal order  terms * a*_j."""
    fermi = stats is Statistics.FERMI
    out: dict = {}
    for (cr, an), c in terms.items():
        sign = 1
        for t in range(len(an) - 1, -1, -1):
            if an[t] == j:
                _acc(out, (cr, an[:t] + an[t + 1:]), c * sign)
            if fermi:
                sign = -sign
        merged = _insert(stats, cr, j, "greater")
        if merged is not None:
            new_cr, msign = merged
            _acc(out, (new_cr, an), c * sign * msign)
    return out


def _mul_right_annihilator(stats: Statistics, terms: dict, j: int) -> dict:
    """Normal order  terms * a_j."""
    out: dict = {}
    for (cr, an), c in terms.items():
        merged = _insert(stats, an, j, "greater")
        if merged is not None:
            new_an, msign = merged
            _acc(out, (cr, new_an), c * msign)
    return out


def _mul_left_creator(stats: Statistics, terms: dict, j: int) -> dict:
    """Normal order  a*_j * terms."""
    out: dict = {}
    for (cr, an), c in terms.items():
        merged = _insert(stats, cr, j, "less")
        if merged is not None:
            new_cr, msign = merged
            _acc(out, (new_cr, an), c * msign)
    return out


def _mul_left_annihilator(stats: Statistics, terms: dict, j: int) -> dict:
    """Normal order  a_j * terms."""
    fermi = stats is Statistics.FERMI
    out: dict = {}
    for (cr, an), c in terms.items():
        sign = 1
        for t in range(len(cr)):
            if cr[t] == j:
                _acc(out, (cr[:t] + cr[t + 1:], an), c * sign)
            if fermi:
                sign = -sign
        merged = _insert(stats, an, j, "less")
        if merged is not None:
            new_an, msign = merged
            _acc(out, (cr, new_an), c * sign * msign)
    return out


def _mul_linear_dict(stats: Statistics, terms: dict, op: LinearOperator, side: Side) -> dict:
    out: dict = {}
    if op.scalar != 0:
        for key, c in terms.items():
            _acc(out, key, op.scalar * c)
    for j in range(1, op.n_modes + 1):
        u = op.creation[j - 1]
        if u != 0:
            part = (
                _mul_right_creator(stats, terms, j)
                if side is Side.RIGHT
                else _mul_left_creator(stats, terms, j)
            )
            for key, c in part.items():
                _acc(out, key, u * c)
        v = op.annihilation[j - 1]
        if v != 0:
            part = (
                _mul_right_annihilator(stats, terms, j)
                if side is Side.RIGHT
                else _mul_left_annihilator(stats, terms, j)
            )
            for key, c in part.items():
                _acc(out, key, v * c)
    # intermediate pruning keeps cancelled keys from riding along the chain
    return {key: c for key, c in out.items() if abs(c) >= PRUNE_THRESHOLD}


def multiply_linear(poly: WickPolynomial, op: LinearOperator, side: Side) -> WickPolynomial:
    """Normal-ordered product op * poly (LEFT) or poly * op (RIGHT)."""
    if op.n_modes != poly.n_modes:
        raise StatisticsMismatchError(
            f"operator has {op.n_modes} modes, polynomial has {poly.n_modes}"
        )
    out = _mul_linear_dict(poly.stats, dict(poly.terms), op, side)
    return _finalize(poly.n_modes, poly.stats, out)


def substitute_linear(
    poly: WickPolynomial,
    subst_creation: Sequence[LinearOperator],
    subst_annihilation: Sequence[LinearOperator],
) -> WickPolynomial:
    """Replace a*_i / a_i by the given affine combinations and normal order.

    The i-th creation operator is replaced by ``subst_creation[i-1]`` and the
    i-th annihilation operator by ``subst_annihilation[i-1]``; each monomial is
    expanded factor by factor in its stored order.
    """
    n = poly.n_modes
    if len(subst_creation) != n or len(subst_annihilation) != n:
        raise StatisticsMismatchError("substitution arrays must have length n_modes")
    for op in (*subst_creation, *subst_annihilation):
        if op.n_modes != n:
            raise StatisticsMismatchError("substitution operator has wrong mode count")
    stats = poly.stats
    result: dict = {}
    for (cr, an), c in poly.terms.items():
        acc: dict = {((), ()): c}
        for i in cr:
            acc = _mul_linear_dict(stats, acc, subst_creation[i - 1], Side.RIGHT)
        for i in an:
            acc = _mul_linear_dict(stats, acc, subst_annihilation[i - 1], Side.RIGHT)
        for key, val in acc.items():
            _acc(result, key, val)
    return _finalize(n, stats, result)


def vacuum_expectation(poly: WickPolynomial) -> complex:
    """Vacuum expectation of a normal-ordered polynomial: its constant term."""
    return poly.terms.get(((), ()), 0j)


def product_vacuum_expectation(stats: Statistics, ops: Sequence[LinearOperator]) -> complex:
    """Vacuum expectation of an ordered product of affine ladder combinations.

    Evaluated by the pairing expansion: scalars factor out and every ordered
    contraction pairs the annihilation part of an earlier factor with the
    creation part of a later one, with the fermionic crossing sign.  This is
    an independent route to the same number as normal ordering the product
    and reading off its constant term.
    """
    m = len(ops)
    if m == 0:
        return 1.0 + 0j
    n = ops[0].n_modes
    for op in ops:
        if op.n_modes != n:
            raise StatisticsMismatchError("operators must share one mode count")
    contraction = [
        [complex(np.dot(ops[i].annihilation, ops[j].creation)) for j in range(m)]
        for i in range(m)
    ]
    cache: dict[tuple, complex] = {}

    if stats is Statistics.BOSE:
        # No ordering signs: scalar parts can be taken inline.
        scalars = [op.scalar for op in ops]

        def rec(idx: tuple) -> complex:
            if not idx:
                return 1.0 + 0j
            hit = cache.get(idx)
            if hit is not None:
                return hit
            i0 = idx[0]
            rest = idx[1:]
            total = scalars[i0] * rec(rest) if scalars[i0] != 0 else 0j
            row = contraction[i0]
            for pos, jj in enumerate(rest):
                c = row[jj]
                if c != 0:
                    total += c * rec(rest[:pos] + rest[pos + 1:])
            cache[idx] = total
            return total

        return rec(tuple(range(m)))

    def ladder(idx: tuple) -> complex:
        # pure-ladder Wick sum; crossing signs count positions within idx only
        if not idx:
            return 1.0 + 0j
        if len(idx) % 2:
            return 0j
        hit = cache.get(idx)
        if hit is not None:
            return hit
        i0 = idx[0]
        rest = idx[1:]
        total = 0j
        sgn = 1.0
        row = contraction[i0]
        for pos, jj in enumerate(rest):
            c = row[jj]
            if c != 0:
                total += sgn * c * ladder(rest[:pos] + rest[pos + 1:])
            sgn = -sgn
        cache[idx] = total
        return total

    # Fermionic scalars commute out without sign: expand over the subset of
    # factors contributing their scalar part, then Wick-contract the rest.
    # (Operators built from fermionic maps never carry scalars, so the subset
    # loop is almost always a single pass.)
    scalar_positions = [k for k in range(m) if ops[k].scalar != 0]
    total = 0j
    for mask in range(1 << len(scalar_positions)):
        coeff = 1.0 + 0j
        dropped = set()
        for bit, k in enumerate(scalar_positions):
            if mask >> bit & 1:
                coeff *= ops[k].scalar
                dropped.add(k)
        total += coeff * ladder(tuple(k for k in range(m) if k not in dropped))
    return total
