"""Exact classical bound ``T^1`` by sign enumeration."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from dimwitness.core import BellExpression
from dimwitness.errors import CapacityError, DomainError

ENUMERATION_CAP = 30
_LOW_BITS = 16


@dataclass(frozen=True)
class ClassicalResult:
    value: float
    argmax: tuple[int, ...]
    k_max: int | None = None
    delta: float | None = None


def gray_code(i: int) -> int:
    return i ^ (i >> 1)


def gray_flips(bits: int):
    """Yield ``(code, flipped_bit)`` for Gray-code steps ``1 .. 2^bits - 1``."""
    prev = 0
    for i in range(1, 1 << bits):
        code = gray_code(i)
        yield code, (code ^ prev).bit_length() - 1
        prev = code


def _signs(mask: int, width: int) -> tuple[int, ...]:
    # bit b set means column b carries -1
    return tuple(-1 if (mask >> b) & 1 else 1 for b in range(width))


def classical_max(expr: BellExpression) -> ClassicalResult:
    """Maximum of ``sum_i |sum_j M_ij z_j|`` over ``z`` in ``{+1,-1}^m_B``.

    The first sign is fixed to +1 (the objective is invariant under ``z -> -z``).
    Row sums are updated incrementally along Gray codes: a table over the
    low-order columns, and an offset per step over the high-order ones.
    Among maximizers the lexicographically smallest ``z`` (with -1 < +1) is
    returned.
    """
    m = expr.matrix
    rows, cols = m.shape
    if cols > ENUMERATION_CAP:
        raise CapacityError(
            f"{cols} columns exceed the enumeration cap {ENUMERATION_CAP}; "
            "use the see-saw optimizer at n=1 instead")
    free = cols - 1
    low = min(free, _LOW_BITS)
    high = free - low
    low_cols = m[:, 1:1 + low]
    high_cols = m[:, 1 + low:]

    # table[:, t] holds the row sums of the low block for Gray code t
    table = np.empty((rows, 1 << low))
    codes = np.empty(1 << low, dtype=np.int64)
    current = m[:, 0] + low_cols.sum(axis=1)
    table[:, 0] = current
    codes[0] = 0
    for t, (code, bit) in enumerate(gray_flips(low), start=1):
        if (code >> bit) & 1:
            current = current - 2.0 * low_cols[:, bit]
        else:
            current = current + 2.0 * low_cols[:, bit]
        table[:, t] = current
        codes[t] = code

    scale = max(1.0, float(np.abs(m).sum()))
    tol = 1e-12 * scale
    best = -math.inf
    candidates: list[tuple[int, np.ndarray, np.ndarray]] = []

    def consider(hi_code: int, offset: np.ndarray):
        nonlocal best, candidates
        vals = np.abs(table + offset[:, None]).sum(axis=0)
        top = float(vals.max())
        if top > best:
            best = top
            candidates = [(h, c[v >= best - tol], v[v >= best - tol]) for h, c, v in candidates]
        if top >= best - tol:
            keep = vals >= best - tol
            candidates.append((hi_code, codes[keep], vals[keep]))

    offset = high_cols.sum(axis=1)
    consider(0, offset)
    for code, bit in gray_flips(high):
        if (code >> bit) & 1:
            offset = offset - 2.0 * high_cols[:, bit]
        else:
            offset = offset + 2.0 * high_cols[:, bit]
        consider(code, offset)

    best_z = None
    for hi_code, lo_codes, _ in candidates:
        for lo_code in lo_codes:
            z = (1,) + _signs(int(lo_code), low) + _signs(hi_code, high)
            if best_z is None or z < best_z:
                best_z = z
    value = float(np.abs(m @ np.array(best_z, dtype=float)).sum())
    return ClassicalResult(value=value, argmax=best_z)


def bgamma_classical(m_b: int, gamma: float) -> ClassicalResult:
    """Closed-form classical bound ``(m_B^2 + gamma^2 - 4 Delta^2) / 2`` of the gamma family.

    ``k_max`` (the number of minority signs) is the non-negative integer
    nearest to ``(m_B - gamma) / 2``, rounding halves down.
    """
    if m_b < 2:
        raise DomainError("the family needs at least two Bob settings")
    if gamma < 0:
        raise DomainError("gamma must be non-negative")
    center = (m_b - gamma) / 2
    k_max = max(0, math.ceil(center - 0.5))
    delta = abs(center - k_max)
    value = (m_b * m_b + gamma * gamma - 4 * delta * delta) / 2
    argmax = tuple([1] * (m_b - k_max) + [-1] * k_max)
    return ClassicalResult(value=value, argmax=argmax, k_max=k_max, delta=delta)
