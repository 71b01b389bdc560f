"""Small-coefficient Bell matrices up to symmetry, and scans for dimension gaps.

Two matrices are equivalent when one is obtained from the other by
permuting rows or columns, negating rows or columns, and (square shapes
only) transposing.  The canonical representative is the one whose
row-major entry sequence is lexicographically smallest.
"""

from __future__ import annotations

import itertools
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from dimwitness.core import BellExpression
from dimwitness.errors import CapacityError, DomainError
from dimwitness.optimizer import (
    DimensionProfile,
    OptimizerConfig,
    ProfileEntry,
    detect_gaps,
    dimension_profile,
)

GROUP_SIDE_CAP = 7
GENERATE_LIMIT = 20000
_PERM_CHUNK = 120


@dataclass(frozen=True, order=True)
class CanonicalKey:
    shape: tuple[int, int]
    entries: tuple[float, ...]

    def matrix(self) -> np.ndarray:
        return np.array(self.entries, dtype=float).reshape(self.shape)

    def expression(self) -> BellExpression:
        return BellExpression(self.matrix())


def _flip_leading_negative(x: np.ndarray, axis: int) -> np.ndarray:
    """Negate each line along ``axis`` whose first nonzero entry is positive."""
    nz = x != 0
    first = np.argmax(nz, axis=axis)
    lead = np.take_along_axis(x, np.expand_dims(first, axis), axis=axis)
    return np.where(lead > 0, -x, x)


def _sign_table(k: int) -> np.ndarray:
    return np.array(list(itertools.product((1.0, -1.0), repeat=k)))


def _line_ranks(lines: np.ndarray) -> np.ndarray:
    """Integers ordered like the lexicographic order of the last-axis lines."""
    values, digits = np.unique(lines, return_inverse=True)
    digits = digits.reshape(lines.shape)
    width = lines.shape[-1]
    base = len(values)
    if width * math.log2(max(base, 2)) < 62:
        return digits @ (base ** np.arange(width - 1, -1, -1, dtype=np.int64))
    flat = lines.reshape(-1, width)
    _, rank = np.unique(flat, axis=0, return_inverse=True)
    return rank.reshape(lines.shape[:-1])


def _lexmin(flat: np.ndarray) -> np.ndarray:
    order = np.lexsort(flat.T[::-1])
    return flat[order[0]]


def _best_over_column_ops(m: np.ndarray) -> np.ndarray:
    a, b = m.shape
    signs = _sign_table(b)
    best = None
    perms = itertools.permutations(range(b))
    while True:
        chunk = list(itertools.islice(perms, _PERM_CHUNK))
        if not chunk:
            break
        p = np.array(chunk)
        x = m[:, p].transpose(1, 0, 2)  # (P, a, b)
        x = (x[:, None, :, :] * signs[None, :, None, :]).reshape(-1, a, b)
        x = _flip_leading_negative(x, axis=2)
        rank = _line_ranks(x)
        order = np.argsort(rank, axis=1, kind="stable")
        x = np.take_along_axis(x, order[:, :, None], axis=1)
        cand = _lexmin(x.reshape(len(x), -1))
        if best is None or tuple(cand) < tuple(best):
            best = cand
    return best.reshape(a, b)


def _best_over_row_ops(m: np.ndarray) -> np.ndarray:
    a, b = m.shape
    signs = _sign_table(a)
    best = None
    perms = itertools.permutations(range(a))
    while True:
        chunk = list(itertools.islice(perms, _PERM_CHUNK))
        if not chunk:
            break
        p = np.array(chunk)
        y = m[p]  # (P, a, b)
        y = (y[:, None, :, :] * signs[None, :, :, None]).reshape(-1, a, b)
        y = _flip_leading_negative(y, axis=1)
        cols = y.transpose(0, 2, 1)
        rank = _line_ranks(cols)
        order = np.argsort(rank, axis=1, kind="stable")
        y = np.take_along_axis(y, order[:, None, :], axis=2)
        cand = _lexmin(y.reshape(len(y), -1))
        if best is None or tuple(cand) < tuple(best):
            best = cand
    return best.reshape(a, b)


def _group_cost(k: int) -> int:
    return math.factorial(k) * 2**k


def _canonical_matrix(m: np.ndarray) -> np.ndarray:
    a, b = m.shape
    if min(a, b) > GROUP_SIDE_CAP:
        raise CapacityError(f"canonical form needs a side of at most {GROUP_SIDE_CAP} settings")
    if _group_cost(b) <= _group_cost(a):
        return _best_over_column_ops(m)
    return _best_over_row_ops(m)


def canonical_form(expr) -> CanonicalKey:
    """Lexicographically smallest row-major form over the equivalence group."""
    m = expr.matrix if isinstance(expr, BellExpression) else np.asarray(expr, dtype=float)
    m = np.array(m, dtype=float) + 0.0  # drop negative zeros
    best = _canonical_matrix(m)
    if m.shape[0] == m.shape[1]:
        other = _canonical_matrix(m.T.copy())
        if tuple(other.ravel()) < tuple(best.ravel()):
            best = other
    return CanonicalKey(m.shape, tuple(float(v) + 0.0 for v in best.ravel()))


@dataclass(frozen=True)
class ClassRep:
    key: CanonicalKey
    rank_one: bool

    @property
    def matrix(self) -> np.ndarray:
        return self.key.matrix()

    @property
    def expression(self) -> BellExpression:
        return self.key.expression()


def _rank_one(key: CanonicalKey) -> bool:
    return bool(np.linalg.matrix_rank(key.matrix()) == 1)


def is_trivial(m: np.ndarray) -> bool:
    """True when some row or column is entirely zero."""
    return bool(np.any(~m.any(axis=1)) or np.any(~m.any(axis=0)))


def _check_alphabet(alphabet) -> tuple[float, ...]:
    alpha = tuple(sorted({float(v) for v in alphabet}))
    if not alpha:
        raise DomainError("empty alphabet")
    if set(alpha) != {-v for v in alpha}:
        raise DomainError("alphabet must be closed under negation")
    return alpha


def _generate(m_a, m_b, alpha, filter_trivial, budget):
    total = len(alpha) ** (m_a * m_b)
    if total > budget:
        raise CapacityError(f"{total} matrices exceed the generate budget {budget}")
    keys = set()
    for flat in itertools.product(alpha, repeat=m_a * m_b):
        m = np.array(flat).reshape(m_a, m_b)
        if filter_trivial and is_trivial(m):
            continue
        keys.add(canonical_form(m))
    return keys


def _orderly(m_a, m_b, alpha, filter_trivial):
    """Orderly generation over sorted multisets of sign-normalized rows.

    A sorted tuple of row-class indices is kept when no column signed
    permutation maps it to a lexicographically smaller sorted tuple.  That
    property is inherited by the prefix obtained by removing the largest
    element, so pruning non-canonical prefixes loses nothing.
    """
    if m_b > GROUP_SIDE_CAP:
        raise CapacityError(f"orderly enumeration supports at most {GROUP_SIDE_CAP} columns")
    rows = {tuple(_flip_leading_negative(np.array(r), axis=0))
            for r in itertools.product(alpha, repeat=m_b)}
    if filter_trivial:
        rows.discard(tuple([0.0] * m_b))
    rows = np.array(sorted(rows))
    base = len(alpha)
    lookup = {v: i for i, v in enumerate(alpha)}

    def codes(x):
        digits = np.vectorize(lookup.__getitem__)(x + 0.0)
        return digits @ (base ** np.arange(m_b - 1, -1, -1))

    row_codes = codes(rows)  # sorted because rows are sorted lexicographically
    perms = np.array(list(itertools.permutations(range(m_b))))
    signs = _sign_table(m_b)
    images = rows[:, perms].transpose(1, 0, 2)[:, None] * signs[None, :, None, :]
    images = _flip_leading_negative(images.reshape(-1, len(rows), m_b), axis=2)
    table = np.searchsorted(row_codes, codes(images))

    found = []
    n_rows = len(rows)
    packed = m_a * math.log2(n_rows + 1) < 62

    def sums(img):
        """Per-image prefix sums of the packed key for every insertion point."""
        k = img.shape[1]
        w = n_rows ** np.arange(k, -1, -1, dtype=np.int64)
        head = np.zeros((len(img), k + 1), dtype=np.int64)
        tail = np.zeros((len(img), k + 1), dtype=np.int64)
        if k:
            head[:, 1:] = np.cumsum(img * w[:k], axis=1)
            tail[:, :k] = np.cumsum((img * w[1:])[:, ::-1], axis=1)[:, ::-1]
        return w, head, tail

    def keep(prefix, img, pre, r) -> bool:
        """Is ``prefix + [r]`` minimal among its column-op images?

        ``img`` holds each group element's image of ``prefix``, sorted per
        row.  With packing, the key of the image with ``r`` inserted is
        assembled from the prefix sums ``pre``, so no per-row sort is needed.
        """
        v = table[:, r]
        if pre is None:
            new = np.sort(np.concatenate([img, v[:, None]], axis=1), axis=1)
            diff = new - np.array(prefix + [r])
            nz = diff != 0
            first = np.argmax(nz, axis=1)
            return not np.any(nz.any(axis=1) & (diff[np.arange(len(diff)), first] < 0))
        w, head, tail = pre
        pos = (img <= v[:, None]).sum(axis=1)
        key = head[rows_idx, pos] + v * w[pos] + tail[rows_idx, pos]
        return key.min() >= np.dot(prefix + [r], w)

    rows_idx = np.arange(len(table))

    def extend(prefix: list[int], img: np.ndarray):
        if len(prefix) == m_a:
            if not (filter_trivial and is_trivial(rows[prefix])):
                found.append(prefix)
            return
        pre = sums(img) if packed else None
        start = prefix[-1] if prefix else 0
        for r in range(start, n_rows):
            if keep(prefix, img, pre, r):
                extend(prefix + [r], np.sort(np.concatenate([img, table[:, r:r + 1]], axis=1),
                                             axis=1))

    extend([], np.zeros((len(table), 0), dtype=np.int64))

    # A kept multiset is minimal among its column-op images, so its rows,
    # already sign-normalized and sorted, form the lexmin over the group.
    # Square shapes also compare against the best image of the transpose.
    keys = set()
    for prefix in found:
        best = tuple(prefix)
        if m_a == m_b:
            cols = _flip_leading_negative(rows[prefix].T, axis=1)
            idx = np.searchsorted(row_codes, codes(cols))
            img = np.sort(table[:, idx], axis=1)
            other = img[np.lexsort(img.T[::-1])[0]]
            best = min(best, tuple(int(v) for v in other))
        keys.add(CanonicalKey((m_a, m_b), tuple(float(v) + 0.0 for v in rows[list(best)].ravel())))
    return keys


def enumerate_classes(m_a: int, m_b: int, alphabet=(-1, 0, 1), filter_trivial: bool = True,
                      method: str = "auto", budget: int = GENERATE_LIMIT) -> Iterator[ClassRep]:
    """One representative per equivalence class, in canonical-key order.

    ``method`` is ``generate`` (canonicalize every matrix), ``orderly``, or
    ``auto`` (generate while the raw count stays within ``budget``).  With
    ``filter_trivial`` matrices with an all-zero row or column are dropped.
    """
    if m_a < 1 or m_b < 1:
        raise DomainError("shape must be at least 1x1")
    alpha = _check_alphabet(alphabet)
    if method == "auto":
        method = "generate" if len(alpha) ** (m_a * m_b) <= budget else "orderly"
    if method == "generate":
        keys = _generate(m_a, m_b, alpha, filter_trivial, budget)
    elif method == "orderly":
        keys = _orderly(m_a, m_b, alpha, filter_trivial)
    else:
        raise DomainError(f"unknown enumeration method {method!r}")
    for key in sorted(keys):
        yield ClassRep(key, _rank_one(key))


@dataclass
class SearchHit:
    key: CanonicalKey
    profile: DimensionProfile
    gap: tuple[int, int]
    witness_dim: int
    seed: int

    @property
    def matrix(self) -> np.ndarray:
        return self.key.matrix()


@dataclass
class ScanRecord:
    key: CanonicalKey
    profile: DimensionProfile
    hit: bool
    seed: int
    witness_dim: int | None = None

    def to_json(self) -> dict:
        return {
            "key": list(self.key.entries),
            "shape": list(self.key.shape),
            "matrix": self.key.matrix().tolist(),
            "profile": [{"n": e.n, "value": e.value, "converged": e.converged,
                         "restarts": e.restarts, "source": e.source}
                        for e in self.profile.entries],
            "hit": self.hit,
            "seed": self.seed,
        }


def _as_rep(c) -> ClassRep:
    if isinstance(c, ClassRep):
        return c
    key = c if isinstance(c, CanonicalKey) else canonical_form(c)
    return ClassRep(key, _rank_one(key))


def scan_class(rep: ClassRep, flag: tuple[int, int], config: OptimizerConfig) -> ScanRecord:
    lo, hi = flag
    expr = rep.expression
    if rep.rank_one:
        # a rank-one matrix factorizes, so every dimension gives the classical value
        value = dimension_profile(expr, 1, config).entries[0].value
        prof = DimensionProfile([ProfileEntry(n, value, True, 0, "exact") for n in range(1, hi + 1)])
        return ScanRecord(rep.key, prof, False, config.seed)
    prof = dimension_profile(expr, hi, config)
    if lo >= min(expr.rows, expr.cols):
        return ScanRecord(rep.key, prof, False, config.seed)
    report = detect_gaps(prof, config)
    gaps = [g for g in report.gaps if g.n == lo and g.n_next == hi]
    if gaps:
        return ScanRecord(rep.key, prof, True, config.seed, gaps[0].witness_dim)
    return ScanRecord(rep.key, prof, False, config.seed)


def _scan_chunk(args):
    reps, flag, config = args
    return [scan_class(r, flag, config) for r in reps]


def scan_records(classes: Iterable, flag: tuple[int, int] = (3, 4),
                 config: OptimizerConfig | None = None, jobs: int = 1) -> Iterator[ScanRecord]:
    """Profile every class up to ``flag[1]``; records come back in input order."""
    config = config or OptimizerConfig()
    lo, hi = flag
    if hi != lo + 1 or lo < 1:
        raise DomainError("flagged gap must be (n, n+1) with n >= 1")
    reps = [_as_rep(c) for c in classes]
    if jobs <= 1 or len(reps) < 2:
        for r in reps:
            yield scan_class(r, flag, config)
        return
    size = max(1, math.ceil(len(reps) / (4 * jobs)))
    chunks = [(reps[i:i + size], flag, config) for i in range(0, len(reps), size)]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        for batch in pool.map(_scan_chunk, chunks):
            yield from batch


def scan_for_witnesses(classes: Iterable, flag: tuple[int, int] = (3, 4),
                       config: OptimizerConfig | None = None, sink=None,
                       jobs: int = 1) -> list[SearchHit]:
    """Return the classes whose profile shows a gap at ``flag``.

    When ``sink`` (a writable text stream) is given, one JSON line per class
    is written to it.
    """
    config = config or OptimizerConfig()
    hits = []
    for rec in scan_records(classes, flag, config, jobs):
        if sink is not None:
            sink.write(json.dumps(rec.to_json()) + "\n")
        if rec.hit:
            hits.append(SearchHit(rec.key, rec.profile, flag, rec.witness_dim, rec.seed))
    return hits
