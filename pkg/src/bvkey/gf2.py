"""Bit vectors over GF(2) and affine linear systems on int bitsets.

Vectors are encoded canonically as non-negative integers: coordinate ``j``
is bit ``j`` of the integer (bit 0 least significant). Every module and
file format in the package uses this encoding.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

DEFAULT_ENUM_CAP = 1 << 20


class WidthError(ValueError):
    """Operands of different widths were combined."""


class EnumerationCapError(RuntimeError):
    """A solution set is too large to materialize.

    ``dim`` is the dimension of the offending solution space, ``ranks``
    optionally carries per-component ranks so callers can decide how many
    more equations they need.
    """

    def __init__(self, dim: int, cap: int, ranks: Sequence[int] | None = None):
        self.dim = dim
        self.cap = cap
        self.ranks = list(ranks) if ranks is not None else None
        msg = f"solution space of dimension {dim} exceeds enumeration cap {cap}"
        if self.ranks is not None:
            msg += f" (component ranks {self.ranks})"
        super().__init__(msg)


@dataclass(frozen=True, order=True)
class BitVec:
    """An element of F_2^width."""

    width: int
    bits: int

    def __post_init__(self):
        if self.width < 0:
            raise ValueError("width must be non-negative")
        if not 0 <= self.bits < (1 << self.width):
            raise ValueError(f"bits {self.bits:#x} do not fit in width {self.width}")

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "BitVec":
        """Build from a coordinate sequence, coordinate 0 first."""
        bits = list(bits)
        value = 0
        for j, b in enumerate(bits):
            if b not in (0, 1):
                raise ValueError("coordinates must be 0 or 1")
            value |= b << j
        return cls(len(bits), value)

    def _check(self, other: "BitVec") -> None:
        if self.width != other.width:
            raise WidthError(f"width mismatch: {self.width} vs {other.width}")

    def __xor__(self, other: "BitVec") -> "BitVec":
        self._check(other)
        return BitVec(self.width, self.bits ^ other.bits)

    def __getitem__(self, j: int) -> int:
        if not 0 <= j < self.width:
            raise IndexError(j)
        return (self.bits >> j) & 1

    def __int__(self) -> int:
        return self.bits

    def __index__(self) -> int:
        return self.bits

    def dot(self, other: "BitVec") -> int:
        self._check(other)
        return parity(self.bits & other.bits)

    def weight(self) -> int:
        return self.bits.bit_count()

    def to_bits(self) -> list[int]:
        return [(self.bits >> j) & 1 for j in range(self.width)]

    def __str__(self) -> str:
        # most significant coordinate first, as in 0b-literals
        return format(self.bits, f"0{self.width}b") if self.width else ""


def parity(v: int) -> int:
    return v.bit_count() & 1


def parity_array(v: np.ndarray) -> np.ndarray:
    """Elementwise parity of a non-negative integer array (up to 64 bits)."""
    v = np.asarray(v, dtype=np.uint64).copy()
    for shift in (32, 16, 8, 4, 2, 1):
        v ^= v >> np.uint64(shift)
    return (v & np.uint64(1)).astype(np.uint8)


def _coerce(v, width: int | None) -> tuple[int, int | None]:
    if isinstance(v, BitVec):
        if width is not None and v.width != width:
            raise WidthError(f"width mismatch: {v.width} vs {width}")
        return v.bits, v.width
    v = int(v)
    if v < 0:
        raise ValueError("bit vectors are non-negative")
    if width is not None and v >> width:
        raise WidthError(f"value {v:#x} does not fit in width {width}")
    return v, width


def dot(x, w, width: int | None = None) -> int:
    """Inner product over F_2: parity of the bitwise AND.

    Accepts :class:`BitVec` or plain ints. With two BitVecs the widths must
    agree; with ints an explicit ``width`` bounds both operands.
    """
    xv, xw = _coerce(x, width)
    wv, ww = _coerce(w, width if width is not None else xw)
    if xw is None and ww is not None:
        _coerce(x, ww)
    return parity(xv & wv)


@dataclass(frozen=True)
class AffineSolutionSet:
    """Solutions of ``{x . omega = rhs}`` as ``particular + span(basis)``.

    ``particular`` is ``None`` for an inconsistent system. ``equations``
    holds the reduced (pivot) rows ``(omega, rhs)`` that define the set;
    ``tag`` is the right-hand side shared by all equations when the system
    came from a single-tag group ``{x . omega = i}``.
    """

    width: int
    particular: int | None
    basis: tuple[int, ...] = ()
    equations: tuple[tuple[int, int], ...] = ()
    tag: int | None = None
    pivots: tuple[int, ...] = field(default=(), repr=False)

    @property
    def consistent(self) -> bool:
        return self.particular is not None

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def rank(self) -> int:
        return len(self.equations)

    @property
    def size(self) -> int:
        return (1 << self.dim) if self.consistent else 0

    def __contains__(self, x) -> bool:
        if not self.consistent:
            return False
        xv, _ = _coerce(x, self.width)
        return all(parity(xv & w) == r for w, r in self.equations)

    @classmethod
    def full_space(cls, width: int, tag: int | None = None) -> "AffineSolutionSet":
        return cls(width, 0, tuple(1 << j for j in range(width)), (), tag)

    @classmethod
    def empty(cls, width: int, tag: int | None = None) -> "AffineSolutionSet":
        return cls(width, None, (), (), tag)


def solve_affine_system(equations, width: int, tag: int | None = None) -> AffineSolutionSet:
    """Gaussian elimination over F_2 on ``[(omega, rhs), ...]``.

    Duplicate and zero equations are fine. Cost is O(p * width) row
    operations for p equations.
    """
    rows: list[int] = []
    rhs_bit = 1 << width
    for w, r in equations:
        wv, _ = _coerce(w, width)
        r = int(r)
        if r not in (0, 1):
            raise ValueError("right-hand sides must be 0 or 1")
        rows.append(wv | (r << width))

    # reduced row echelon form; pivot on the lowest set column
    pivot_rows: list[int] = []
    pivot_cols: list[int] = []
    for row in rows:
        for pr, pc in zip(pivot_rows, pivot_cols):
            if (row >> pc) & 1:
                row ^= pr
        coeffs = row & (rhs_bit - 1)
        if coeffs == 0:
            if row:
                return AffineSolutionSet.empty(width, tag)
            continue
        col = (coeffs & -coeffs).bit_length() - 1
        for i, pr in enumerate(pivot_rows):
            if (pr >> col) & 1:
                pivot_rows[i] = pr ^ row
        pivot_rows.append(row)
        pivot_cols.append(col)

    pivot_set = set(pivot_cols)
    particular = 0
    for pr, pc in zip(pivot_rows, pivot_cols):
        if pr >> width:
            particular |= 1 << pc
    basis = []
    for f in range(width):
        if f in pivot_set:
            continue
        v = 1 << f
        for pr, pc in zip(pivot_rows, pivot_cols):
            if (pr >> f) & 1:
                v |= 1 << pc
        basis.append(v)
    eqs = tuple((pr & (rhs_bit - 1), pr >> width) for pr in pivot_rows)
    return AffineSolutionSet(width, particular, tuple(basis), eqs, tag, tuple(pivot_cols))


def rank(vectors: Iterable[int], width: int) -> int:
    return solve_affine_system([(v, 0) for v in vectors], width).rank


def span(basis: Sequence[int]) -> np.ndarray:
    """All F_2-combinations of ``basis``, in binary-counting order of coefficients."""
    out = np.zeros(1, dtype=np.int64)
    for b in basis:
        out = np.concatenate([out, out ^ np.int64(b)])
    return out


def enumerate_solutions(S: AffineSolutionSet, cap: int = DEFAULT_ENUM_CAP) -> np.ndarray:
    """Materialize every solution, sorted ascending by integer encoding.

    Returns an empty array for inconsistent sets; raises
    :class:`EnumerationCapError` if ``2**dim`` exceeds ``cap``.
    """
    if not S.consistent:
        return np.zeros(0, dtype=np.int64)
    if S.size > cap:
        raise EnumerationCapError(S.dim, cap)
    out = span(S.basis) ^ np.int64(S.particular)
    out.sort()
    return out


def intersect_affine(sets: Sequence[AffineSolutionSet]) -> AffineSolutionSet:
    """Intersect affine solution sets by stacking their defining equations.

    Avoids enumeration entirely; useful when every family contributes a
    single coset (e.g. only the tag-0 systems).
    """
    if not sets:
        raise ValueError("need at least one set")
    width = sets[0].width
    eqs = []
    for S in sets:
        if S.width != width:
            raise WidthError("width mismatch")
        if not S.consistent:
            return AffineSolutionSet.empty(width)
        eqs.extend(S.equations)
    return solve_affine_system(eqs, width)


def intersect_tagged(families, cap: int = DEFAULT_ENUM_CAP) -> tuple[np.ndarray, np.ndarray]:
    """Tagged intersection over families ``[(A_j^0, A_j^1), ...]``.

    Returns parallel arrays ``(points, tags)`` sorted by ``(point, tag)``:
    ``points[r]`` lies in ``A_j^{i_j}`` for every ``j`` where ``i_j`` is bit
    ``j`` of ``tags[r]``. A point that qualifies under several tag tuples
    (only possible when some system is empty of equations) appears once per
    tuple. One pass over the families, each step a sorted membership test.
    """
    if not families:
        raise ValueError("need at least one family")
    width = families[0][0].width
    points = None
    tags = None
    for j, (A0, A1) in enumerate(families):
        if A0.width != width or A1.width != width:
            raise WidthError("width mismatch")
        e0 = enumerate_solutions(A0, cap)
        e1 = enumerate_solutions(A1, cap)
        if points is None:
            points = np.concatenate([e0, e1])
            tags = np.concatenate([np.zeros(e0.size, np.int64), np.ones(e1.size, np.int64)])
            continue
        m0 = np.isin(points, e0, assume_unique=False)
        m1 = np.isin(points, e1, assume_unique=False)
        bit = np.int64(1 << j)
        points = np.concatenate([points[m0], points[m1]])
        tags = np.concatenate([tags[m0], tags[m1] | bit])
        if points.size == 0:
            break
    order = np.lexsort((tags, points))
    return points[order], tags[order]


__all__ = [
    "AffineSolutionSet",
    "BitVec",
    "DEFAULT_ENUM_CAP",
    "EnumerationCapError",
    "WidthError",
    "dot",
    "enumerate_solutions",
    "intersect_affine",
    "intersect_tagged",
    "parity",
    "parity_array",
    "rank",
    "solve_affine_system",
    "span",
]
