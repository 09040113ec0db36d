"""Truth-table Boolean and vector functions with their spectral structure.

Walsh coefficients are kept unnormalized and integral,
``W_f(w) = sum_x (-1)^(f(x) + w.x)``, so supports and structure sets are exact.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Mapping

import numpy as np

from . import gf2

MAX_K = 24


class CapError(ValueError):
    """Requested table is beyond the supported input width."""


def _check_k(k: int) -> None:
    if not 0 <= k <= MAX_K:
        raise CapError(f"input width {k} outside supported range 0..{MAX_K}")


@dataclass(frozen=True, eq=False)
class BooleanFunction:
    """f: F_2^k -> F_2 as a 0/1 table of length 2^k, entry x = f(x)."""

    k: int
    table: np.ndarray

    def __post_init__(self):
        _check_k(self.k)
        t = np.ascontiguousarray(self.table, dtype=np.uint8)
        if t.shape != (1 << self.k,):
            raise ValueError(f"table must have length 2^{self.k}")
        if t.size and t.max() > 1:
            raise ValueError("table entries must be 0 or 1")
        t.flags.writeable = False
        object.__setattr__(self, "table", t)

    @classmethod
    def from_callable(cls, k: int, fn) -> "BooleanFunction":
        return cls(k, np.array([fn(x) & 1 for x in range(1 << k)], dtype=np.uint8))

    @classmethod
    def linear(cls, k: int, a: int) -> "BooleanFunction":
        return cls(k, gf2.parity_array(np.arange(1 << k) & a))

    @classmethod
    def constant(cls, k: int, c: int) -> "BooleanFunction":
        return cls(k, np.full(1 << k, c & 1, dtype=np.uint8))

    def __call__(self, x: int) -> int:
        return int(self.table[int(x)])

    def __eq__(self, other):
        if not isinstance(other, BooleanFunction):
            return NotImplemented
        return self.k == other.k and np.array_equal(self.table, other.table)

    def signs(self) -> np.ndarray:
        return 1 - 2 * self.table.astype(np.int64)


@dataclass(frozen=True, eq=False)
class VectorFunction:
    """F: F_2^k -> F_2^n; ``table[x]`` is the integer encoding of F(x).

    Component ``j`` (0-based) is bit ``j`` of every output.
    """

    k: int
    n: int
    table: np.ndarray

    def __post_init__(self):
        _check_k(self.k)
        if not 1 <= self.n <= 63:
            raise ValueError("output width must be in 1..63")
        t = np.ascontiguousarray(self.table, dtype=np.int64)
        if t.shape != (1 << self.k,):
            raise ValueError(f"table must have length 2^{self.k}")
        if t.size and (t.min() < 0 or t.max() >> self.n):
            raise ValueError(f"outputs must fit in {self.n} bits")
        t.flags.writeable = False
        object.__setattr__(self, "table", t)

    @classmethod
    def from_components(cls, comps) -> "VectorFunction":
        comps = list(comps)
        k = comps[0].k
        table = np.zeros(1 << k, dtype=np.int64)
        for j, c in enumerate(comps):
            if c.k != k:
                raise ValueError("components must share k")
            table |= c.table.astype(np.int64) << j
        return cls(k, len(comps), table)

    def component(self, j: int) -> BooleanFunction:
        if not 0 <= j < self.n:
            raise IndexError(j)
        return BooleanFunction(self.k, ((self.table >> j) & 1).astype(np.uint8))

    @property
    def components(self) -> list[BooleanFunction]:
        return [self.component(j) for j in range(self.n)]

    def bit_matrix(self) -> np.ndarray:
        """(2^k, n) array of 0/1 outputs."""
        return ((self.table[:, None] >> np.arange(self.n)) & 1).astype(np.uint8)

    def __call__(self, x: int) -> int:
        return int(self.table[int(x)])

    def __eq__(self, other):
        if not isinstance(other, VectorFunction):
            return NotImplemented
        return (self.k, self.n) == (other.k, other.n) and np.array_equal(self.table, other.table)


# -- Walsh-Hadamard -------------------------------------------------------


def fwht(values: np.ndarray) -> np.ndarray:
    """Unnormalized fast Walsh-Hadamard transform along axis 0.

    ``values`` has leading dimension 2^k; trailing axes are transformed
    independently. O(k 2^k) additions per column, exact in int64.
    """
    a = np.array(values, dtype=np.int64, copy=True)
    size = a.shape[0]
    if size & (size - 1):
        raise ValueError("leading dimension must be a power of two")
    tail = a.shape[1:]
    h = 1
    while h < size:
        a = a.reshape((size // (2 * h), 2, h) + tail)
        lo = a[:, 0] + a[:, 1]
        hi = a[:, 0] - a[:, 1]
        a = np.stack([lo, hi], axis=1)
        h *= 2
    return a.reshape((size,) + tail)


@dataclass(frozen=True, eq=False)
class WalshSpectrum:
    """Integer Walsh coefficients; ``coeffs[w] / 2^k`` is S_f(w)."""

    k: int
    coeffs: np.ndarray

    def normalized(self) -> np.ndarray:
        return self.coeffs / float(1 << self.k)

    def parseval_ok(self) -> bool:
        return int(np.sum(self.coeffs.astype(object) ** 2)) == 4**self.k


def walsh_spectrum(f: BooleanFunction) -> WalshSpectrum:
    return WalshSpectrum(f.k, fwht(f.signs()))


def walsh_matrix(F: VectorFunction) -> np.ndarray:
    """(2^k, n) integer spectra of all components at once."""
    return fwht(1 - 2 * F.bit_matrix().astype(np.int64))


def support(f: BooleanFunction) -> np.ndarray:
    """N_f: sorted indices w with nonzero Walsh coefficient."""
    return np.flatnonzero(walsh_spectrum(f).coeffs)


def autocorrelation(f: BooleanFunction) -> np.ndarray:
    """``r(a) = sum_x (-1)^(f(x) + f(x^a))`` for every a, via two transforms."""
    w = walsh_spectrum(f).coeffs
    return fwht(w * w) >> f.k


def agreement_counts(f: BooleanFunction) -> np.ndarray:
    """(2^k, 2) array: entry [a, i] = |{x : f(x) ^ f(x ^ a) = i}|."""
    r = autocorrelation(f)
    size = 1 << f.k
    c0 = (size + r) // 2
    return np.stack([c0, size - c0], axis=1)


# -- linear structures ----------------------------------------------------


@dataclass(frozen=True, eq=False)
class StructureSets:
    """Linear structures grouped by difference value: ``classes[alpha]``.

    Each class is a sorted int64 array. For Boolean functions the keys are
    0 and 1 (U_f^0 and U_f^1).
    """

    k: int
    classes: Mapping[int, np.ndarray]

    def u(self, alpha: int) -> np.ndarray:
        return self.classes.get(alpha, np.zeros(0, dtype=np.int64))

    @property
    def u0(self) -> np.ndarray:
        return self.u(0)

    @property
    def u1(self) -> np.ndarray:
        return self.u(1)

    @property
    def all(self) -> np.ndarray:
        if not self.classes:
            return np.zeros(0, dtype=np.int64)
        return np.sort(np.concatenate(list(self.classes.values())))

    def pairs(self) -> set[tuple[int, int]]:
        return {(int(a), alpha) for alpha, arr in self.classes.items() for a in arr}

    def __len__(self) -> int:
        return sum(arr.size for arr in self.classes.values())


def _scan_structures(table: np.ndarray, k: int) -> dict[int, np.ndarray]:
    # Definitional: a is a structure iff table[x] ^ table[x ^ a] is constant in x.
    x = np.arange(1 << k)
    found: dict[int, list[int]] = {}
    for a in range(1 << k):
        d = table ^ table[x ^ a]
        if np.all(d == d[0]):
            found.setdefault(int(d[0]), []).append(a)
    return {alpha: np.array(v, dtype=np.int64) for alpha, v in sorted(found.items())}


def spectral_structure_systems(f: BooleanFunction) -> tuple[gf2.AffineSolutionSet, gf2.AffineSolutionSet]:
    """The two systems ``{a . w = i : w in N_f}`` for i = 0, 1."""
    nf = support(f)
    A0 = gf2.solve_affine_system(((int(w), 0) for w in nf), f.k, tag=0)
    A1 = gf2.solve_affine_system(((int(w), 1) for w in nf), f.k, tag=1)
    return A0, A1


def exact_linear_structures(f: BooleanFunction, method: str = "spectrum") -> StructureSets:
    """U_f^0 and U_f^1.

    ``method="spectrum"`` solves the affine systems over the Walsh support;
    ``method="scan"`` checks every shift against every input (O(4^k)).
    """
    if method == "scan":
        found = _scan_structures(f.table, f.k)
        return StructureSets(f.k, {i: found.get(i, np.zeros(0, np.int64)) for i in (0, 1)})
    if method != "spectrum":
        raise ValueError(f"unknown method {method!r}")
    A0, A1 = spectral_structure_systems(f)
    return StructureSets(f.k, {0: gf2.enumerate_solutions(A0, cap=1 << f.k),
                               1: gf2.enumerate_solutions(A1, cap=1 << f.k)})


def vector_linear_structures(F: VectorFunction, method: str = "spectrum") -> StructureSets:
    """U_F^alpha for every alpha that occurs."""
    if method == "scan":
        return StructureSets(F.k, _scan_structures(F.table, F.k))
    if method != "spectrum":
        raise ValueError(f"unknown method {method!r}")
    families = [spectral_structure_systems(F.component(j)) for j in range(F.n)]
    points, tags = gf2.intersect_tagged(families, cap=1 << F.k)
    classes = {int(t): np.sort(points[tags == t]) for t in np.unique(tags)}
    return StructureSets(F.k, classes)


def _as_fraction(sigma) -> Fraction:
    if isinstance(sigma, float):
        return Fraction(repr(sigma))
    return Fraction(sigma)


def sigma_close_structures(f: BooleanFunction, sigma) -> list[tuple[int, int, Fraction]]:
    """All (a, i, fraction) with |{x : f(x)^f(x^a) = i}| / 2^k > 1 - sigma.

    Strict inequality; fractions are exact with denominator 2^k.
    """
    sigma = _as_fraction(sigma)
    if not 0 < sigma <= 1:
        raise ValueError("sigma must lie in (0, 1]")
    size = 1 << f.k
    counts = agreement_counts(f)
    # c > (1 - sigma) 2^k  <=>  c > floor((1 - sigma) 2^k) for integer c
    threshold = math.floor((1 - sigma) * size)
    out = []
    for a, i in zip(*np.nonzero(counts > threshold)):
        out.append((int(a), int(i), Fraction(int(counts[a, i]), size)))
    return out


def delta_f(f: BooleanFunction) -> Fraction:
    """Largest agreement fraction achieved by a non-structure; 0 if none exists."""
    r = autocorrelation(f)
    size = 1 << f.k
    non = np.abs(r[np.abs(r) != size])
    if non.size == 0:
        return Fraction(0)
    return Fraction((size + int(non.max())) // 2, size)


def delta_F(F: VectorFunction) -> Fraction:
    return max(delta_f(F.component(j)) for j in range(F.n))


# -- truth-table files ----------------------------------------------------


def encode_table_hex(F: VectorFunction) -> str:
    """Pack F(0), F(1), ... as n-bit fields, least-significant bit first."""
    bits = F.bit_matrix().reshape(-1)
    return np.packbits(bits, bitorder="little").tobytes().hex()


def decode_table_hex(table_hex: str, k: int, n: int) -> VectorFunction:
    _check_k(k)
    raw = np.frombuffer(bytes.fromhex(table_hex), dtype=np.uint8)
    nbits = (1 << k) * n
    if raw.size != (nbits + 7) // 8:
        raise ValueError(f"table_hex has {raw.size} bytes, expected {(nbits + 7) // 8}")
    bits = np.unpackbits(raw, bitorder="little")
    if bits[nbits:].any():
        raise ValueError("nonzero padding bits in table_hex")
    bits = bits[:nbits].reshape(1 << k, n).astype(np.int64)
    table = (bits << np.arange(n)).sum(axis=1)
    return VectorFunction(k, n, table)


def dump_truth_table(F, path=None) -> dict:
    if isinstance(F, BooleanFunction):
        F = VectorFunction(F.k, 1, F.table)
    doc = {"k": F.k, "n": F.n, "table_hex": encode_table_hex(F)}
    if path is not None:
        Path(path).write_text(json.dumps(doc) + "\n")
    return doc


def load_truth_table(source) -> VectorFunction:
    """Read ``{"k", "n", "table_hex"}`` from a path or an already-parsed dict."""
    doc = source if isinstance(source, Mapping) else json.loads(Path(source).read_text())
    try:
        k, n, hx = int(doc["k"]), int(doc["n"]), str(doc["table_hex"])
    except KeyError as e:
        raise ValueError(f"truth-table document missing field {e.args[0]!r}") from None
    return decode_table_hex(hx, k, n)
