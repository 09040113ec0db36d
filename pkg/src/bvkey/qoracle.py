"""Classical simulation of the related-key quantum oracles and BV sampling.

A BV run on ``f`` outputs ``y`` with probability ``W_f(y)^2 / 4^k``. We
sample that law directly from the integer spectrum instead of simulating
amplitudes, but bill every run as one quantum query, 2k+1 Hadamards and one
attacker-side cipher circuit.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .boolfn import BooleanFunction, walsh_spectrum
from .cipher import BlockCipher, CipherConfigError
from .costmodel import CostLedger


@dataclass(frozen=True)
class RngStream:
    """Deterministic stream addressed by ``(master_seed, *path)``.

    Each call to :meth:`generator` starts the stream from its beginning, so
    identical paths always reproduce identical samples regardless of which
    thread asks.
    """

    master: int
    path: tuple[int, ...] = ()

    def child(self, *idx: int) -> "RngStream":
        return RngStream(self.master, self.path + tuple(int(i) for i in idx))

    def seed_sequence(self) -> np.random.SeedSequence:
        return np.random.SeedSequence(self.master, spawn_key=self.path)

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.seed_sequence()))


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError("rng must be an RngStream or numpy Generator")


@dataclass(frozen=True, eq=False)
class ExactDistribution:
    """Integer weights over F_2^k with ``weights.sum() == total``."""

    k: int
    weights: np.ndarray
    total: int

    def __post_init__(self):
        object.__setattr__(self, "cumulative", np.cumsum(self.weights))

    def __getitem__(self, y: int) -> Fraction:
        return Fraction(int(self.weights[int(y)]), self.total)

    def probabilities(self) -> np.ndarray:
        return self.weights / float(self.total)

    def support(self) -> np.ndarray:
        return np.flatnonzero(self.weights)


def bv_exact_distribution(f: BooleanFunction) -> ExactDistribution:
    c = walsh_spectrum(f).coeffs
    return ExactDistribution(f.k, c * c, 4**f.k)


def _draw(dist: ExactDistribution, gen: np.random.Generator, count: int) -> np.ndarray:
    u = gen.integers(0, dist.total, size=count, dtype=np.int64)
    return np.searchsorted(dist.cumulative, u, side="right").astype(np.int64)


class RelatedKeyOracle:
    """Encryption oracle under ``secret ^ mask`` for a fixed hidden key.

    The secret is only reachable through the query methods. Classical
    queries go to ``ledger.classical_queries``; quantum queries are billed
    by the BV sampler through :meth:`charge_bv`.
    """

    def __init__(self, cipher: BlockCipher, secret: int, ledger: CostLedger | None = None):
        secret = int(secret)
        if not 0 <= secret < (1 << cipher.k):
            raise ValueError("secret key does not fit the key width")
        self.cipher = cipher
        self.__secret = secret
        self.ledger = ledger if ledger is not None else CostLedger()

    @property
    def k(self) -> int:
        return self.cipher.k

    @property
    def n(self) -> int:
        return self.cipher.n

    def classical_query(self, x: int, m: int) -> int:
        """E_{s^x}(m)."""
        self.ledger.charge_classical()
        return self.cipher.encrypt(self.__secret ^ int(x), int(m))

    def bit_query(self, x: int, m: int, j: int) -> int:
        """Bit j of E_{s^x}(m)."""
        if not 0 <= j < self.n:
            raise IndexError(j)
        self.ledger.charge_classical()
        return (self.cipher.encrypt(self.__secret ^ int(x), int(m)) >> j) & 1

    def target_query(self, m: int) -> int:
        """E_s(m): a related-key query with the zero mask."""
        return self.classical_query(0, m)

    def target_many(self, msgs) -> np.ndarray:
        msgs = np.asarray(msgs, dtype=np.int64)
        self.ledger.charge_classical(int(msgs.size))
        return self.cipher.encrypt_many(np.int64(self.__secret), msgs)

    def charge_bv(self, runs: int) -> None:
        self.ledger.charge_bv(self.k, runs)

    def _superposed(self, m: int) -> np.ndarray:
        # the oracle's action on a uniform key register: E_{s^x}(m) for all x
        x = np.arange(1 << self.k, dtype=np.int64)
        return self.cipher.encrypt_many(x ^ self.__secret, m)

    def bound_f(self, m: int) -> "BoundVectorFunction":
        return BoundVectorFunction(self, m, "f")

    def bound_g(self, m: int) -> "BoundVectorFunction":
        if self.k != self.n:
            raise CipherConfigError("the G construction requires key width == block width")
        return BoundVectorFunction(self, m, "g")


class OracleFunction:
    """A Boolean function reachable only through oracle queries.

    ``kind="f"``: x -> E_{x,j}(m) ^ E_{x^s,j}(m), one bit query plus one
    local cipher evaluation. ``kind="g"`` additionally XORs x_j.
    Calling the object evaluates one point classically; :func:`bv_sample`
    uses the superposed table, paying one quantum query per run.
    """

    def __init__(self, oracle: RelatedKeyOracle, m: int, j: int, kind: str = "f",
                 source: "BoundVectorFunction | None" = None):
        if not 0 <= j < oracle.n:
            raise IndexError(j)
        if kind not in ("f", "g"):
            raise ValueError(f"unknown kind {kind!r}")
        self.oracle = oracle
        self.m = int(m)
        self.j = j
        self.kind = kind
        self.k = oracle.k
        self._source = source
        self._dist: ExactDistribution | None = None
        self._lock = threading.Lock()

    def __call__(self, x: int) -> int:
        x = int(x)
        local = (self.oracle.cipher.encrypt(x, self.m) >> self.j) & 1
        v = self.oracle.bit_query(x, self.m, self.j) ^ local
        if self.kind == "g":
            v ^= (x >> self.j) & 1
        return v

    def _table(self) -> BooleanFunction:
        full = self._source._full() if self._source is not None else _full_table(self.oracle, self.m, self.kind)
        return BooleanFunction(self.k, ((full >> self.j) & 1).astype(np.uint8))

    def distribution(self) -> ExactDistribution:
        with self._lock:
            if self._dist is None:
                self._dist = bv_exact_distribution(self._table())
            return self._dist

    def charge(self, runs: int) -> None:
        self.oracle.charge_bv(runs)


def _full_table(oracle: RelatedKeyOracle, m: int, kind: str) -> np.ndarray:
    x = np.arange(1 << oracle.k, dtype=np.int64)
    out = oracle.cipher.encrypt_many(x, m) ^ oracle._superposed(m)
    if kind == "g":
        out = out ^ x
    return out


class BoundVectorFunction:
    """All n components of F_s^m (or G_s^m) behind an oracle."""

    def __init__(self, oracle: RelatedKeyOracle, m: int, kind: str = "f"):
        self.oracle = oracle
        self.m = int(m)
        self.kind = kind
        self.k = oracle.k
        self.n = oracle.n
        self._table: np.ndarray | None = None
        self._lock = threading.Lock()
        self._components = [OracleFunction(oracle, m, j, kind, source=self) for j in range(self.n)]

    def _full(self) -> np.ndarray:
        with self._lock:
            if self._table is None:
                self._table = _full_table(self.oracle, self.m, self.kind)
            return self._table

    def component(self, j: int) -> OracleFunction:
        return self._components[j]


def bound_f_component(oracle: RelatedKeyOracle, m: int, j: int) -> OracleFunction:
    return OracleFunction(oracle, m, j, "f")


def bound_g_component(oracle: RelatedKeyOracle, m: int, j: int) -> OracleFunction:
    if oracle.k != oracle.n:
        raise CipherConfigError("the G construction requires key width == block width")
    return OracleFunction(oracle, m, j, "g")


def bv_sample(f, rng, size: int | None = None):
    """Run BV on ``f`` and return the measured vector(s).

    ``f`` is an :class:`OracleFunction` (billed one quantum query per run)
    or a plain :class:`BooleanFunction` (no oracle, nothing billed). With
    ``size=None`` a single int is returned, else an int64 array.
    """
    count = 1 if size is None else int(size)
    if count < 0:
        raise ValueError("size must be non-negative")
    if isinstance(f, OracleFunction):
        dist = f.distribution()
        f.charge(count)
    elif isinstance(f, BooleanFunction):
        dist = bv_exact_distribution(f)
    else:
        raise TypeError("bv_sample needs an OracleFunction or BooleanFunction")
    ys = _draw(dist, _as_generator(rng), count)
    return int(ys[0]) if size is None else ys


def classical_query(oracle: RelatedKeyOracle, x: int, m: int) -> int:
    return oracle.classical_query(x, m)


def target_query(oracle: RelatedKeyOracle, m: int) -> int:
    return oracle.target_query(m)
