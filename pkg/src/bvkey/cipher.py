"""Toy block-cipher families and the derived functions the attack targets.

Every cipher maps integer keys and plaintexts (canonical bit encoding) to
ciphertexts and is vectorized over numpy arrays: ``encrypt_many(keys, m)``
broadcasts ``keys`` against ``m``.
"""

from __future__ import annotations

import threading
from typing import Any, Mapping, Sequence

import numpy as np

from .boolfn import MAX_K, VectorFunction

PRESENT_SBOX = (0xC, 0x5, 0x6, 0xB, 0x9, 0x0, 0xA, 0xD, 0x3, 0xE, 0xF, 0x8, 0x4, 0x7, 0x1, 0x2)
IDENTITY_SBOX = tuple(range(16))


class CipherConfigError(ValueError):
    pass


class BlockCipher:
    """Keyed permutation family ``E_key`` on F_2^n with a symbolic gate cost."""

    family = "abstract"

    def __init__(self, k: int, n: int, gate_cost: int):
        if k < 1 or n < 1:
            raise CipherConfigError("key and block widths must be positive")
        self.k = k
        self.n = n
        self.gate_cost = int(gate_cost)

    def encrypt_many(self, keys, m) -> np.ndarray:
        raise NotImplementedError

    def encrypt(self, key: int, m: int) -> int:
        return int(self.encrypt_many(np.int64(key), np.int64(m)))

    def config(self) -> dict[str, Any]:
        return {"family": self.family, "k": self.k, "n": self.n, "gate_cost": self.gate_cost}

    def __repr__(self) -> str:
        args = ", ".join(f"{k}={v!r}" for k, v in self.config().items() if k != "family")
        return f"{type(self).__name__}({args})"


class EvenMansour(BlockCipher):
    """``E_x(m) = P(m ^ x) ^ x`` with a public permutation P; k = n."""

    family = "toy_em"

    def __init__(self, n: int, seed: int | None = None, perm: Sequence[int] | None = None,
                 gate_cost: int | None = None):
        super().__init__(n, n, gate_cost if gate_cost is not None else 4 * n * n)
        if n > MAX_K:
            raise CipherConfigError(f"block width {n} too large for a table permutation")
        if perm is None:
            if seed is None:
                raise CipherConfigError("toy_em needs a seed or an explicit permutation")
            perm = np.random.default_rng(seed).permutation(1 << n)
        perm = np.asarray(perm, dtype=np.int64)
        if perm.shape != (1 << n,) or not np.array_equal(np.sort(perm), np.arange(1 << n)):
            raise CipherConfigError("public permutation is not a bijection on F_2^n")
        perm.flags.writeable = False
        self.perm = perm
        self.seed = seed

    def encrypt_many(self, keys, m):
        keys = np.asarray(keys, dtype=np.int64)
        return self.perm[np.asarray(m, dtype=np.int64) ^ keys] ^ keys

    def config(self):
        cfg = super().config()
        cfg["seed"] = self.seed
        if self.seed is None:
            cfg["perm"] = self.perm.tolist()
        return cfg


def toy_em(n: int, seed: int | None = None, perm=None, gate_cost: int | None = None) -> EvenMansour:
    return EvenMansour(n, seed=seed, perm=perm, gate_cost=gate_cost)


def _bit_permutation(n: int) -> np.ndarray:
    # PRESENT-style: bit i -> i * (n/4) mod (n-1), top bit fixed
    w = n // 4
    return np.array([(i * w) % (n - 1) if i < n - 1 else n - 1 for i in range(n)], dtype=np.int64)


class ToySPN(BlockCipher):
    """Substitution-permutation network with k = n, n a multiple of 4.

    Round r (0-based) XORs round key ``rotl(key, 3r mod n)``, applies the
    4-bit S-box to every nibble, then (optionally) the PRESENT-style bit
    permutation. There is no final whitening key, so one round with the
    identity S-box and no permutation is ``m ^ key``.
    """

    family = "toy_spn"

    def __init__(self, n: int, rounds: int, sbox: Sequence[int] = PRESENT_SBOX,
                 permute: bool = True, gate_cost: int | None = None):
        if n % 4 or n < 4:
            raise CipherConfigError("toy_spn block width must be a positive multiple of 4")
        if rounds < 1:
            raise CipherConfigError("rounds must be >= 1")
        sbox = tuple(int(v) for v in sbox)
        if sorted(sbox) != list(range(16)):
            raise CipherConfigError("S-box must be a bijection on 4 bits")
        if gate_cost is None:
            # key XOR (n gates) plus ~20 gates per 4-bit S-box, per round
            gate_cost = rounds * (n + 20 * (n // 4))
        super().__init__(n, n, gate_cost)
        self.rounds = rounds
        self.sbox = sbox
        self.permute = permute
        self._sbox = np.array(sbox, dtype=np.int64)
        self._perm = _bit_permutation(n)
        self._mask = (1 << n) - 1

    def round_key(self, keys: np.ndarray, r: int) -> np.ndarray:
        rot = (3 * r) % self.n
        if rot == 0:
            return keys
        return ((keys << rot) | (keys >> (self.n - rot))) & self._mask

    def _substitute(self, state):
        out = np.zeros_like(state)
        for nib in range(self.n // 4):
            sh = 4 * nib
            out |= self._sbox[(state >> sh) & 0xF] << sh
        return out

    def _permute_bits(self, state):
        out = np.zeros_like(state)
        for i, dst in enumerate(self._perm):
            out |= ((state >> i) & 1) << int(dst)
        return out

    def encrypt_many(self, keys, m):
        keys = np.asarray(keys, dtype=np.int64)
        state = np.asarray(m, dtype=np.int64) ^ np.zeros_like(keys)
        for r in range(self.rounds):
            state = state ^ self.round_key(keys, r)
            state = self._substitute(state)
            if self.permute:
                state = self._permute_bits(state)
        return state

    def config(self):
        cfg = super().config()
        cfg.update(rounds=self.rounds, sbox_hex="".join(f"{v:x}" for v in self.sbox),
                   permute=self.permute)
        return cfg


def toy_spn(rounds: int, sbox: Sequence[int] = PRESENT_SBOX, n: int = 8, permute: bool = True,
            gate_cost: int | None = None) -> ToySPN:
    return ToySPN(n, rounds, sbox=sbox, permute=permute, gate_cost=gate_cost)


class RandomCipher(BlockCipher):
    """Ideal-cipher stand-in: an independent seeded permutation per key.

    Permutations are built on first use and cached; the cache is guarded by
    a lock so concurrent readers see one table per key.
    """

    family = "random"
    MAX_WIDTH = 12

    def __init__(self, k: int, n: int, seed: int, gate_cost: int | None = None):
        if k > self.MAX_WIDTH or n > self.MAX_WIDTH:
            raise CipherConfigError(f"random cipher widths are capped at {self.MAX_WIDTH}")
        super().__init__(k, n, gate_cost if gate_cost is not None else 1000)
        self.seed = int(seed)
        self._cache: dict[int, np.ndarray] = {}
        self._lock = threading.Lock()

    def permutation(self, key: int) -> np.ndarray:
        key = int(key)
        with self._lock:
            perm = self._cache.get(key)
            if perm is None:
                ss = np.random.SeedSequence(self.seed, spawn_key=(key,))
                perm = np.random.default_rng(ss).permutation(1 << self.n)
                perm.flags.writeable = False
                self._cache[key] = perm
        return perm

    def encrypt_many(self, keys, m):
        keys, m = np.broadcast_arrays(np.asarray(keys, dtype=np.int64), np.asarray(m, dtype=np.int64))
        if keys.ndim == 0:
            return self.permutation(int(keys))[int(m)]
        uniq, inv = np.unique(keys, return_inverse=True)
        perms = np.stack([self.permutation(u) for u in uniq])
        return perms[inv.reshape(keys.shape), m]

    def config(self):
        cfg = super().config()
        cfg["seed"] = self.seed
        return cfg


def random_cipher(k: int, n: int, seed: int, gate_cost: int | None = None) -> RandomCipher:
    return RandomCipher(k, n, seed, gate_cost=gate_cost)


class TableCipher(BlockCipher):
    """Cipher given by an explicit (2^k, 2^n) table, row = key."""

    family = "table"

    def __init__(self, table, gate_cost: int = 1000):
        table = np.asarray(table, dtype=np.int64)
        rows, cols = table.shape
        k, n = rows.bit_length() - 1, cols.bit_length() - 1
        if rows != 1 << k or cols != 1 << n:
            raise CipherConfigError("table dimensions must be powers of two")
        if not np.array_equal(np.sort(table, axis=1), np.broadcast_to(np.arange(cols), table.shape)):
            raise CipherConfigError("every table row must be a permutation")
        super().__init__(k, n, gate_cost)
        table.flags.writeable = False
        self.table = table

    def encrypt_many(self, keys, m):
        return self.table[np.asarray(keys, dtype=np.int64), np.asarray(m, dtype=np.int64)]


class LinearCipher(BlockCipher):
    """``E_x(m) = m ^ x``: the maximally linear reference (k = n)."""

    family = "linear"

    def __init__(self, n: int, gate_cost: int | None = None):
        super().__init__(n, n, gate_cost if gate_cost is not None else n)

    def encrypt_many(self, keys, m):
        return np.asarray(m, dtype=np.int64) ^ np.asarray(keys, dtype=np.int64)


def is_permutation_per_key(E: BlockCipher, keys=None) -> bool:
    """Exhaustive bijectivity check of ``E_key`` over all plaintexts."""
    msgs = np.arange(1 << E.n, dtype=np.int64)
    keys = range(1 << E.k) if keys is None else keys
    for key in keys:
        ct = E.encrypt_many(np.int64(key), msgs)
        if np.unique(ct).size != msgs.size:
            return False
    return True


def cipher_from_config(cfg: Mapping[str, Any]) -> BlockCipher:
    """Build a cipher from a catalog entry (see the README for the schema)."""
    try:
        family = cfg["family"]
    except KeyError:
        raise CipherConfigError("cipher config needs a 'family' field") from None
    known = {"family", "k", "n", "rounds", "sbox_hex", "seed", "gate_cost", "permute", "perm"}
    extra = set(cfg) - known
    if extra:
        raise CipherConfigError(f"unknown cipher config fields: {sorted(extra)}")
    k, n = cfg.get("k"), cfg.get("n")
    gate_cost = cfg.get("gate_cost")
    if family in ("toy_em", "toy_spn", "linear"):
        if n is None:
            n = k
        if n is None:
            raise CipherConfigError(f"{family} needs 'n'")
        if k is not None and k != n:
            raise CipherConfigError(f"{family} requires k == n")
    if family == "toy_em":
        return EvenMansour(int(n), seed=cfg.get("seed"), perm=cfg.get("perm"), gate_cost=gate_cost)
    if family == "toy_spn":
        sbox_hex = cfg.get("sbox_hex")
        sbox = PRESENT_SBOX if sbox_hex is None else _parse_sbox(sbox_hex)
        if "rounds" not in cfg:
            raise CipherConfigError("toy_spn needs 'rounds'")
        return ToySPN(int(n), int(cfg["rounds"]), sbox=sbox, permute=bool(cfg.get("permute", True)),
                      gate_cost=gate_cost)
    if family == "random":
        if k is None or n is None or cfg.get("seed") is None:
            raise CipherConfigError("random cipher needs 'k', 'n' and 'seed'")
        return RandomCipher(int(k), int(n), int(cfg["seed"]), gate_cost=gate_cost)
    if family == "linear":
        return LinearCipher(int(n), gate_cost=gate_cost)
    raise CipherConfigError(f"unknown cipher family {family!r}")


def _parse_sbox(sbox_hex: str) -> tuple[int, ...]:
    if len(sbox_hex) != 16:
        raise CipherConfigError("sbox_hex must have 16 hex digits")
    try:
        return tuple(int(c, 16) for c in sbox_hex)
    except ValueError:
        raise CipherConfigError(f"bad sbox_hex {sbox_hex!r}") from None


# -- derived functions ----------------------------------------------------


def derived_f(E: BlockCipher, s: int, m: int) -> VectorFunction:
    """``x -> E_x(m) ^ E_{x^s}(m)``; s is a period of the result."""
    x = np.arange(1 << E.k, dtype=np.int64)
    return VectorFunction(E.k, E.n, E.encrypt_many(x, m) ^ E.encrypt_many(x ^ int(s), m))


def derived_g(E: BlockCipher, s: int, m: int) -> VectorFunction:
    """``x -> E_{x^s}(m) ^ E_x(m) ^ x``; s is a structure with difference s."""
    if E.k != E.n:
        raise CipherConfigError("derived_g requires key width == block width")
    x = np.arange(1 << E.k, dtype=np.int64)
    return VectorFunction(E.k, E.n, E.encrypt_many(x ^ int(s), m) ^ E.encrypt_many(x, m) ^ x)
