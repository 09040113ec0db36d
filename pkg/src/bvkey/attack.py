"""Structure finding and related-key key recovery driven by BV samples.

RNG layout under a trial stream ``rng``: component ``j`` of the sampled
function reads ``rng.child(1, j)``; verification plaintexts read
``rng.child(2)``. :func:`find_struct` called directly reads ``rng.child(j)``.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

import numpy as np

from . import gf2
from .boolfn import (VectorFunction, agreement_counts, delta_f, sigma_close_structures,
                     vector_linear_structures)
from .cipher import BlockCipher, derived_f
from .costmodel import CostLedger
from .gf2 import DEFAULT_ENUM_CAP, AffineSolutionSet, EnumerationCapError
from .qoracle import RelatedKeyOracle, RngStream, _as_generator, bv_sample

MAX_CONDITION_K = 12


@dataclass(frozen=True)
class AttackConfig:
    """Attack parameters.

    ``p`` is the number of BV samples per component. ``l`` and ``eps`` only
    matter for closeness diagnostics; ``p0`` for soundness diagnostics.
    ``verify_plaintexts=None`` picks ``ceil((k + 40) / n)``.
    """

    p: int = 32
    l: int | None = None
    p0: float = 0.75
    eps: float | None = None
    verify_plaintexts: int | None = None
    cap: int = DEFAULT_ENUM_CAP
    max_doublings: int = 4
    intersection: str = "sort"

    def __post_init__(self):
        if self.p < 1:
            raise ValueError("p must be >= 1")
        if not 0 < self.p0 < 1:
            raise ValueError("p0 must lie in (0, 1)")
        if self.eps is not None and not 0 < self.eps < 1:
            raise ValueError("eps must lie in (0, 1)")
        if self.l is not None and self.l < 1:
            raise ValueError("l must be >= 1")
        if self.verify_plaintexts is not None and self.verify_plaintexts < 1:
            raise ValueError("verify_plaintexts must be >= 1")
        if self.cap < 1 or self.max_doublings < 0:
            raise ValueError("cap must be positive and max_doublings non-negative")
        if self.intersection not in ("sort", "stacked"):
            raise ValueError("intersection must be 'sort' or 'stacked'")

    @classmethod
    def condition1(cls, n: int, c: int = 4, **kw) -> "AttackConfig":
        """p = c * n."""
        return cls(p=c * n, **kw)

    @classmethod
    def condition2(cls, n: int, l: int, **kw) -> "AttackConfig":
        """p = n * l^2 with eps = 1/l."""
        return cls(p=n * l * l, l=l, eps=1.0 / l, **kw)

    def verify_count(self, k: int, n: int) -> int:
        if self.verify_plaintexts is not None:
            return self.verify_plaintexts
        return math.ceil((k + 40) / n)

    def as_dict(self) -> dict[str, Any]:
        return {"p": self.p, "l": self.l, "p0": self.p0, "eps": self.eps,
                "verify_plaintexts": self.verify_plaintexts, "cap": self.cap,
                "max_doublings": self.max_doublings, "intersection": self.intersection}


# -- FindStruct -----------------------------------------------------------


@dataclass
class StructResult:
    """Tagged candidate set A plus the per-component data that produced it.

    ``points[r]`` carries tag ``tags[r]`` (bit j = i_j). ``samples[j]`` is
    W_j, ``systems[j]`` the pair (A_j^0, A_j^1).
    """

    k: int
    n: int
    p: int
    points: np.ndarray
    tags: np.ndarray
    samples: list[np.ndarray]
    systems: list[tuple[AffineSolutionSet, AffineSolutionSet]]

    @property
    def component_sizes(self) -> list[tuple[int, int]]:
        return [(A0.size, A1.size) for A0, A1 in self.systems]

    @property
    def component_ranks(self) -> list[int]:
        return [gf2.rank((int(w) for w in W), self.k) for W in self.samples]

    @property
    def t(self) -> int:
        return max(A0.size for A0, _ in self.systems)

    def pairs(self) -> set[tuple[int, int]]:
        return {(int(a), int(t)) for a, t in zip(self.points, self.tags)}

    def __contains__(self, pair) -> bool:
        a, alpha = pair
        return bool(np.any((self.points == int(a)) & (self.tags == int(alpha))))

    def __len__(self) -> int:
        return int(self.points.size)


class _Sampler:
    """Per-component BV sample pools that can be extended without reuse."""

    def __init__(self, F, rng: RngStream):
        self.F = F
        self.gens = [rng.child(j).generator() for j in range(F.n)]
        self.samples = [np.zeros(0, dtype=np.int64) for _ in range(F.n)]

    @property
    def p(self) -> int:
        return int(self.samples[0].size)

    def extend(self, count: int) -> None:
        for j in range(self.F.n):
            ys = bv_sample(self.F.component(j), self.gens[j], size=count)
            self.samples[j] = np.concatenate([self.samples[j], ys])


def _systems(W: np.ndarray, k: int, j: int, tags=(0, 1), bit_filter: bool = False):
    out = []
    for i in tags:
        eqs = [(int(w), i) for w in W]
        if bit_filter:
            # a_j == i_j is the extra equation a . e_j = i_j
            eqs.append((1 << j, i))
        out.append(gf2.solve_affine_system(eqs, k, tag=i))
    return out


def _ledger_for(F) -> CostLedger:
    oracle = getattr(F, "oracle", None)
    return oracle.ledger if oracle is not None else CostLedger()


def _struct_from_samples(k: int, n: int, samples: Sequence[np.ndarray], cfg: AttackConfig,
                         ledger: CostLedger, bit_filter: bool = False) -> StructResult:
    systems = []
    for j, W in enumerate(samples):
        A0, A1 = _systems(W, k, j, bit_filter=bit_filter)
        ledger.charge_elimination(2 * W.size, k)
        systems.append((A0, A1))
    biggest = max((S.dim for pair in systems for S in pair if S.consistent), default=0)
    if (1 << biggest) > cfg.cap:
        raise EnumerationCapError(biggest, cfg.cap,
                                  ranks=[gf2.rank((int(w) for w in W), k) for W in samples])
    points, tags = gf2.intersect_tagged(systems, cap=cfg.cap)
    t = max(A0.size for A0, _ in systems)
    ledger.charge_intersection(n, t)
    p = int(samples[0].size) if samples else 0
    return StructResult(k, n, p, points, tags, [np.asarray(W) for W in samples], systems)


def find_struct(F, cfg: AttackConfig, rng: RngStream, bit_filter: bool = False) -> StructResult:
    """BV-sample every component ``cfg.p`` times, solve both tagged systems, intersect.

    ``F`` is a :class:`VectorFunction` or an oracle-bound vector function.
    With ``bit_filter`` (for functions whose structure carries its own
    value, like G), members of A_j^i with bit j != i are dropped.
    Raises :class:`EnumerationCapError` if any A_j^i is too large.
    """
    sampler = _Sampler(F, rng)
    sampler.extend(cfg.p)
    return _struct_from_samples(F.k, F.n, sampler.samples, cfg, _ledger_for(F), bit_filter)


# -- verification ---------------------------------------------------------


@dataclass(frozen=True)
class Verification:
    key: int | None
    survivors: tuple[int, ...]
    plaintexts: tuple[int, ...]

    @property
    def ambiguous(self) -> bool:
        return self.key is None


def verify_candidates(candidates, oracle: RelatedKeyOracle, r: int, rng) -> Verification:
    """Keep candidates a with E_a(m') == E_s(m') on r random distinct plaintexts."""
    cands = np.unique(np.asarray(candidates, dtype=np.int64))
    if cands.size == 0:
        raise ValueError("empty candidate set: the true key is always a candidate")
    if r < 1:
        raise ValueError("r must be >= 1")
    gen = _as_generator(rng)
    r = min(r, 1 << oracle.n)
    msgs = np.sort(gen.choice(1 << oracle.n, size=r, replace=False)).astype(np.int64)
    targets = oracle.target_many(msgs)
    alive = cands
    for msg, ct in zip(msgs, targets):
        alive = alive[oracle.cipher.encrypt_many(alive, np.int64(msg)) == ct]
    if alive.size == 0:
        raise RuntimeError("every candidate was rejected; oracle is inconsistent with its cipher")
    key = int(alive[0]) if alive.size == 1 else None
    return Verification(key, tuple(int(a) for a in alive), tuple(int(v) for v in msgs))


# -- key recovery ---------------------------------------------------------


@dataclass
class AttackReport:
    status: str  # "success" | "ambiguous" | "cap_exceeded"
    variant: str
    key: int | None
    survivors: list[int]
    candidates: np.ndarray
    t: int
    component_sizes: list[int]
    component_ranks: list[int]
    p_used: int
    doublings: int
    verify_plaintexts: int
    ledger: dict[str, int]
    config: dict[str, Any]
    seed_path: list[int]
    plaintext: int
    wall_time: float | None = None
    cap_dim: int | None = None
    extras: dict[str, Any] = field(default_factory=dict)

    @property
    def candidate_count(self) -> int:
        return int(self.candidates.size)

    @property
    def success(self) -> bool:
        return self.status == "success"

    def to_dict(self, max_candidates: int = 64, timing: bool = False) -> dict[str, Any]:
        d = {
            "status": self.status,
            "variant": self.variant,
            "key": self.key,
            "survivors": list(self.survivors),
            "candidate_count": self.candidate_count,
            "candidates": [int(a) for a in self.candidates[:max_candidates]],
            "candidates_truncated": self.candidate_count > max_candidates,
            "t": self.t,
            "component_sizes": list(self.component_sizes),
            "component_ranks": list(self.component_ranks),
            "p_used": self.p_used,
            "doublings": self.doublings,
            "verify_plaintexts": self.verify_plaintexts,
            "plaintext": self.plaintext,
            "cap_dim": self.cap_dim,
            "ledger": dict(self.ledger),
            "config": dict(self.config),
            "seed_path": list(self.seed_path),
        }
        d.update(self.extras)
        if timing:
            d["wall_time"] = self.wall_time
        return d


def _recover(oracle: RelatedKeyOracle, m: int, cfg: AttackConfig, rng: RngStream, variant: str):
    start = time.perf_counter()
    F = oracle.bound_f(m) if variant == "f" else oracle.bound_g(m)
    k, n = oracle.k, oracle.n
    ledger = oracle.ledger
    sampler = _Sampler(F, rng.child(1))
    count = cfg.p
    doublings = 0
    common = dict(variant=variant, config=cfg.as_dict(), seed_path=[rng.master, *rng.path],
                  plaintext=int(m), verify_plaintexts=0)
    while True:
        sampler.extend(count)
        W = sampler.samples
        if variant == "f":
            systems = [gf2.solve_affine_system(((int(w), 0) for w in Wj), k, tag=0) for Wj in W]
            for Wj in W:
                ledger.charge_elimination(Wj.size, k)
            sizes = [S.size for S in systems]
            dims = [S.dim for S in systems]
            over = max(dims) if (1 << max(dims)) > cfg.cap else None
        else:
            try:
                struct = _struct_from_samples(k, n, W, cfg, ledger, bit_filter=True)
            except EnumerationCapError as e:
                over = e.dim
            else:
                over = None
                sizes = [A0.size + A1.size for A0, A1 in struct.systems]
        if over is None:
            break
        if doublings >= cfg.max_doublings:
            ranks = [gf2.rank((int(w) for w in Wj), k) for Wj in W]
            return AttackReport(status="cap_exceeded", key=None, survivors=[],
                                candidates=np.zeros(0, np.int64), t=1 << over,
                                component_sizes=[], component_ranks=ranks, p_used=sampler.p,
                                doublings=doublings, ledger=ledger.as_dict(), cap_dim=over,
                                wall_time=time.perf_counter() - start, **common)
        # more equations shrink the solution spaces
        count = sampler.p
        doublings += 1

    if variant == "f":
        t = max(sizes)
        if cfg.intersection == "stacked":
            cands = gf2.enumerate_solutions(gf2.intersect_affine(systems), cap=cfg.cap)
        else:
            cands = gf2.enumerate_solutions(systems[0], cap=cfg.cap)
            for S in systems[1:]:
                cands = np.intersect1d(cands, gf2.enumerate_solutions(S, cap=cfg.cap),
                                       assume_unique=True)
        ledger.charge_intersection(n, t)
    else:
        t = struct.t
        # after the bit filter every surviving tag equals its point
        keep = struct.points == struct.tags
        cands = np.unique(struct.points[keep])
    ranks = [gf2.rank((int(w) for w in Wj), k) for Wj in W]
    r = cfg.verify_count(k, n)
    ver = verify_candidates(cands, oracle, r, rng.child(2))
    common["verify_plaintexts"] = len(ver.plaintexts)
    return AttackReport(status="ambiguous" if ver.ambiguous else "success", key=ver.key,
                        survivors=list(ver.survivors), candidates=cands, t=t,
                        component_sizes=sizes, component_ranks=ranks, p_used=sampler.p,
                        doublings=doublings, ledger=ledger.as_dict(),
                        wall_time=time.perf_counter() - start, **common)


def recover_key(oracle: RelatedKeyOracle, m: int, cfg: AttackConfig, rng: RngStream) -> AttackReport:
    """Key recovery through the period of x -> E_x(m) ^ E_{s^x}(m).

    Only the tag-0 systems are solved. If some A_j^0 exceeds the cap, p is
    doubled (fresh samples, up to ``cfg.max_doublings`` times) before giving
    up with status ``cap_exceeded``.
    """
    return _recover(oracle, m, cfg, rng, "f")


def recover_key_gvariant(oracle: RelatedKeyOracle, m: int, cfg: AttackConfig,
                         rng: RngStream) -> AttackReport:
    """Key recovery through x -> E_{x^s}(m) ^ E_x(m) ^ x (needs k == n).

    Full tagged FindStruct with the bit filter a_j == i_j; candidates are
    the points whose tag equals the point itself.
    """
    if oracle.k != oracle.n:
        raise ValueError("the G variant requires key width == block width")
    return _recover(oracle, m, cfg, rng, "g")


# -- conditions and bounds ------------------------------------------------


def _condition_guard(E: BlockCipher) -> None:
    if E.k > MAX_CONDITION_K:
        raise gf2.EnumerationCapError(E.k, 1 << MAX_CONDITION_K)


@dataclass(frozen=True)
class Condition1Result:
    delta: Fraction
    per_component: tuple[Fraction, ...]
    degenerate: bool  # every vector is a structure of the derived function

    @property
    def min_p0(self) -> Fraction:
        return self.delta

    def satisfied(self, p0) -> bool:
        return self.delta <= Fraction(p0) and not self.degenerate


def check_condition1(E: BlockCipher, s: int, m: int) -> Condition1Result:
    """Exact delta of x -> E_x(m) ^ E_{x^s}(m), max over components."""
    _condition_guard(E)
    F = derived_f(E, s, m)
    per = tuple(delta_f(F.component(j)) for j in range(F.n))
    degenerate = len(vector_linear_structures(F)) == 1 << E.k
    return Condition1Result(max(per), per, degenerate)


@dataclass(frozen=True)
class Condition2Result:
    l: int
    counts: tuple[int, ...]

    @property
    def max_count(self) -> int:
        return max(self.counts)


def check_condition2(E: BlockCipher, s: int, m: int, l: int) -> Condition2Result:
    """Number of (1/l)-close structures of each component of the derived function."""
    _condition_guard(E)
    if l < 1:
        raise ValueError("l must be >= 1")
    F = derived_f(E, s, m)
    counts = tuple(len({a for a, _, _ in sigma_close_structures(F.component(j), Fraction(1, l))})
                   for j in range(F.n))
    return Condition2Result(l, counts)


def theorem2_component_bound(p: int, eps: float) -> float:
    """1 - exp(-2 p eps^2)."""
    if not 0 < eps < 1 or p < 1:
        raise ValueError("need 0 < eps < 1 and p >= 1")
    return -math.expm1(-2.0 * p * eps * eps)


def theorem2_bound(p: int, eps: float, n: int) -> float:
    """(1 - exp(-2 p eps^2))^n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return theorem2_component_bound(p, eps) ** n


def theorem3_bound(p0: float, p: int) -> float:
    """1 - p0^p."""
    if not 0 < p0 < 1 or p < 1:
        raise ValueError("need 0 < p0 < 1 and p >= 1")
    return 1.0 - p0**p


def wilson_interval(successes: int, trials: int, z: float = 3.0) -> tuple[float, float]:
    if trials <= 0:
        return (0.0, 1.0)
    phat = successes / trials
    denom = 1 + z * z / trials
    centre = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    return (max(0.0, centre - half), min(1.0, centre + half))


# -- diagnostics over A ---------------------------------------------------


def nonstructure_members(result: StructResult, F: VectorFunction) -> np.ndarray:
    """Members (a, tag) of A for which a is not a structure with that tag."""
    truth = vector_linear_structures(F).pairs()
    bad = [(int(a), int(t)) for a, t in zip(result.points, result.tags) if (int(a), int(t)) not in truth]
    return np.array(bad, dtype=np.int64).reshape(-1, 2)


def all_close(result: StructResult, F: VectorFunction, sigma) -> bool:
    """Every (a, tag) in A is sigma-close in every component for bit j of its tag."""
    sigma = Fraction(sigma)
    size = 1 << F.k
    for j in range(F.n):
        counts = agreement_counts(F.component(j))
        bits = (result.tags >> j) & 1
        got = counts[result.points, bits]
        if np.any(got <= math.floor((1 - sigma) * size)):
            return False
    return True


__all__ = [
    "AttackConfig", "AttackReport", "Condition1Result", "Condition2Result", "StructResult",
    "Verification", "all_close", "check_condition1", "check_condition2", "find_struct",
    "nonstructure_members", "recover_key", "recover_key_gvariant", "theorem2_bound",
    "theorem2_component_bound", "theorem3_bound", "verify_candidates", "wilson_interval",
]
