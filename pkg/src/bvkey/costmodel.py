"""Resource accounting for the attack: gates, queries, qubits, classical work.

All big-O constants are fixed at 1; the ledger keeps raw counts so they can
be re-weighted afterwards.
"""

from __future__ import annotations

import math
import threading
from dataclasses import asdict, dataclass, field

FIELDS = ("hadamard_gates", "cipher_gate_units", "quantum_queries", "classical_queries",
          "qubits_peak", "gf2_ops", "intersection_ops")


@dataclass(frozen=True)
class BVRunCost:
    hadamard: int
    queries: int
    qubits: int
    cipher_units: int


def bv_run_cost(k: int) -> BVRunCost:
    """One BV run: 2k+1 Hadamards, one query, k+1 qubits, one local U_E."""
    if k < 1:
        raise ValueError("k must be positive")
    return BVRunCost(hadamard=2 * k + 1, queries=1, qubits=k + 1, cipher_units=1)


def sort_intersection_ops(n: int, t: int) -> int:
    """n * t * ceil(log2 t); zero when t <= 1."""
    return n * t * math.ceil(math.log2(t)) if t > 1 else 0


@dataclass
class CostLedger:
    """Monotone counters updated under a lock; ``merge`` is associative.

    ``cipher_gate_units`` counts attacker-side U_E applications; multiply by
    the cipher's gate cost for universal gates.
    """

    hadamard_gates: int = 0
    cipher_gate_units: int = 0
    quantum_queries: int = 0
    classical_queries: int = 0
    qubits_peak: int = 0
    gf2_ops: int = 0
    intersection_ops: int = 0
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def charge_bv(self, k: int, runs: int = 1) -> None:
        c = bv_run_cost(k)
        with self._lock:
            self.hadamard_gates += c.hadamard * runs
            self.quantum_queries += c.queries * runs
            self.cipher_gate_units += c.cipher_units * runs
            self.qubits_peak = max(self.qubits_peak, c.qubits)

    def charge_classical(self, queries: int = 1) -> None:
        with self._lock:
            self.classical_queries += queries

    def charge_elimination(self, equations: int, k: int) -> None:
        with self._lock:
            self.gf2_ops += equations * k * k

    def charge_intersection(self, n: int, t: int) -> None:
        with self._lock:
            self.intersection_ops += sort_intersection_ops(n, t)

    def merge(self, other: "CostLedger") -> "CostLedger":
        a, b = self.as_dict(), other.as_dict()
        out = {f: a[f] + b[f] for f in FIELDS}
        out["qubits_peak"] = max(a["qubits_peak"], b["qubits_peak"])
        return CostLedger(**out)

    def universal_gates(self, gate_cost: int) -> int:
        return self.hadamard_gates + self.cipher_gate_units * gate_cost

    def as_dict(self) -> dict[str, int]:
        with self._lock:
            return {f: getattr(self, f) for f in FIELDS}

    def __deepcopy__(self, memo):
        return CostLedger(**self.as_dict())


@dataclass(frozen=True)
class CostEstimate:
    universal_gates: int
    hadamard_gates: int
    quantum_queries: int
    gf2_ops: int
    intersection_ops: int

    @property
    def total(self) -> int:
        # one time unit per query on top of the gate count
        return self.universal_gates + self.quantum_queries + self.gf2_ops + self.intersection_ops

    def as_dict(self) -> dict[str, int]:
        d = asdict(self)
        d["total"] = self.total
        return d


def attack_cost_estimate(k: int, n: int, p: int, gate_cost: int, t: int) -> CostEstimate:
    """Closed-form RecoverKey cost: BV runs, n eliminations, one sort-intersection."""
    for name, v in (("k", k), ("n", n), ("p", p), ("t", t)):
        if v < 1:
            raise ValueError(f"{name} must be positive")
    if gate_cost < 0:
        raise ValueError("gate_cost must be non-negative")
    runs = n * p
    return CostEstimate(
        universal_gates=(2 * k + 1 + gate_cost) * runs,
        hadamard_gates=(2 * k + 1) * runs,
        quantum_queries=runs,
        gf2_ops=p * n * k * k,
        intersection_ops=sort_intersection_ops(n, t),
    )
