import copy
import itertools
import threading

import pytest

from bvkey.attack import AttackConfig, recover_key
from bvkey.cipher import toy_em, toy_spn
from bvkey.costmodel import (FIELDS, CostLedger, attack_cost_estimate, bv_run_cost,
                             sort_intersection_ops)
from bvkey.qoracle import RelatedKeyOracle, RngStream


def test_bv_run_cost():
    c = bv_run_cost(8)
    assert (c.hadamard, c.queries, c.qubits, c.cipher_units) == (17, 1, 9, 1)
    assert bv_run_cost(1).hadamard == 3
    with pytest.raises(ValueError):
        bv_run_cost(0)


def test_ledger_accumulates_runs():
    L = CostLedger()
    n, p = 5, 7
    for _ in range(n):
        L.charge_bv(6, p)
    assert L.quantum_queries == n * p
    assert L.hadamard_gates == 13 * n * p
    assert L.qubits_peak == 7


def test_estimate_example():
    e = attack_cost_estimate(8, 8, 16, 1000, 1)
    assert e.universal_gates == 1017 * 128 == 130_176
    assert e.quantum_queries == 128
    assert e.hadamard_gates == 17 * 128
    assert e.gf2_ops == 16 * 8 * 64
    assert e.intersection_ops == 0
    assert e.as_dict()["total"] == e.total


def test_intersection_term():
    assert sort_intersection_ops(8, 1) == 0
    assert sort_intersection_ops(8, 2) == 16
    assert sort_intersection_ops(8, 5) == 8 * 5 * 3
    assert attack_cost_estimate(8, 8, 16, 10, 4).intersection_ops == 64


def test_estimate_monotone():
    base = dict(k=6, n=6, p=8, gate_cost=50, t=4)
    ref = attack_cost_estimate(**base).total
    for name in base:
        bigger = dict(base, **{name: base[name] * 2})
        assert attack_cost_estimate(**bigger).total >= ref
    with pytest.raises(ValueError):
        attack_cost_estimate(0, 8, 8, 1, 1)
    with pytest.raises(ValueError):
        attack_cost_estimate(8, 8, 8, -1, 1)


@pytest.mark.parametrize("E", [toy_em(8, seed=1), toy_spn(3)], ids=["em", "spn"])
def test_ledger_matches_estimate(E):
    for t in range(5):
        O = RelatedKeyOracle(E, 0x5A + t)
        rep = recover_key(O, t, AttackConfig(p=16), RngStream(t))
        est = attack_cost_estimate(E.k, E.n, rep.p_used, E.gate_cost, rep.t)
        assert rep.ledger["quantum_queries"] == est.quantum_queries
        assert rep.ledger["hadamard_gates"] == est.hadamard_gates
        assert rep.ledger["intersection_ops"] == est.intersection_ops
        assert rep.ledger["gf2_ops"] == est.gf2_ops
        assert O.ledger.universal_gates(E.gate_cost) == est.universal_gates


def test_merge_associative_commutative():
    ledgers = []
    for i in range(3):
        L = CostLedger()
        L.charge_bv(4 + i, 3 + i)
        L.charge_classical(i)
        L.charge_elimination(10 * i, 4)
        L.charge_intersection(2, i + 1)
        ledgers.append(L)
    a, b, c = ledgers
    assert a.merge(b).merge(c).as_dict() == a.merge(b.merge(c)).as_dict()
    for x, y in itertools.permutations(ledgers, 2):
        assert x.merge(y).as_dict() == y.merge(x).as_dict()
    assert a.merge(b).qubits_peak == max(a.qubits_peak, b.qubits_peak)


def test_ledger_thread_safe_and_copyable():
    L = CostLedger()

    def work():
        for _ in range(1000):
            L.charge_bv(3)
            L.charge_classical()

    threads = [threading.Thread(target=work) for _ in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert L.quantum_queries == 8000 and L.classical_queries == 8000
    d = copy.deepcopy(L)
    assert d.as_dict() == L.as_dict() and set(d.as_dict()) == set(FIELDS)
