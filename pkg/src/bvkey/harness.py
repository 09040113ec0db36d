"""Seeded batch experiments: configs, per-trial runs, summaries and sweeps.

Randomness flows from one master seed. Trial ``t`` owns the stream
``RngStream(seed, (t,))``; its ``child(0)`` draws the secret key and
plaintext, ``child(1, j)`` feeds BV sampling of component ``j`` and
``child(2)`` the verification plaintexts. Trials never share a stream, so
the worker count cannot change any result.
"""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from fractions import Fraction
from typing import Any, Mapping

import numpy as np

from . import attack as atk
from .boolfn import (VectorFunction, delta_f, vector_linear_structures, walsh_matrix,
                     sigma_close_structures)
from .cipher import BlockCipher, CipherConfigError, cipher_from_config, derived_f
from .costmodel import CostLedger
from .gf2 import EnumerationCapError
from .qoracle import RelatedKeyOracle, RngStream

SCHEMA_VERSION = 1
MODES = ("recover-key", "recover-key-g", "find-struct", "analyze")
MAX_SWEEP_WORK = 50_000_000


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    cipher: dict[str, Any]
    mode: str = "recover-key"
    attack: dict[str, Any] = field(default_factory=dict)
    trials: int = 1
    seed: int = 0
    plaintext: int | None = None
    secret: int | None = None
    allow_zero_key: bool = False
    sigmas: list[str] = field(default_factory=lambda: ["1/4", "1/16"])
    grid: dict[str, list] = field(default_factory=dict)

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "ExperimentConfig":
        doc = dict(doc)
        doc.pop("schema_version", None)
        names = {f.name for f in fields(cls)}
        extra = set(doc) - names
        if extra:
            raise ConfigError(f"unknown config fields: {sorted(extra)}")
        if "cipher" not in doc:
            raise ConfigError("config needs a 'cipher' section")
        cfg = cls(**doc)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not isinstance(self.trials, int) or self.trials < 0:
            raise ConfigError("trials must be a non-negative integer")
        if not isinstance(self.seed, int) or self.seed < 0 or self.seed >= 1 << 64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        try:
            self.attack_config()
            self.build_cipher()
        except (TypeError, ValueError) as e:
            raise ConfigError(str(e)) from None
        unknown = set(self.grid) - {"p", "n", "family"}
        if unknown:
            raise ConfigError(f"unknown grid axes: {sorted(unknown)}")

    def attack_config(self) -> atk.AttackConfig:
        return atk.AttackConfig(**self.attack)

    def build_cipher(self) -> BlockCipher:
        try:
            return cipher_from_config(self.cipher)
        except CipherConfigError as e:
            raise ConfigError(f"cipher: {e}") from None

    def as_dict(self) -> dict[str, Any]:
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d["schema_version"] = SCHEMA_VERSION
        return d


def load_config(path) -> ExperimentConfig:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read config {path}: {e}") from None
    return ExperimentConfig.from_dict(doc)


# -- trials ---------------------------------------------------------------


def _draw_instance(cfg: ExperimentConfig, E: BlockCipher, stream: RngStream) -> tuple[int, int]:
    gen = stream.child(0).generator()
    low = 0 if cfg.allow_zero_key else 1
    s = int(gen.integers(low, 1 << E.k)) if cfg.secret is None else int(cfg.secret)
    m = int(gen.integers(0, 1 << E.n)) if cfg.plaintext is None else int(cfg.plaintext)
    return s, m


def run_trial(cfg: ExperimentConfig, E: BlockCipher, trial: int, timing: bool = False) -> dict[str, Any]:
    stream = RngStream(cfg.seed, (trial,))
    s, m = _draw_instance(cfg, E, stream)
    acfg = cfg.attack_config()
    oracle = RelatedKeyOracle(E, s, CostLedger())
    if cfg.mode == "find-struct":
        return _find_struct_trial(E, oracle, s, m, acfg, stream, trial)
    fn = atk.recover_key if cfg.mode == "recover-key" else atk.recover_key_gvariant
    report = fn(oracle, m, acfg, stream)
    d = report.to_dict(timing=timing)
    in_cands = bool(np.any(report.candidates == s)) if report.status != "cap_exceeded" else None
    d.update(trial=trial, secret=s, correct=report.key == s,
             wrong_key=report.status == "success" and report.key != s,
             secret_in_candidates=in_cands,
             degenerate=report.candidate_count == 1 << E.k)
    return d


def _find_struct_trial(E, oracle, s, m, acfg, stream, trial):
    F = oracle.bound_f(m)
    base = {"trial": trial, "secret": s, "plaintext": m, "seed_path": [stream.master, *stream.path],
            "config": acfg.as_dict()}
    try:
        res = atk.find_struct(F, acfg, stream.child(1))
    except EnumerationCapError as e:
        base.update(status="cap_exceeded", cap_dim=e.dim, component_ranks=e.ranks,
                    ledger=oracle.ledger.as_dict())
        return base
    truth = vector_linear_structures(derived_f(E, s, m)).pairs()
    found = res.pairs()
    base.update(status="success", candidate_count=len(res), t=res.t,
                component_sizes=[list(x) for x in res.component_sizes],
                component_ranks=res.component_ranks,
                structures=len(truth), missed=len(truth - found),
                non_structures=len(found - truth), secret_in_candidates=(s, 0) in found,
                ledger=oracle.ledger.as_dict())
    return base


def run_batch(cfg: ExperimentConfig, threads: int = 1, timing: bool = False) -> list[dict[str, Any]]:
    """All trials in index order; ``timing`` adds per-trial wall times (not reproducible)."""
    E = cfg.build_cipher()
    if threads <= 1:
        return [run_trial(cfg, E, t, timing) for t in range(cfg.trials)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda t: run_trial(cfg, E, t, timing), range(cfg.trials)))


def summarize(reports: list[dict[str, Any]], z: float = 1.96) -> dict[str, Any]:
    n = len(reports)
    status = [r["status"] for r in reports]
    # find-struct trials have no key to check; count completed runs
    ok = sum(1 for r in reports if r.get("correct", r["status"] == "success"))
    lo, hi = atk.wilson_interval(ok, n, z) if n else (0.0, 1.0)
    sizes = [r["candidate_count"] for r in reports
             if "candidate_count" in r and r["status"] != "cap_exceeded"]
    ts = [r["t"] for r in reports if r.get("status") != "cap_exceeded" and "t" in r]
    ledger = CostLedger()
    for r in reports:
        ledger = ledger.merge(CostLedger(**r["ledger"]))
    non_capped = [r for r in reports if r["status"] != "cap_exceeded"]
    return {
        "trials": n,
        "successes": ok,
        "success_rate": ok / n if n else None,
        "wilson_z": z,
        "wilson_interval": [lo, hi],
        "ambiguous": status.count("ambiguous"),
        "cap_exceeded": status.count("cap_exceeded"),
        "wrong_keys": sum(1 for r in reports if r.get("wrong_key")),
        "secret_in_candidates_rate": (sum(1 for r in non_capped if r.get("secret_in_candidates"))
                                      / len(non_capped)) if non_capped else None,
        "candidate_count": _dist(sizes),
        "t": _dist(ts),
        "ledger_totals": ledger.as_dict(),
    }


def _dist(values: list[int]) -> dict[str, Any]:
    if not values:
        return {"count": 0, "mean": None, "median": None, "max": None, "histogram": {}}
    hist: dict[str, int] = {}
    for v in sorted(values):
        hist[str(v)] = hist.get(str(v), 0) + 1
    return {"count": len(values), "mean": float(np.mean(values)), "median": float(np.median(values)),
            "max": int(max(values)), "histogram": hist}


def batch_document(cfg: ExperimentConfig, reports: list[dict[str, Any]]) -> dict[str, Any]:
    return {"schema_version": SCHEMA_VERSION, "kind": "batch", "mode": cfg.mode,
            "config": cfg.as_dict(), "trials": reports, "summary": summarize(reports)}


def dumps(doc: Any) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


TRIAL_CSV_COLUMNS = ("trial", "status", "secret", "key", "correct", "candidate_count", "t", "p_used")


def trials_csv(reports: list[dict[str, Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("schema_version",) + TRIAL_CSV_COLUMNS)
    for r in reports:
        w.writerow((SCHEMA_VERSION,) + tuple("" if r.get(c) is None else r.get(c) for c in TRIAL_CSV_COLUMNS))
    return buf.getvalue()


# -- analysis -------------------------------------------------------------


def _frac(x: Fraction) -> dict[str, Any]:
    return {"exact": f"{x.numerator}/{x.denominator}", "value": float(x)}


def analyze_function(F: VectorFunction, sigmas=("1/4", "1/16"), max_listed: int = 64) -> dict[str, Any]:
    """Spectrum, structure and bias summary of a vector function."""
    spectra = walsh_matrix(F)
    size = 1 << F.k
    comps = []
    deltas = []
    for j in range(F.n):
        f = F.component(j)
        c = spectra[:, j]
        d = delta_f(f)
        deltas.append(d)
        close = {}
        for sg in sigmas:
            close[str(sg)] = len({a for a, _, _ in sigma_close_structures(f, Fraction(sg))})
        comps.append({
            "component": j,
            "support_size": int(np.count_nonzero(c)),
            "max_abs_coeff": int(np.abs(c).max()),
            "parseval_sum": int(np.sum(c.astype(object) ** 2)),
            "parseval_ok": int(np.sum(c.astype(object) ** 2)) == 4**F.k,
            "delta": _frac(d),
            "sigma_close_counts": close,
        })
    U = vector_linear_structures(F)
    classes = {str(alpha): {"count": int(arr.size), "vectors": [int(a) for a in arr[:max_listed]]}
               for alpha, arr in sorted(U.classes.items())}
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "analysis",
        "k": F.k,
        "n": F.n,
        "constant": bool(np.all(F.table == F.table[0])),
        "parseval_expected": 4**F.k,
        "components": comps,
        "structures": {"total": len(U), "by_alpha": classes},
        "delta_F": _frac(max(deltas)),
        "structure_fraction": len(U) / size,
    }


# -- sweeps ---------------------------------------------------------------


SWEEP_COLUMNS = ("schema_version", "family", "k", "n", "p", "trials", "success_rate", "wilson_lo",
                 "wilson_hi", "mean_candidates", "median_candidates", "mean_t", "max_t",
                 "wrong_keys", "ambiguous", "cap_exceeded", "quantum_queries_per_trial")


def sweep_points(cfg: ExperimentConfig) -> list[ExperimentConfig]:
    base = dict(cfg.cipher)
    ps = cfg.grid.get("p", [cfg.attack_config().p])
    ns = cfg.grid.get("n", [base.get("n", base.get("k"))])
    fams = cfg.grid.get("family", [base["family"]])
    out = []
    for fam in fams:
        for n in ns:
            for p in ps:
                cipher = {**base, "family": fam, "n": n, "k": n}
                if fam == "toy_spn":
                    cipher.setdefault("rounds", 3)
                else:
                    cipher.pop("rounds", None)
                    cipher.pop("sbox_hex", None)
                    cipher.pop("permute", None)
                if fam != "toy_em":
                    cipher.pop("perm", None)
                if fam in ("toy_em", "random"):
                    cipher.setdefault("seed", cfg.seed)
                attack = {**cfg.attack, "p": int(p)}
                pt = ExperimentConfig(cipher=cipher, mode=cfg.mode if cfg.mode != "analyze" else "recover-key",
                                      attack=attack, trials=cfg.trials, seed=cfg.seed,
                                      plaintext=cfg.plaintext, secret=cfg.secret,
                                      allow_zero_key=cfg.allow_zero_key)
                pt.validate()
                out.append(pt)
    return out


def sweep_work(points: list[ExperimentConfig]) -> int:
    return sum(pt.trials * int(pt.cipher["n"]) * pt.attack_config().p for pt in points)


def run_sweep(cfg: ExperimentConfig, threads: int = 1, max_work: int = MAX_SWEEP_WORK) -> list[dict[str, Any]]:
    points = sweep_points(cfg)
    work = sweep_work(points)
    if work > max_work:
        raise ConfigError(f"sweep needs about {work:,} BV runs (limit {max_work:,}); shrink the grid")
    rows = []
    for pt in points:
        reports = run_batch(pt, threads)
        summ = summarize(reports)
        E = pt.build_cipher()
        q = summ["ledger_totals"]["quantum_queries"]
        rows.append({
            "schema_version": SCHEMA_VERSION, "family": pt.cipher["family"], "k": E.k, "n": E.n,
            "p": pt.attack_config().p, "trials": summ["trials"], "success_rate": summ["success_rate"],
            "wilson_lo": summ["wilson_interval"][0], "wilson_hi": summ["wilson_interval"][1],
            "mean_candidates": summ["candidate_count"]["mean"],
            "median_candidates": summ["candidate_count"]["median"],
            "mean_t": summ["t"]["mean"], "max_t": summ["t"]["max"],
            "wrong_keys": summ["wrong_keys"], "ambiguous": summ["ambiguous"],
            "cap_exceeded": summ["cap_exceeded"],
            "quantum_queries_per_trial": q / summ["trials"] if summ["trials"] else None,
        })
    return rows


def sweep_csv(rows: list[dict[str, Any]]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({c: ("" if r[c] is None else (repr(r[c]) if isinstance(r[c], float) else r[c]))
                    for c in SWEEP_COLUMNS})
    return buf.getvalue()


def exit_code(reports: list[dict[str, Any]]) -> int:
    status = {r.get("status") for r in reports}
    if "cap_exceeded" in status:
        return 3
    if "ambiguous" in status:
        return 1
    return 0


def load_schema(name: str) -> dict[str, Any]:
    """Shipped JSON schema: ``"batch_report"`` or ``"analysis_report"``."""
    from importlib.resources import files

    return json.loads(files("bvkey").joinpath("schemas", f"{name}.schema.json").read_text())
