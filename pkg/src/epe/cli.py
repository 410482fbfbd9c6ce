"""Command-line scenario runner.

``epe run scenario.json --out DIR`` executes the analyses listed in the
scenario and writes ``bundle.json``, ``weights.csv``, ``probabilities.csv``,
``decoherence.csv`` and ``report.txt``. ``epe demo NAME`` does the same for a
built-in scenario. Exit status: 0 success, 1 input error, 2 invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import json
import logging
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .classical import ClassicalEnsemble, classical_summary, table_comparison
from .decoherence import (branch_vectors, certify_medium_decoherence, compare_epe_dh,
                          decoherence_matrix, dh_probabilities, linear_positivity_check,
                          write_decoherence_rows)
from .errors import (EnumerationCapError, EPEError, InvariantViolation, NotRecordedError,
                     ScenarioError, TypicalityUndefinedError)
from .hilbert import (ConfigBasis, Hamiltonian, ProjectorFamily, Propagator, build_propagator,
                      total_evolution)
from .histories import ChainSpec, build_history_set, class_operators_pathsum, coarse_grain
from .paths import FinePath, TimeGrid, check_cap, sample_surrogate_real_history, weight_table
from .records import (NonDecoherentWarning, PointerModel, attach_pointer, conditional_probability,
                      conditional_probability_from_state, construct_records, diagonal_records,
                      verify_records)
from .scenario import Scenario, builtin, builtin_scenarios, load_scenario, parse_scenario
from .typicality import (adversarial_coarse_graining, classical_counterpart_search,
                         typicality_report)

log = logging.getLogger("epe")

NORM_CHECK = 1e-9
IDENTITY_CHECK = 1e-10


# output formatting

def _round(x: float) -> float | str:
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    r = float(f"{x:.12g}")
    return 0.0 if r == 0 else r


def to_json(obj):
    """Recursively convert to JSON-safe data with 12 significant digits."""
    if isinstance(obj, dict):
        return {str(k): to_json(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_json(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_json(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _round(float(obj))
    if isinstance(obj, complex):
        return [_round(obj.real), _round(obj.imag)]
    return obj


def _g(x) -> str:
    if isinstance(x, str):
        return x
    return f"{x:.6g}"


def _label(lab) -> str:
    return "-".join(str(a) for a in lab) if isinstance(lab, tuple) else str(lab)


# running

class _RowSink(list):
    """List that accepts ``writerow`` so csv helpers can fill it."""

    def writerow(self, row):
        self.append(row)


class Run:
    """Mutable state shared by the analyses of one scenario run."""

    def __init__(self, sc: Scenario, tolerances: dict, seed: int):
        self.sc = sc
        self.tol = tolerances
        self.seed = seed
        sysm = sc.system
        self.U = sysm.propagator
        self.grid = TimeGrid(sysm.n_steps, sysm.dt, sysm.basis)
        self.results: dict = {}
        self.report: list[str] = []
        self.weight_rows = None
        self.prob_rows: list[list] = []
        self.dec_rows = _RowSink()
        self._table = None
        self._sets: dict = {}
        self._real = None
        self._setup()

    def _setup(self):
        sc, sysm = self.sc, self.sc.system
        rec = sc.records
        self.pointer = rec.get("kind") == "pointer"
        if self.pointer:
            self.setups = {}
            for name, chain in sc.chains.items():
                model = PointerModel.build(sysm.basis, rec["trigger_cells"],
                                           rec.get("enabled", True))
                self.setups[name] = attach_pointer(model, sysm.psi0, self.U, sysm.n_steps,
                                                   rec["trigger_step"], chain)

    def system_set(self, name):
        """History set on the bare system (no pointer) and its state."""
        key = ("sys", name)
        if key not in self._sets:
            chain = self.sc.chains[name]
            self._sets[key] = build_history_set(chain, self.U, self.grid.n_steps)
        return self._sets[key], self.sc.system.psi0

    def history_set(self, name):
        """History set the scenario's records request applies to."""
        if self.pointer:
            s = self.setups[name]
            return s.hset, s.psi
        return self.system_set(name)

    def table(self):
        if self._table is None:
            self._table = weight_table(self.sc.system.psi0, self.U, self.grid,
                                       max_paths=int(self.tol["max_paths"]))
        return self._table

    def real_path(self) -> FinePath:
        if self._real is None:
            if self.sc.real_path is not None:
                self._real = FinePath(self.sc.real_path)
            else:
                self._real = sample_surrogate_real_history(self.sc.system.psi0, self.U,
                                                           self.grid, self.seed)
        return self._real

    def line(self, text: str = ""):
        self.report.append(text)


def _weights(run: Run) -> dict:
    table = run.table()
    w = table.weights
    total = table.total
    i_min = int(np.argmin(w))
    out = {
        "n_paths": int(w.size),
        "total": total,
        "normalization_defect": abs(total - 1.0),
        "min_weight": float(w.min()),
        "max_weight": float(w.max()),
        "n_negative": int((w < -1e-12).sum()),
        "argmin_path": table.sites()[i_min].tolist(),
    }
    run.weight_rows = table
    run.line("weights")
    run.line(f"  paths {out['n_paths']}  total {_g(total)}  min {_g(out['min_weight'])} "
             f"at {out['argmin_path']}  negative {out['n_negative']}")
    if out["normalization_defect"] > NORM_CHECK:
        raise InvariantViolation(f"path weights sum to {total:.15g}")
    return out


def _propagators(hset):
    basis = ConfigBasis(hset.dim)
    return [Propagator.from_unitary(m, basis) for m in hset.steps]


def _marginals(hset, psi, chain: ChainSpec, n_steps) -> list[dict]:
    if not chain.branch_independent or len(chain.times) < 2:
        return []
    p_dh = dh_probabilities(branch_vectors(hset, psi))
    res = []
    for j, (k, fam) in enumerate(zip(chain.times, chain.families)):
        direct = build_history_set(ChainSpec((k,), (fam,)), _propagators(hset), n_steps)
        summed = coarse_grain(hset, lambda lab, j=j: lab[j])
        p_direct = direct.probabilities(psi)
        p_sum = summed.probabilities(psi)
        no_int = np.array([sum(p_dh[hset.index(m)] for m in summed.members[c])
                           for c in summed.labels])
        res.append({
            "time": k,
            "p_direct": p_direct.tolist(),
            "p_summed": p_sum.tolist(),
            "p_no_interference": no_int.tolist(),
            "sum_rule_dev": float(np.max(np.abs(p_direct - p_sum))),
            "operator_sum_rule_dev": float(np.max(np.abs(direct.operators - summed.operators))),
            "max_interference": float(np.max(np.abs(p_direct - no_int))),
        })
    return res


def _probabilities(run: Run) -> dict:
    out = {}
    run.line("probabilities")
    for name, chain in run.sc.chains.items():
        hset, psi = run.history_set(name)
        p = hset.probabilities(psi)
        p_dh = dh_probabilities(branch_vectors(hset, psi))
        total = float(math.fsum(p))
        entry = {
            "labels": [list(lab) for lab in hset.labels],
            "p_epe": p.tolist(),
            "p_dh": p_dh.tolist(),
            "sum": total,
            "completeness_defect": hset.completeness_defect(),
            "all_in_unit_interval": bool(p.min() >= -1e-12 and p.max() <= 1 + 1e-12),
        }
        pathsum_dev = None
        try:
            check_cap(hset.dim ** (hset.n_steps + 1), int(run.tol["max_paths"]))
            ops = class_operators_pathsum(hset.chain, _propagators(hset), hset.n_steps,
                                          max_paths=int(run.tol["max_paths"]))
            W_dag = total_evolution(hset.steps).conj().T
            pathsum_dev = max(float(np.max(np.abs(W_dag @ ops[lab].matrix - C)))
                              for lab, C in zip(hset.labels, hset.operators))
        except EnumerationCapError:
            pass
        entry["chain_vs_pathsum_dev"] = pathsum_dev
        margs = _marginals(hset, psi, hset.chain, hset.n_steps)
        entry["marginals"] = margs
        dev = max([abs(total - 1.0)] + [m["sum_rule_dev"] for m in margs]
                  + [m["operator_sum_rule_dev"] for m in margs])
        entry["sum_rule_dev"] = dev
        out[name] = entry
        for lab, pe, pd in zip(hset.labels, p, p_dh):
            run.prob_rows.append([name, "joint", _label(lab), pe, pd, total, dev])
        for m in margs:
            for a, (pe, pd) in enumerate(zip(m["p_direct"], m["p_no_interference"])):
                run.prob_rows.append([name, f"t{m['time']}", str(a), pe, pd,
                                      math.fsum(m["p_direct"]), m["sum_rule_dev"]])
        run.line(f"  chain {name}: {len(p)} classes  sum {_g(total)}  min p {_g(float(p.min()))}"
                 f"  sum-rule dev {_g(dev)}"
                 + ("" if pathsum_dev is None else f"  pathsum dev {_g(pathsum_dev)}"))
        for lab, pe, pd in zip(hset.labels, p, p_dh):
            run.line(f"    {_label(lab):>10}  p_epe {_g(float(pe)):>12}  p_dh {_g(float(pd)):>12}")
        for m in margs:
            run.line(f"    marginal at t{m['time']}: max interference {_g(m['max_interference'])}")
        if dev > IDENTITY_CHECK or entry["completeness_defect"] > IDENTITY_CHECK:
            raise InvariantViolation(f"sum rules fail on chain {name!r} (dev {dev:.3e})")
        if pathsum_dev is not None and pathsum_dev > IDENTITY_CHECK:
            raise InvariantViolation(f"chain and path-sum class operators differ by {pathsum_dev:.3e}")
    return out


def _decoherence(run: Run) -> dict:
    out = {}
    eps = float(run.tol["eps"])
    run.line("decoherence")
    for name in run.sc.chains:
        hset, psi = run.history_set(name)
        D = decoherence_matrix(branch_vectors(hset, psi), eps)
        cert = certify_medium_decoherence(D, eps)
        pos = linear_positivity_check(hset, psi)
        comp = compare_epe_dh(hset, psi)
        violations = [c for c in comp if not c.within_bound]
        by_step = _offdiag_by_step(D)
        out[name] = {
            **cert.as_dict(),
            "certified": cert.decoherent,
            "linear_positivity": pos.all_nonneg,
            "min_p_epe": pos.min_p,
            "max_epe_dh_difference": max(c.difference for c in comp),
            "bound_violations": len(violations),
            "max_offdiag_by_step": by_step,
        }
        write_decoherence_rows(run.dec_rows, D, name)
        run.line(f"  chain {name}: {'certified' if cert.decoherent else 'not certified'} at eps "
                 f"{_g(eps)}  max |D offdiag| {_g(cert.max_offdiag)}  linear positivity "
                 f"{'holds' if pos.all_nonneg else 'fails'}")
        if violations:
            raise InvariantViolation(f"|p_epe - p_dh| exceeds the interference bound on {name!r}")
    return out


def _offdiag_by_step(D) -> list[float]:
    """Per chain step, max ``|D(a, b)|`` over labels differing only at that step."""
    labels = D.labels
    if not labels or not isinstance(labels[0], tuple):
        return []
    off = D.off_diagonal()
    out = []
    for j in range(len(labels[0])):
        worst = 0.0
        for i, a in enumerate(labels):
            for k, b in enumerate(labels):
                if len(a) == len(b) and a[j] != b[j] and a[:j] + a[j + 1:] == b[:j] + b[j + 1:]:
                    worst = max(worst, float(off[i, k]))
        out.append(worst)
    return out


def _records(run: Run) -> dict:
    out = {}
    tol = float(run.tol["tol"])
    run.line("records")
    for name in run.sc.chains:
        hset, psi = run.history_set(name)
        branches = branch_vectors(hset, psi)
        checks = {"unrestricted": verify_records(construct_records(branches), hset, psi, tol)}
        if run.pointer:
            s = run.setups[name]
            R = diagonal_records(branches, s.record_family, hset.steps)
            checks["pointer_diagonal"] = verify_records(R, hset, psi, tol)
        out[name] = {k: v.as_dict() for k, v in checks.items()}
        for k, v in checks.items():
            run.line(f"  chain {name} [{k}]: {'verified' if v.verified else 'not verified'} at "
                     f"tol {_g(tol)}  max ||R psi - C psi|| {_g(v.max_fidelity)}")
            if v.verified and not (v.decoherence_ok and v.positivity_ok):
                raise InvariantViolation(f"verified records on {name!r} violate their bounds")
    return out


def _conditional(run: Run) -> dict:
    block = run.sc.section("conditional")
    if not block:
        raise ScenarioError("conditional analysis needs a 'conditional' block", "/conditional")
    name = block["chain"]
    past = tuple(block.get("past", ()))
    futures = block.get("futures")
    hset, psi = run.history_set(name)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", NonDecoherentWarning)
        ratio = conditional_probability(futures, past, hset, psi, float(run.tol["eps"]))
    out = {"chain": name, "past": list(past), "futures": futures, "ratio_form": ratio,
           "decoherent": not any(issubclass(w.category, NonDecoherentWarning) for w in caught)}
    try:
        state = conditional_probability_from_state(futures, past, hset, psi, float(run.tol["tol"]))
        out["state_form"] = state
        out["difference"] = abs(state - ratio)
    except NotRecordedError as exc:
        out["state_form"] = None
        out["state_form_unavailable"] = str(exc)
    run.line("conditional")
    run.line(f"  chain {name}, past {list(past)}: ratio form {_g(ratio)}  state form "
             f"{_g(out['state_form']) if out['state_form'] is not None else 'n/a (not recorded)'}")
    return out


def _real_label(chain: ChainSpec, path: FinePath) -> tuple:
    lab = []
    for j, k in enumerate(chain.times):
        fam = chain.family(tuple(lab))
        lab.append(int(fam.cell_of[path[k]]))
    return tuple(lab)


def _typicality(run: Run) -> dict:
    path = run.real_path()
    theta = float(run.tol["theta"])
    out = {"real_path": list(path.sites), "sampled": run.sc.real_path is None, "chains": {}}
    run.line("typicality")
    run.line(f"  real path {list(path.sites)}" + ("  (sampled)" if out["sampled"] else ""))
    for name, chain in run.sc.chains.items():
        hset, psi = run.system_set(name)
        lab = _real_label(chain, path)
        p = hset.probabilities(psi)
        try:
            rep = typicality_report(p, hset.index(lab), theta).as_dict()
            entry = {"real_class": list(lab), "defined": True, **rep}
            run.line(f"  chain {name}: real class {list(lab)}  surprisal {_g(rep['surprisal'])}  "
                     f"entropy {_g(rep['entropy'])}  {'typical' if rep['typical'] else 'atypical'}")
        except TypicalityUndefinedError as exc:
            entry = {"real_class": list(lab), "defined": False, "reason": str(exc)}
            run.line(f"  chain {name}: undefined ({exc})")
        out["chains"][name] = entry
    return out


def _adversarial(run: Run) -> dict:
    block = run.sc.section("adversarial")
    multi = bool(block.get("multi_time", False))
    budget = int(run.tol["budget"])
    theta = float(run.tol["theta"])
    table = run.table()
    sc = run.sc.system

    def search(path):
        return adversarial_coarse_graining(path, run.grid, sc.psi0, run.U, budget=budget,
                                           theta=theta, multi_time=multi, table=table)

    path = run.real_path()
    res = search(path)
    out = {"real_path": list(path.sites), "multi_time": multi, **res.as_dict()}
    run.line("adversarial")
    part = ", ".join(f"t{k}: {list(c)}" for k, c in res.best.cells)
    run.line(f"  real path {list(path.sites)}  witness partition {{{part}}} vs rest  "
             f"p(r) {_g(res.p_real)}" + ("  (zero witness)" if res.zero_witness else ""))
    if block.get("all_paths") and run.grid.n_paths <= 4096:
        zero = [list(p) for p in table.sites() if search(FinePath(tuple(int(s) for s in p))).zero_witness]
        out["paths_with_zero_witness"] = len(zero)
        out["n_paths"] = run.grid.n_paths
        run.line(f"  paths with a zero witness: {len(zero)} of {run.grid.n_paths}")
    return out


def _table(run: Run) -> dict:
    block = run.sc.section("classical")
    if not block:
        raise ScenarioError("table analysis needs a 'classical' block", "/classical")
    try:
        ens = ClassicalEnsemble(int(block["phase_dim"]), block["dynamics"], block["rho0"],
                                int(block.get("n_steps", 1)))
        chain = [(int(c["time"]), c["cells"]) for c in block.get("chain", [])]
        csum = classical_summary(ens, chain, block.get("real_z0"))
    except (KeyError, ValueError, TypeError) as exc:
        raise ScenarioError(f"invalid classical block: {exc}", "/classical") from None
    table = run.table()
    qsum = {
        "n_paths": int(table.weights.size),
        "total_weight": table.total,
        "min_weight": float(table.weights.min()),
        "max_weight": float(table.weights.max()),
        "n_negative": int((table.weights < -1e-12).sum()),
        "real_history": list(run.real_path().sites),
    }
    if run.sc.chains:
        name = next(iter(run.sc.chains))
        hset, psi = run.system_set(name)
        qsum["coarse_labels"] = [list(lab) for lab in hset.labels]
        qsum["coarse_probabilities"] = hset.probabilities(psi).tolist()
    comp = table_comparison(qsum, csum)
    out = {"comparison": comp, "classical_summary": csum}
    if block.get("real_z0") is not None:
        adv = classical_counterpart_search(int(block["real_z0"]), block["dynamics"], block["rho0"],
                                           int(run.tol["budget"]), float(run.tol["theta"]))
        out["classical_adversarial"] = adv.as_dict()
    run.line("ensemble table")
    for col in ("classical", "quantum"):
        c = comp[col]
        fd = c["fundamental_distribution"]
        run.line(f"  {col:>9}: min weight {_g(fd['min_weight'])}  negative "
                 f"{'yes' if fd['negative'] else 'no'}  total {_g(c['normalization'])}  "
                 f"settleable: {c['settleable_sets']}")
    if abs(csum["total_weight"] - 1) > 1e-12 or csum["min_weight"] < 0:
        raise InvariantViolation("classical weights are not a probability distribution")
    return out


def _chsh(run: Run) -> dict:
    block = run.sc.section("chsh")
    if run.sc.system.basis.dim != 4:
        raise ScenarioError("chsh analysis needs a two-qubit system", "/system/dim")
    a_set = [float(x) for x in block.get("a", [0.0, math.pi / 2])]
    b_set = [float(x) for x in block.get("b", [math.pi / 4, 3 * math.pi / 4])]
    Y = np.array([[0, -1j], [1j, 0]])
    I2 = np.eye(2)
    basis = run.sc.system.basis
    psi = run.sc.system.psi0
    fine = ProjectorFamily.fine(basis)
    grid = TimeGrid(1, 1.0, basis)
    chain = ChainSpec((1,), (fine,))
    settings = []
    E = np.zeros((2, 2))
    for i, a in enumerate(a_set):
        for j, b in enumerate(b_set):
            # rotating by -a, -b before a Z-basis readout measures along a, b
            H = Hamiltonian(basis, -a / 2 * np.kron(Y, I2) - b / 2 * np.kron(I2, Y))
            U = build_propagator(H, 1.0)
            hset = build_history_set(chain, U, 1)
            p = hset.probabilities(psi)
            E[i, j] = float(sum((-1) ** ((x >> 1) + (x & 1)) * p[x] for x in range(4)))
            w = weight_table(psi, U, grid).weights
            settings.append({"a": a, "b": b, "joint": p.tolist(), "E": E[i, j],
                             "min_path_weight": float(w.min()),
                             "n_negative_paths": int((w < -1e-12).sum())})
    S = float(E[0, 0] - E[0, 1] + E[1, 0] + E[1, 1])
    min_w = min(s["min_path_weight"] for s in settings)
    out = {"settings": settings, "S": S, "abs_S": abs(S), "classical_bound": 2.0,
           "tsirelson_bound": 2 * math.sqrt(2), "min_path_weight": min_w,
           "negative_path_weight": min_w < -1e-12}
    run.line("chsh")
    for s in settings:
        run.line(f"  a {_g(s['a'])}  b {_g(s['b'])}  E {_g(s['E'])}  min path weight "
                 f"{_g(s['min_path_weight'])}")
    run.line(f"  S {_g(S)}  |S| {_g(abs(S))}  (local bound 2, quantum bound {_g(2 * math.sqrt(2))})")
    return out


ANALYSIS_FUNCS = {
    "weights": _weights,
    "probabilities": _probabilities,
    "decoherence": _decoherence,
    "records": _records,
    "conditional": _conditional,
    "typicality": _typicality,
    "adversarial": _adversarial,
    "table": _table,
    "chsh": _chsh,
}


def run_scenario(sc: Scenario, out_dir=None, overrides: dict | None = None,
                 timestamp: str | None = None) -> dict:
    """Run every analysis of ``sc`` in order; write outputs when ``out_dir`` is given.

    Returns the JSON-ready bundle. ``overrides`` may set ``eps``, ``tol``,
    ``theta``, ``max_paths``, ``budget`` and ``seed``.
    """
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    seed = int(overrides.pop("seed", sc.seed))
    tol = {**sc.tolerances, **overrides}
    run = Run(sc, tol, seed)
    for name in sc.analyses:
        log.info("running %s", name)
        run.results[name] = ANALYSIS_FUNCS[name](run)
    if timestamp is None:
        timestamp = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    bundle = to_json({
        "schema": 1,
        "scenario": sc.name,
        "provenance": {
            "artifact_version": __version__,
            "scenario_sha256": sc.digest,
            "seed": seed,
            "tolerances": tol,
            "timestamp": timestamp,
        },
        "results": run.results,
    })
    if out_dir is not None:
        _write_outputs(run, bundle, Path(out_dir))
    return bundle


def bundle_text(bundle: dict) -> str:
    return json.dumps(bundle, indent=2) + "\n"


def _write_outputs(run: Run, bundle: dict, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / "bundle.json").write_text(bundle_text(bundle))
    if run.weight_rows is not None:
        run.weight_rows.write_csv(out / "weights.csv")
    else:
        n = run.grid.n_steps
        (out / "weights.csv").write_text(
            ",".join([f"q{k}" for k in range(n + 1)] + ["re_amp", "im_amp", "weight"]) + "\n")
    with open(out / "probabilities.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["chain", "kind", "label", "p_epe", "p_dh", "sum", "sum_rule_dev"])
        for row in run.prob_rows:
            w.writerow(row[:3] + [f"{x:.12g}" for x in row[3:]])
    with open(out / "decoherence.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["chain", "label_a", "label_b", "re", "im"])
        for row in run.dec_rows:
            w.writerow(row)
    head = [f"scenario {run.sc.name}", f"seed {run.seed}", ""]
    (out / "report.txt").write_text("\n".join(head + run.report) + "\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=None, help="output directory (default: ./epe-out/NAME)")
    common.add_argument("--eps", type=float, help="medium-decoherence threshold")
    common.add_argument("--tol", type=float, help="record fidelity tolerance")
    common.add_argument("--theta", type=float, help="typicality threshold factor")
    common.add_argument("--seed", type=int, help="seed for the surrogate real history")
    common.add_argument("--max-paths", type=int, dest="max_paths", help="path enumeration cap")
    common.add_argument("--verbose", "-v", action="store_true")
    p = argparse.ArgumentParser(prog="epe", description="Extended-probability history analysis")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", parents=[common], help="run a scenario file")
    r.add_argument("file")
    d = sub.add_parser("demo", parents=[common], help="run a built-in scenario")
    d.add_argument("name", choices=builtin_scenarios())
    sub.add_parser("list", help="list built-in scenarios")
    s = sub.add_parser("show", help="print a built-in scenario as JSON")
    s.add_argument("name", choices=builtin_scenarios())
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list":
        for name in builtin_scenarios():
            print(f"{name:18} {builtin(name).get('description', '')}")
        return 0
    if args.command == "show":
        print(json.dumps(builtin(args.name), indent=2))
        return 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        sc = load_scenario(args.file) if args.command == "run" else parse_scenario(builtin(args.name))
        out = Path(args.out) if args.out else Path("epe-out") / sc.name
        overrides = {"eps": args.eps, "tol": args.tol, "theta": args.theta,
                     "max_paths": args.max_paths, "seed": args.seed}
        run_scenario(sc, out, overrides)
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 2
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except EPEError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(out / "report.txt")
    print((out / "report.txt").read_text(), end="")
    return 0


if __name__ == "__main__":
    sys.exit(main())
