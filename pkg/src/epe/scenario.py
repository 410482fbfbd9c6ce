"""Scenario files: JSON schema, validation and the built-in scenarios.

Complex numbers are ``[re, im]`` pairs. A scenario has exactly one
``system`` block; everything else refers to it::

    {
      "schema": 1,
      "name": "fixq2",
      "system": {"dim": 2, "hamiltonian": [[[0,0],[1,0]], [[1,0],[0,0]]],
                 "initial_state": [[1,0],[0,0]], "dt": 0.3927, "n_steps": 2},
      "chains": [{"name": "two-time",
                  "steps": [{"time": 1, "cells": [[0],[1]]},
                            {"time": 2, "cells": [[0],[1]]}]}],
      "records": {"kind": "trivial"},
      "analyses": ["weights", "probabilities", "decoherence"],
      "seed": 0,
      "tolerances": {"eps": 1e-8}
    }
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import EPEError, ScenarioError
from .hilbert import (ConfigBasis, Hamiltonian, ProjectorFamily, StateVector, build_propagator)
from .histories import ChainSpec

SCHEMA_VERSION = 1
ANALYSES = ("weights", "probabilities", "decoherence", "records", "conditional",
            "typicality", "adversarial", "table", "chsh")
DEFAULT_TOLERANCES = {"eps": 1e-8, "tol": 1e-6, "theta": 1.0, "max_paths": 2 ** 21,
                      "budget": 1000}


@dataclass(frozen=True, eq=False)
class System:
    basis: ConfigBasis
    hamiltonian: Hamiltonian
    psi0: StateVector
    dt: float
    n_steps: int

    @property
    def propagator(self):
        return build_propagator(self.hamiltonian, self.dt)


@dataclass(frozen=True, eq=False)
class Scenario:
    name: str
    system: System
    chains: dict[str, ChainSpec]
    records: dict
    analyses: tuple[str, ...]
    seed: int
    tolerances: dict
    raw: dict = field(repr=False)
    real_path: tuple[int, ...] | None = None

    @property
    def digest(self) -> str:
        canon = json.dumps(self.raw, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()

    def section(self, key: str) -> dict:
        return self.raw.get(key) or {}


def _where(loc: str, key) -> str:
    return f"{loc}/{key}"


def _require(obj: dict, key: str, loc: str):
    if not isinstance(obj, dict):
        raise ScenarioError("expected an object", loc)
    if key not in obj:
        raise ScenarioError(f"missing required field {key!r}", loc)
    return obj[key]


def _complex(entry, loc: str) -> complex:
    if (isinstance(entry, (list, tuple)) and len(entry) == 2
            and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in entry)):
        return complex(float(entry[0]), float(entry[1]))
    raise ScenarioError("complex entries must be [re, im] pairs of numbers", loc)


def parse_vector(data, n: int, loc: str) -> np.ndarray:
    if not isinstance(data, list) or len(data) != n:
        raise ScenarioError(f"expected a list of {n} [re, im] pairs", loc)
    return np.array([_complex(x, _where(loc, i)) for i, x in enumerate(data)])


def parse_matrix(data, n: int, loc: str) -> np.ndarray:
    if not isinstance(data, list) or len(data) != n:
        raise ScenarioError(f"expected {n} rows", loc)
    return np.stack([parse_vector(row, n, _where(loc, i)) for i, row in enumerate(data)])


def encode_vector(v) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(v, dtype=complex)]


def encode_matrix(m) -> list:
    return [encode_vector(row) for row in np.asarray(m, dtype=complex)]


def _int(value, loc: str, low: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ScenarioError("expected an integer", loc)
    if low is not None and value < low:
        raise ScenarioError(f"expected an integer >= {low}", loc)
    return value


def _family(cells, basis: ConfigBasis, loc: str) -> ProjectorFamily:
    if not isinstance(cells, list) or not all(isinstance(c, list) for c in cells):
        raise ScenarioError("cells must be a list of index lists", loc)
    try:
        return ProjectorFamily(basis, tuple(tuple(_int(i, loc) for i in c) for c in cells))
    except EPEError as exc:
        raise ScenarioError(str(exc), loc) from None


def parse_system(data: dict, loc: str = "/system") -> System:
    dim = _int(_require(data, "dim", loc), _where(loc, "dim"), 1)
    labels = data.get("labels")
    basis = ConfigBasis(dim, tuple(labels) if labels else None)
    H = parse_matrix(_require(data, "hamiltonian", loc), dim, _where(loc, "hamiltonian"))
    try:
        ham = Hamiltonian(basis, H)
    except EPEError as exc:
        raise ScenarioError(str(exc), _where(loc, "hamiltonian")) from None
    amps = parse_vector(_require(data, "initial_state", loc), dim, _where(loc, "initial_state"))
    nrm = float(np.linalg.norm(amps))
    if nrm == 0:
        raise ScenarioError("initial state is the zero vector", _where(loc, "initial_state"))
    if data.get("normalize_state", True):
        amps = amps / nrm
    elif abs(nrm - 1) > 1e-12:
        raise ScenarioError(f"initial state has norm {nrm:.15g}", _where(loc, "initial_state"))
    dt = _require(data, "dt", loc)
    if not isinstance(dt, (int, float)) or isinstance(dt, bool) or not math.isfinite(dt):
        raise ScenarioError("dt must be a finite number", _where(loc, "dt"))
    n = _int(_require(data, "n_steps", loc), _where(loc, "n_steps"), 1)
    return System(basis, ham, StateVector(basis, amps), float(dt), n)


def parse_chain(data: dict, basis: ConfigBasis, n_steps: int, loc: str) -> ChainSpec:
    steps = _require(data, "steps", loc)
    if not isinstance(steps, list) or not steps:
        raise ScenarioError("a chain needs a nonempty list of steps", _where(loc, "steps"))
    times, fams = [], []
    for i, st in enumerate(steps):
        sl = _where(_where(loc, "steps"), i)
        k = _int(_require(st, "time", sl), _where(sl, "time"))
        if not 1 <= k <= n_steps:
            raise ScenarioError(f"chain time {k} outside 1..{n_steps}", _where(sl, "time"))
        if times and k <= times[-1]:
            raise ScenarioError("chain times must be strictly increasing", _where(sl, "time"))
        times.append(k)
        fams.append(_family(_require(st, "cells", sl), basis, _where(sl, "cells")))
    branches = {}
    for i, br in enumerate(data.get("branches", [])):
        bl = _where(_where(loc, "branches"), i)
        prefix = tuple(_int(a, bl) for a in _require(br, "prefix", bl))
        if not 1 <= len(prefix) < len(times):
            raise ScenarioError(f"branch prefix {list(prefix)} selects no later step", bl)
        branches[prefix] = _family(_require(br, "cells", bl), basis, _where(bl, "cells"))
    try:
        chain = ChainSpec(tuple(times), tuple(fams), branches)
        for lab in branches:
            chain.check_label(lab + (0,) * (len(times) - len(lab)))
    except EPEError as exc:
        raise ScenarioError(str(exc), loc) from None
    return chain


def parse_scenario(data: dict) -> Scenario:
    if not isinstance(data, dict):
        raise ScenarioError("scenario must be a JSON object")
    schema = _require(data, "schema", "")
    if schema != SCHEMA_VERSION:
        raise ScenarioError(f"unsupported schema {schema!r}; expected {SCHEMA_VERSION}", "/schema")
    name = _require(data, "name", "")
    if not isinstance(name, str):
        raise ScenarioError("name must be a string", "/name")
    system = parse_system(_require(data, "system", ""))
    chains = {}
    for i, ch in enumerate(data.get("chains", [])):
        loc = f"/chains/{i}"
        cname = _require(ch, "name", loc)
        if cname in chains:
            raise ScenarioError(f"duplicate chain name {cname!r}", _where(loc, "name"))
        chains[cname] = parse_chain(ch, system.basis, system.n_steps, loc)
    records = data.get("records") or {"kind": "none"}
    kind = records.get("kind", "none")
    if kind not in ("none", "trivial", "pointer"):
        raise ScenarioError(f"unknown records kind {kind!r}", "/records/kind")
    if kind == "pointer":
        k = _int(_require(records, "trigger_step", "/records"), "/records/trigger_step", 0)
        if k > system.n_steps:
            raise ScenarioError(f"trigger step {k} beyond n_steps", "/records/trigger_step")
        _family_like = _require(records, "trigger_cells", "/records")
        if not isinstance(_family_like, list) or not _family_like:
            raise ScenarioError("trigger_cells must be a nonempty list", "/records/trigger_cells")
    analyses = data.get("analyses", [])
    if not isinstance(analyses, list):
        raise ScenarioError("analyses must be a list", "/analyses")
    for i, a in enumerate(analyses):
        if a not in ANALYSES:
            raise ScenarioError(f"unknown analysis {a!r}; choose from {list(ANALYSES)}",
                                f"/analyses/{i}")
    tol = dict(DEFAULT_TOLERANCES)
    for key, value in (data.get("tolerances") or {}).items():
        if key not in DEFAULT_TOLERANCES:
            raise ScenarioError(f"unknown tolerance {key!r}", f"/tolerances/{key}")
        tol[key] = value
    seed = _int(data.get("seed", 0), "/seed")
    real = data.get("real_path")
    if real is not None:
        if not isinstance(real, list) or len(real) != system.n_steps + 1:
            raise ScenarioError(f"real_path needs {system.n_steps + 1} sites", "/real_path")
        real = tuple(_int(s, f"/real_path/{i}") for i, s in enumerate(real))
        if any(not 0 <= s < system.basis.dim for s in real):
            raise ScenarioError("real_path site outside the basis", "/real_path")
    cond = data.get("conditional")
    if cond is not None and cond.get("chain") not in chains:
        raise ScenarioError(f"unknown chain {cond.get('chain')!r}", "/conditional/chain")
    return Scenario(name, system, chains, records, tuple(analyses), seed, tol, data, real)


def load_scenario(path) -> Scenario:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"invalid JSON: {exc}") from None
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario: {exc}") from None
    return parse_scenario(data)


# built-in scenarios

def _fixq2_system() -> dict:
    return {
        "dim": 2,
        "hamiltonian": encode_matrix([[0, 1], [1, 0]]),
        "initial_state": encode_vector([1, 0]),
        "dt": math.pi / 8,
        "n_steps": 2,
    }


def _fine(d: int) -> list:
    return [[i] for i in range(d)]


def fixq2() -> dict:
    return {
        "schema": 1,
        "name": "fixq2",
        "description": "qubit, U = exp(-i X pi/8), two steps from |0>: negative path weights",
        "system": _fixq2_system(),
        "chains": [
            {"name": "two-time", "steps": [{"time": 1, "cells": _fine(2)},
                                           {"time": 2, "cells": _fine(2)}]},
            {"name": "one-time", "steps": [{"time": 1, "cells": _fine(2)}]},
        ],
        "records": {"kind": "trivial"},
        "analyses": ["weights", "probabilities", "decoherence", "records", "conditional",
                     "typicality", "adversarial"],
        "conditional": {"chain": "one-time", "past": [1], "futures": None},
        "seed": 7,
    }


def _hopping(d: int) -> np.ndarray:
    H = np.zeros((d, d))
    for i in range(d - 1):
        H[i, i + 1] = H[i + 1, i] = -1.0
    return H


def _two_slit(pointer: bool) -> dict:
    d, n = 16, 3
    amps = np.zeros(d)
    amps[[5, 10]] = 1.0
    lower, upper = list(range(d // 2)), list(range(d // 2, d))
    bins = [list(range(i, i + 2)) for i in range(0, d, 2)]
    out = {
        "schema": 1,
        "name": "two-slit-pointer" if pointer else "two-slit",
        "description": ("transverse lattice, slit alternatives {L, U} at t1 and detector bins "
                        "at t_f" + ("; a pointer records the slit" if pointer else "")),
        "system": {
            "dim": d,
            "hamiltonian": encode_matrix(_hopping(d)),
            "initial_state": encode_vector(amps),
            "dt": 0.6,
            "n_steps": n,
        },
        "chains": [
            {"name": "slit-bin", "steps": [{"time": 1, "cells": [lower, upper]},
                                           {"time": n, "cells": bins}]},
        ],
        "records": {"kind": "pointer", "trigger_step": 1, "trigger_cells": [lower, upper]}
        if pointer else {"kind": "trivial"},
        "analyses": ["probabilities", "decoherence", "records"],
        "seed": 0,
    }
    if pointer:
        out["analyses"].append("conditional")
        out["conditional"] = {"chain": "slit-bin", "past": [1], "futures": [[5], [6]]}
    else:
        out["analyses"].insert(0, "weights")
    return out


def dowker_spin() -> dict:
    return {
        "schema": 1,
        "name": "dowker-spin",
        "description": ("qubit rotated by pi/2 per step; the real path ends in the state "
                        "rotated out of |0>, so a coarse graining gives it probability zero"),
        "system": {
            "dim": 2,
            "hamiltonian": encode_matrix([[0, 1], [1, 0]]),
            "initial_state": encode_vector([1, 0]),
            "dt": math.pi / 4,
            "n_steps": 2,
        },
        "chains": [{"name": "final", "steps": [{"time": 2, "cells": _fine(2)}]},
                   {"name": "two-time", "steps": [{"time": 1, "cells": _fine(2)},
                                                  {"time": 2, "cells": _fine(2)}]}],
        "real_path": [0, 1, 0],
        "adversarial": {"multi_time": True, "all_paths": True},
        "analyses": ["weights", "probabilities", "typicality", "adversarial"],
        "seed": 0,
    }


def chsh() -> dict:
    singlet = np.array([0, 1, -1, 0]) / math.sqrt(2)
    return {
        "schema": 1,
        "name": "chsh",
        "description": "two qubits in the singlet; four local measurement settings",
        "system": {
            "dim": 4,
            "labels": ["00", "01", "10", "11"],
            "hamiltonian": encode_matrix(np.zeros((4, 4))),
            "initial_state": encode_vector(singlet),
            "dt": 1.0,
            "n_steps": 1,
        },
        "chsh": {"a": [0.0, math.pi / 2], "b": [math.pi / 4, 3 * math.pi / 4]},
        "analyses": ["chsh"],
        "seed": 0,
    }


def classical_table() -> dict:
    data = fixq2()
    data.update({
        "name": "classical-table",
        "description": "classical finite ensemble next to the fixq2 quantum ensemble",
        "analyses": ["weights", "table"],
        "chains": [{"name": "two-time", "steps": [{"time": 1, "cells": _fine(2)},
                                                  {"time": 2, "cells": _fine(2)}]}],
        "records": {"kind": "none"},
        "classical": {
            "phase_dim": 3,
            "dynamics": [1, 2, 0],
            "rho0": [0.9, 0.05, 0.05],
            "n_steps": 2,
            "chain": [{"time": 0, "cells": [[1], [0, 2]]}],
            "real_z0": 1,
        },
    })
    data.pop("conditional", None)
    return data


BUILTINS = {
    "fixq2": fixq2,
    "two-slit": lambda: _two_slit(False),
    "two-slit-pointer": lambda: _two_slit(True),
    "chsh": chsh,
    "dowker-spin": dowker_spin,
    "classical-table": classical_table,
}


def builtin_scenarios() -> list[str]:
    return list(BUILTINS)


def builtin(name: str) -> dict:
    try:
        return BUILTINS[name]()
    except KeyError:
        raise ScenarioError(f"no builtin scenario {name!r}; choose from {list(BUILTINS)}") from None
