"""Experiment config files: TOML loading, validation, schema emission.

A config is one TOML document with [[experiment]] blocks; each block names
a kind and fills the kind's parameter table.  Validation walks the whole
file and reports every violation with a field path, so a bad config fails
in one round trip.  The emitted schema is itself TOML and carries the
package version.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from . import __version__
from .errors import DomainError, HalfWaveError, require_dispersive
from .data import FAMILY_NAMES
from .experiments import (
    EXPERIMENT_KINDS,
    FAMILY_DATA_FIELDS,
    FAMILY_DATA_REQUIRED,
    RANDOMIZED_FAMILIES,
    ExperimentSpec,
    ParamField,
    PARAM_SCHEMAS,
    build_gronwall_spec,
    resolve_params,
)
from .growth import _named_driver

_NAME_RE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9._-]*$")


@dataclass(frozen=True)
class Violation:
    path: str
    message: str

    def __str__(self) -> str:
        return f"{self.path}: {self.message}"


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _is_num(v) -> bool:
    return _is_int(v) or isinstance(v, float)


def _type_error(value, ftype: str) -> Optional[str]:
    """None when value matches the schema tag, else a message."""
    if ftype == "int":
        return None if _is_int(value) else f"expected int, got {value!r}"
    if ftype == "float":
        return None if _is_num(value) else f"expected number, got {value!r}"
    if ftype == "str":
        return None if isinstance(value, str) else f"expected string, got {value!r}"
    if ftype == "bool":
        return None if isinstance(value, bool) else f"expected bool, got {value!r}"
    if ftype == "table":
        return None if isinstance(value, dict) else f"expected table, got {value!r}"
    if ftype == "list[int]":
        if isinstance(value, list) and all(_is_int(v) for v in value):
            return None
        return f"expected array of ints, got {value!r}"
    if ftype == "list[float]":
        if isinstance(value, list) and all(_is_num(v) for v in value):
            return None
        return f"expected array of numbers, got {value!r}"
    if ftype == "list[pair]":
        if (isinstance(value, list)
                and all(isinstance(v, list) and len(v) == 2
                        and all(_is_int(x) for x in v) for v in value)):
            return None
        return f"expected array of [k1, k2] int pairs, got {value!r}"
    if ftype == "list[table]":
        if isinstance(value, list) and value and all(isinstance(v, dict)
                                                     for v in value):
            return None
        return f"expected non-empty array of tables, got {value!r}"
    raise AssertionError(f"unhandled schema type {ftype}")


# ---------------------------------------------------------------------------
# Kind-specific value checks (run on type-clean, default-resolved params)
# ---------------------------------------------------------------------------

def _check_dispersive(alpha, path: str, add: Callable) -> None:
    try:
        require_dispersive(float(alpha))
    except (DomainError, HalfWaveError) as e:
        add(f"{path}.alpha", str(e))


def _check_positive(p: dict, names, path: str, add: Callable) -> None:
    for name in names:
        if p[name] is not None and not p[name] > 0:
            add(f"{path}.{name}", f"must be > 0, got {p[name]}")


def _dry_envelope(p, seed, path, add):
    _check_dispersive(p["alpha"], path, add)
    if p["d"] not in (1, 2, 3):
        add(f"{path}.d", f"d must be 1, 2 or 3, got {p['d']}")
    if not p["N"]:
        add(f"{path}.N", "need at least one block size")
    elif any(N < 1 for N in p["N"]):
        add(f"{path}.N", "block sizes must be >= 1")
    if p["n_t"] < 2:
        add(f"{path}.n_t", f"need at least 2 times, got {p['n_t']}")
    _check_positive(p, ("oversample", "slope_window"), path, add)


def _dry_scaling(p, seed, path, add):
    _check_dispersive(p["alpha"], path, add)
    if p["d"] not in (1, 2, 3):
        add(f"{path}.d", f"d must be 1, 2 or 3, got {p['d']}")
    if not p["p"] >= 1.0:
        add(f"{path}.p", f"p must be >= 1, got {p['p']}")
    if len(p["N"]) < 2:
        add(f"{path}.N", "need at least two packet scales to fit a slope")
    elif any(N < 1 for N in p["N"]):
        add(f"{path}.N", "packet scales must be >= 1")
    if p["n_t"] < 2:
        add(f"{path}.n_t", f"need at least 2 time samples, got {p['n_t']}")
    _check_positive(p, ("rel_change", "slope_tol"), path, add)


def _dry_evolution_common(p, seed, path, add):
    _check_dispersive(p["alpha"], path, add)
    if p["d"] not in (1, 2, 3):
        add(f"{path}.d", f"d must be 1, 2 or 3, got {p['d']}")
    if p["m"] < 4 or p["m"] % 2 != 0:
        add(f"{path}.m", f"m must be even and >= 4, got {p['m']}")
    if not _is_int(p["sigma"]) or p["sigma"] < 1:
        add(f"{path}.sigma", f"sigma must be an integer >= 1, got {p['sigma']}")
    if p["sign"] not in (-1, 1):
        add(f"{path}.sign", f"sign must be +1 or -1, got {p['sign']}")
    _check_positive(p, ("T", "dt", "amplitude"), path, add)
    if p["T"] > 0 and p["dt"] > 0 and p["T"] / p["dt"] > 1e8:
        add(path, f"T/dt = {p['T'] / p['dt']:.3g} exceeds the 1e8 step budget")
    if p["sample_every"] < 1:
        add(f"{path}.sample_every",
            f"sample_every must be >= 1, got {p['sample_every']}")
    if p["burn_in"] is not None and p["burn_in"] < 0:
        add(f"{path}.burn_in", f"burn_in must be >= 0, got {p['burn_in']}")
    if any(n < 0 for n in p["modified_orders"]):
        add(f"{path}.modified_orders", "orders must be >= 0")
    family = p["family"]
    if family not in FAMILY_NAMES:
        add(f"{path}.family",
            f"unknown family {family!r}; choose from {FAMILY_NAMES}")
        return
    allowed = FAMILY_DATA_FIELDS[family]
    for key in p["data"]:
        if key not in allowed:
            add(f"{path}.data.{key}",
                f"family {family!r} takes {sorted(allowed)}")
    for key in FAMILY_DATA_REQUIRED.get(family, ()):
        if key not in p["data"]:
            add(f"{path}.data.{key}", f"required for family {family!r}")
    if family in RANDOMIZED_FAMILIES and seed is None:
        add(path.rsplit(".params", 1)[0] + ".seed",
            f"seed is required for family {family!r}")


def _dry_evolve(p, seed, path, add):
    p = dict(p, burn_in=None)  # no fit stage on plain evolution runs
    _dry_evolution_common(p, seed, path, add)
    for name in ("mass_tol", "energy_tol"):
        if p[name] is not None and not p[name] > 0:
            add(f"{path}.{name}", f"must be > 0, got {p[name]}")


def _dry_growth(p, seed, path, add):
    _dry_evolution_common(p, seed, path, add)
    if p["bound_slack"] < 0:
        add(f"{path}.bound_slack", f"must be >= 0, got {p['bound_slack']}")
    if p["flat_tol"] is not None and not p["flat_tol"] > 0:
        add(f"{path}.flat_tol", f"must be > 0, got {p['flat_tol']}")
    if p["norm_orders"] is not None and any(s < 0 for s in p["norm_orders"]):
        add(f"{path}.norm_orders", "orders must be >= 0")


_TERM_FIELDS = {"lam", "beta", "A", "p", "g"}
_V1_ONLY = {"beta"}
_V2_ONLY = {"A", "p", "g"}


def _dry_gronwall(p, seed, path, add):
    if p["variant"] not in (1, 2):
        add(f"{path}.variant", f"variant must be 1 or 2, got {p['variant']}")
        return
    _check_positive(p, ("T",), path, add)
    if p["T"] > 0 and (1.0 + p["T"]) < 10.0 * (1.0 + p["burn_in"]):
        add(f"{path}.T", f"fit window too small: (1+T)/(1+burn_in) must "
            f"reach 10, got {(1.0 + p['T']) / (1.0 + p['burn_in']):.3g}")
    if p["f0"] < 0 or (p["variant"] == 1 and p["f0"] == 0):
        add(f"{path}.f0",
            f"f0 must be {'> 0' if p['variant'] == 1 else '>= 0'}, got {p['f0']}")
    for name in ("burn_in", "slack", "sat_tol"):
        if p[name] < 0:
            add(f"{path}.{name}", f"must be >= 0, got {p[name]}")
    other = _V2_ONLY if p["variant"] == 1 else _V1_ONLY
    ok = True
    for j, term in enumerate(p["terms"]):
        tpath = f"{path}.terms[{j}]"
        for key, val in term.items():
            if key not in _TERM_FIELDS:
                add(f"{tpath}.{key}", f"unknown term field; takes "
                    f"{sorted(_TERM_FIELDS)}")
                ok = False
            elif key in other:
                add(f"{tpath}.{key}",
                    f"{key} belongs to variant {1 if key in _V1_ONLY else 2} "
                    f"terms")
                ok = False
        if "lam" not in term:
            add(f"{tpath}.lam", "required")
            ok = False
        elif not (_is_num(term["lam"]) and 0 < term["lam"] <= 1):
            add(f"{tpath}.lam", f"lam must be in (0, 1], got {term['lam']!r}")
            ok = False
        for key in ("beta", "A"):
            if key in term and not (_is_num(term[key]) and term[key] >= 0):
                add(f"{tpath}.{key}", f"must be >= 0, got {term[key]!r}")
                ok = False
        if "p" in term:
            pv = term["p"]
            if not (pv == "inf" or (_is_num(pv) and pv >= 1)):
                add(f"{tpath}.p", f"must be >= 1 or the string 'inf', "
                    f"got {pv!r}")
                ok = False
        if "g" in term:
            if not isinstance(term["g"], str):
                add(f"{tpath}.g", f"expected driver name, got {term['g']!r}")
                ok = False
            else:
                try:
                    _named_driver(term["g"])
                except DomainError as e:
                    add(f"{tpath}.g", str(e))
                    ok = False
    if ok:
        try:
            build_gronwall_spec(p)
        except DomainError as e:
            add(f"{path}.terms", str(e))


def _dry_leibniz(p, seed, path, add):
    if p["m"] < 8 or p["m"] % 2 != 0:
        add(f"{path}.m", f"m must be even and >= 8, got {p['m']}")
        return
    if not p["s_values"] or any(s <= 0 for s in p["s_values"]):
        add(f"{path}.s_values", "need orders > 0")
    if not p["alpha_values"] or any(a <= 0 for a in p["alpha_values"]):
        add(f"{path}.alpha_values", "need orders > 0")
    band = p["m"] // 2
    if not p["pairs"]:
        add(f"{path}.pairs", "need at least one (k1, k2) probe")
    for j, (k1, k2) in enumerate(p["pairs"]):
        if abs(k1) + abs(k2) >= band or max(abs(k1), abs(k2)) >= band:
            add(f"{path}.pairs[{j}]",
                f"|k1| + |k2| must stay below m/2 = {band}")
    _check_positive(p, ("tol_order2", "tol_closed", "tol_commutator"),
                    path, add)


def _dry_kernel_dump(p, seed, path, add):
    _check_dispersive(p["alpha"], path, add)
    if p["d"] not in (1, 2, 3):
        add(f"{path}.d", f"d must be 1, 2 or 3, got {p['d']}")
    if p["N"] < 1:
        add(f"{path}.N", f"N must be >= 1, got {p['N']}")
    if not p["times"] or any(t < 0 for t in p["times"]):
        add(f"{path}.times", "need times >= 0")
    _check_positive(p, ("oversample",), path, add)


_DRY_CHECKS: Dict[str, Callable] = {
    "envelope-certificate": _dry_envelope,
    "strichartz-scaling": _dry_scaling,
    "evolve": _dry_evolve,
    "growth": _dry_growth,
    "gronwall": _dry_gronwall,
    "leibniz-suite": _dry_leibniz,
    "kernel-dump": _dry_kernel_dump,
}

_BLOCK_FIELDS = ("kind", "name", "seed", "out", "params")


def validate_document(doc) -> Tuple[List[ExperimentSpec], List[Violation]]:
    """Whole-file check; returns specs (valid blocks only) + all violations."""
    violations: List[Violation] = []
    add = lambda path, msg: violations.append(Violation(path, msg))  # noqa: E731
    if not isinstance(doc, dict):
        add("(root)", "config must be a TOML document")
        return [], violations
    for key in doc:
        if key != "experiment":
            add(key, "unknown top-level key; experiments go in "
                "[[experiment]] blocks")
    blocks = doc.get("experiment")
    if blocks is None or blocks == []:
        add("experiment", "need at least one [[experiment]] block")
        return [], violations
    if not isinstance(blocks, list) or not all(isinstance(b, dict)
                                               for b in blocks):
        add("experiment", "must be an array of tables ([[experiment]])")
        return [], violations

    specs: List[ExperimentSpec] = []
    seen_names: Dict[str, int] = {}
    for i, block in enumerate(blocks):
        path = f"experiment[{i}]"
        before = len(violations)
        for key in block:
            if key not in _BLOCK_FIELDS:
                add(f"{path}.{key}",
                    f"unknown field; blocks take {list(_BLOCK_FIELDS)}")
        kind = block.get("kind")
        if kind is None:
            add(f"{path}.kind", "required")
            continue
        if not isinstance(kind, str) or kind not in EXPERIMENT_KINDS:
            add(f"{path}.kind", f"unknown kind {kind!r}; expected one of "
                f"{list(EXPERIMENT_KINDS)}")
            continue
        name = block.get("name", f"{kind}-{i}")
        if not (isinstance(name, str) and _NAME_RE.match(name)):
            add(f"{path}.name", f"names match [A-Za-z0-9][A-Za-z0-9._-]*, "
                f"got {name!r}")
        elif name in seen_names:
            add(f"{path}.name", f"duplicate name {name!r} (also "
                f"experiment[{seen_names[name]}]); outputs would collide")
        else:
            seen_names[name] = i
        seed = block.get("seed")
        if seed is not None and not (_is_int(seed) and seed >= 0):
            add(f"{path}.seed", f"expected int >= 0, got {seed!r}")
            seed = None
        out = block.get("out")
        if out is not None and not (isinstance(out, str) and out and all(
                _NAME_RE.match(part) for part in out.split("/"))):
            add(f"{path}.out", f"subdirectory parts match "
                f"[A-Za-z0-9][A-Za-z0-9._-]*, got {out!r}")
            out = None
        params = block.get("params", {})
        ppath = f"{path}.params"
        if not isinstance(params, dict):
            add(ppath, f"expected table, got {params!r}")
            continue
        schema = PARAM_SCHEMAS[kind]
        clean = True
        for key, value in params.items():
            if key not in schema:
                add(f"{ppath}.{key}", f"unknown parameter for kind "
                    f"{kind!r}; takes {sorted(schema)}")
                clean = False
                continue
            err = _type_error(value, schema[key].type)
            if err is not None:
                add(f"{ppath}.{key}", err)
                clean = False
        for key, fld in schema.items():
            if fld.required and key not in params:
                add(f"{ppath}.{key}", "required")
                clean = False
        if clean:
            _DRY_CHECKS[kind](resolve_params(kind, params), seed, ppath, add)
        if len(violations) == before:
            specs.append(ExperimentSpec(kind=kind, name=name, params=params,
                                        seed=seed, out=out))
    return specs, violations


def load_config(path) -> Tuple[List[ExperimentSpec], List[Violation]]:
    """Read + parse + validate; I/O and syntax problems become violations."""
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as e:
        return [], [Violation(str(p), f"unreadable config: {e}")]
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        return [], [Violation(str(p), f"TOML parse error: {e}")]
    return validate_document(doc)


# ---------------------------------------------------------------------------
# Schema emission
# ---------------------------------------------------------------------------

def _toml_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, float)):
        if isinstance(v, float) and math.isinf(v):
            return '"inf"'
        return repr(v)
    if isinstance(v, str):
        return '"' + v.replace('"', '\\"') + '"'
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    if isinstance(v, dict):
        if not v:
            return "{}"
        inner = ", ".join(f"{k} = {_toml_value(x)}" for k, x in v.items())
        return "{ " + inner + " }"
    raise AssertionError(f"unrepresentable schema value {v!r}")


def _field_entry(fld: ParamField) -> str:
    parts = [f'type = "{fld.type}"', f"required = {_toml_value(fld.required)}"]
    if fld.default is not None:
        parts.append(f"default = {_toml_value(fld.default)}")
    if fld.doc:
        parts.append(f'doc = "{fld.doc}"')
    return "{ " + ", ".join(parts) + " }"


def schema_document() -> str:
    """The config schema, as TOML, one [kinds.<kind>] table per kind."""
    lines = [
        f'schema_version = "{__version__}"',
        'config_format = "toml"',
        "",
        "[experiment]",
        'kind = "str: one of ' + ", ".join(EXPERIMENT_KINDS) + '"',
        'name = "str: output basename (optional; default <kind>-<index>)"',
        'seed = "int: RNG key; required for data families ' +
        ", ".join(RANDOMIZED_FAMILIES) + '"',
        'out = "str: subdirectory under --out (optional)"',
        'params = "table: fields per [kinds.<kind>] below"',
    ]
    for kind in EXPERIMENT_KINDS:
        lines.append("")
        lines.append(f"[kinds.{kind}]")
        for key, fld in PARAM_SCHEMAS[kind].items():
            lines.append(f"{key} = {_field_entry(fld)}")
    return "\n".join(lines) + "\n"
