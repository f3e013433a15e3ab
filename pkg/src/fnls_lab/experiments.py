"""Named experiment kinds: parameter schemas, runners, pass/fail checks.

Every kind consumes a flat parameter table (plus an optional seed), writes
exactly one CSV and one JSON summary into the output directory, and
reports named checks.  Runners never call sys.exit; the CLI maps outcomes
to the exit-code contract.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np

from . import __version__
from .data import FAMILY_NAMES, make_initial_data
from .energetics import commutator, leibniz_defect
from .errors import DomainError, require_dispersive
from .evolution import EquationParams, evolve
from .growth import (
    GronwallSpec,
    GronwallTerm,
    GrowthExperimentConfig,
    gronwall_variant2_oracle,
    gronwall_variant_oracle,
    growth_experiment,
)
from .ioutil import write_csv_atomic, write_json_atomic
from .kernel import (
    DecayEnvelope,
    envelope_certificate,
    kernel_eval,
    strichartz_scaling,
)
from .record import sobolev_column
from .spectral import SpectralField, TorusGrid, l2_norm, synthesize

EXPERIMENT_KINDS = (
    "envelope-certificate",
    "strichartz-scaling",
    "evolve",
    "growth",
    "gronwall",
    "leibniz-suite",
    "kernel-dump",
)

# data-family sub-table contract: allowed keys, and keys that must be present
FAMILY_DATA_FIELDS = {
    "single-bump": {"tau"},
    "annulus": {"N"},
    "random-smooth": {"decay"},
    "random-annulus": {"N"},
}
FAMILY_DATA_REQUIRED = {"annulus": {"N"}, "random-annulus": {"N"}}
RANDOMIZED_FAMILIES = ("random-smooth", "random-annulus")


@dataclass(frozen=True)
class ParamField:
    """One schema entry: TOML-level type tag, requiredness, default."""

    type: str
    required: bool = False
    default: object = None
    doc: str = ""


# TOML-facing schemas; types are the tags _check_type understands.
PARAM_SCHEMAS: Dict[str, Dict[str, ParamField]] = {
    "envelope-certificate": {
        "d": ParamField("int", required=True, doc="dimension, 1..3"),
        "alpha": ParamField("float", required=True, doc="dispersion order"),
        "N": ParamField("list[int]", required=True, doc="dyadic block sizes"),
        "n_t": ParamField("int", default=64, doc="times per block"),
        "oversample": ParamField("int", default=2, doc="grid oversampling"),
        "slope_window": ParamField("float", default=0.2,
                                   doc="pass if |ratio slope| <= this"),
    },
    "strichartz-scaling": {
        "d": ParamField("int", required=True),
        "alpha": ParamField("float", required=True),
        "p": ParamField("float", required=True, doc="time-integrability index"),
        "N": ParamField("list[int]", required=True, doc="packet scales"),
        "n_t": ParamField("int", default=1024, doc="starting time samples"),
        "rel_change": ParamField("float", default=0.005,
                                 doc="quotient refinement target"),
        "slope_tol": ParamField("float", default=0.15,
                                doc="pass if |slope - predicted| <= this"),
    },
    "evolve": {
        "d": ParamField("int", required=True),
        "alpha": ParamField("float", required=True),
        "m": ParamField("int", required=True, doc="modes per axis"),
        "T": ParamField("float", required=True),
        "dt": ParamField("float", required=True),
        "family": ParamField("str", required=True, doc="initial-data family"),
        "amplitude": ParamField("float", required=True),
        "sigma": ParamField("int", default=1),
        "sign": ParamField("int", default=1, doc="+1 defocusing, -1 focusing"),
        "data": ParamField("table", default={}, doc="family parameters"),
        "sample_every": ParamField("int", default=1),
        "norm_orders": ParamField("list[float]", default=[],
                                  doc="Sobolev orders to record"),
        "winf_orders": ParamField("list[float]", default=[],
                                  doc="grid-sup derivative orders to record"),
        "modified_orders": ParamField("list[int]", default=[],
                                      doc="modified-energy orders to record"),
        "mass_tol": ParamField("float", default=None,
                               doc="optional relative mass-drift check"),
        "energy_tol": ParamField("float", default=None,
                                 doc="optional relative energy-drift check"),
    },
    "growth": {
        "d": ParamField("int", required=True),
        "alpha": ParamField("float", required=True),
        "m": ParamField("int", required=True),
        "T": ParamField("float", required=True),
        "dt": ParamField("float", required=True),
        "family": ParamField("str", required=True),
        "amplitude": ParamField("float", required=True),
        "sigma": ParamField("int", default=1),
        "sign": ParamField("int", default=1),
        "data": ParamField("table", default={}),
        "sample_every": ParamField("int", default=1),
        "norm_orders": ParamField("list[float]", default=None,
                                  doc="defaults to [alpha + n, alpha/2]"),
        "winf_orders": ParamField("list[float]", default=[]),
        "modified_orders": ParamField("list[int]", default=[]),
        "burn_in": ParamField("float", default=1.0),
        "bound_slack": ParamField("float", default=0.1,
                                  doc="pass if fitted <= bound + slack"),
        "flat_tol": ParamField("float", default=None,
                               doc="optional H^{alpha/2} flatness check"),
    },
    "gronwall": {
        "variant": ParamField("int", required=True, doc="1 or 2"),
        "terms": ParamField("list[table]", required=True,
                            doc="lam, beta | lam, A, p, g per term"),
        "f0": ParamField("float", default=1.0),
        "T": ParamField("float", default=1e4),
        "burn_in": ParamField("float", default=10.0),
        "saturated": ParamField("bool", default=False,
                                doc="also assert |fitted - predicted| small"),
        "slack": ParamField("float", default=0.1),
        "sat_tol": ParamField("float", default=0.05),
    },
    "leibniz-suite": {
        "m": ParamField("int", default=64),
        "s_values": ParamField("list[float]", default=[0.5, 1.0, 1.5, 3.0]),
        "pairs": ParamField("list[pair]", default=[[2, 7], [5, -3], [-4, -6]],
                            doc="two-mode (k1, k2) probes"),
        "alpha_values": ParamField("list[float]", default=[1.5, 2.5]),
        "tol_order2": ParamField("float", default=1e-12),
        "tol_closed": ParamField("float", default=1e-10),
        "tol_commutator": ParamField("float", default=1e-12),
    },
    "kernel-dump": {
        "d": ParamField("int", required=True),
        "alpha": ParamField("float", required=True),
        "N": ParamField("int", required=True, doc="dyadic block size"),
        "times": ParamField("list[float]", required=True),
        "oversample": ParamField("int", default=2),
    },
}


@dataclass(frozen=True)
class ExperimentSpec:
    """One [[experiment]] block after validation."""

    kind: str
    name: str
    params: dict
    seed: Optional[int] = None
    out: Optional[str] = None


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


@dataclass
class ExperimentOutcome:
    name: str
    kind: str
    checks: List[CheckResult]
    csv_path: str
    json_path: str
    summary: dict

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed_checks(self) -> List[CheckResult]:
        return [c for c in self.checks if not c.passed]


def resolve_params(kind: str, params: dict) -> dict:
    """Fill declared defaults; unknown kinds/keys are the validator's job.

    A None default is a real value here: it marks optional checks and
    compute-at-runtime fields, so it is filled in like any other.
    """
    schema = PARAM_SCHEMAS[kind]
    out = {k: f.default for k, f in schema.items()}
    out.update(params)
    return out


def _check(name: str, passed: bool, detail: str) -> CheckResult:
    return CheckResult(name=name, passed=bool(passed), detail=detail)


# ---------------------------------------------------------------------------
# Runners (one per kind); each returns (header, rows, results, checks)
# ---------------------------------------------------------------------------

def _run_envelope(p: dict, seed):
    report = envelope_certificate(p["N"], p["alpha"], p["d"],
                                  n_t=p["n_t"], oversample=p["oversample"])
    header, rows = report.csv_rows()
    window = p["slope_window"]
    checks = [_check("envelope-slope-flat", abs(report.slope) <= window,
                     f"|{report.slope:.4f}| vs window {window}")]
    return header, rows, report.summary(), checks


def _run_scaling(p: dict, seed):
    res = strichartz_scaling(p["d"], p["alpha"], p["p"], p["N"],
                             n_t=p["n_t"], rel_change=p["rel_change"])
    header = ["N", "quotient", "n_time_samples"]
    rows = [[N, res["quotients"][N], res["time_samples"][N]]
            for N in sorted(res["quotients"])]
    results = {
        "slope": res["slope"], "residual": res["residual"],
        "predicted": res["predicted"],
        "quotients": {str(N): q for N, q in sorted(res["quotients"].items())},
    }
    gap = abs(res["slope"] - res["predicted"])
    checks = [_check("scaling-slope-match", gap <= p["slope_tol"],
                     f"slope {res['slope']:.4f} vs predicted "
                     f"{res['predicted']:.4f} (tol {p['slope_tol']})")]
    return header, rows, results, checks


def _equation_params(p: dict) -> EquationParams:
    return EquationParams(d=p["d"], alpha=p["alpha"],
                          sigma=p["sigma"], sign=p["sign"])


def _rel_drift(series: np.ndarray) -> float:
    base = abs(float(series[0]))
    if base == 0.0:
        return float(np.max(np.abs(series - series[0])))
    return float(np.max(np.abs(series - series[0]))) / base


def _run_evolve(p: dict, seed):
    eq = _equation_params(p)
    grid = TorusGrid(eq.d, p["m"])
    u0 = make_initial_data(grid, p["family"], p["amplitude"],
                           seed=seed, **p["data"])
    res = evolve(u0, p["T"], p["dt"], eq,
                 sample_every=p["sample_every"],
                 sobolev_orders=tuple(p["norm_orders"]),
                 winf_orders=tuple(p["winf_orders"]),
                 modified_orders=tuple(p["modified_orders"]),
                 meta={"family": p["family"], "amplitude": p["amplitude"],
                       "seed": seed})
    rec = res.record
    mass_drift = _rel_drift(rec.mass)
    energy_drift = _rel_drift(rec.energy)
    results = {
        "mass_drift": mass_drift, "energy_drift": energy_drift,
        "final_linf": float(rec.linf[-1]), "n_samples": len(rec.times),
    }
    checks = []
    if p["mass_tol"] is not None:
        checks.append(_check("mass-drift", mass_drift <= p["mass_tol"],
                             f"{mass_drift:.3e} vs tol {p['mass_tol']:.1e}"))
    if p["energy_tol"] is not None:
        checks.append(_check("energy-drift", energy_drift <= p["energy_tol"],
                             f"{energy_drift:.3e} vs tol {p['energy_tol']:.1e}"))
    return rec.header, list(rec.rows()), results, checks


def _run_growth(p: dict, seed):
    eq = _equation_params(p)
    n_top = max(p["modified_orders"], default=0)
    norm_orders = p["norm_orders"]
    if norm_orders is None:
        norm_orders = [eq.alpha + n_top, eq.alpha / 2.0]
    cfg = GrowthExperimentConfig(
        params=eq, m=p["m"], family=p["family"], amplitude=p["amplitude"],
        T=p["T"], dt=p["dt"], seed=seed, data_params=dict(p["data"]),
        norm_orders=tuple(norm_orders), winf_orders=tuple(p["winf_orders"]),
        modified_orders=tuple(p["modified_orders"]),
        sample_every=p["sample_every"], burn_in=p["burn_in"])
    res = growth_experiment(cfg)
    rec = res.record
    results = res.summary()
    checks = []
    top_col = sobolev_column(eq.alpha + n_top)
    if res.bound is not None and top_col in res.fitted:
        expo = res.fitted[top_col][0]
        limit = res.bound + p["bound_slack"]
        checks.append(_check("growth-bound", expo <= limit,
                             f"fitted {expo:.4f} vs bound {res.bound:.4f} "
                             f"+ slack {p['bound_slack']}"))
    if p["flat_tol"] is not None:
        low_col = sobolev_column(eq.alpha / 2.0)
        drift = _rel_drift(rec.column(low_col))
        results["low_norm_drift"] = drift
        checks.append(_check("low-norm-flat", drift <= p["flat_tol"],
                             f"{drift:.3e} vs tol {p['flat_tol']:.1e}"))
    return rec.header, list(rec.rows()), results, checks


def build_gronwall_spec(p: dict) -> GronwallSpec:
    """Terms from TOML tables; p = 'inf' (or absent) means the sup mean."""
    terms = []
    for entry in p["terms"]:
        pval = entry.get("p", "inf")
        pval = math.inf if pval == "inf" else float(pval)
        terms.append(GronwallTerm(
            lam=float(entry["lam"]), beta=float(entry.get("beta", 0.0)),
            A=float(entry.get("A", 0.0)), p=pval,
            g=str(entry.get("g", "one"))))
    return GronwallSpec(variant=p["variant"], terms=tuple(terms), f0=p["f0"])


def _subsample_indices(n: int, cap: int = 2048) -> np.ndarray:
    """Geometrically spaced index subset keeping both endpoints."""
    if n <= cap:
        return np.arange(n)
    idx = np.unique(np.geomspace(1, n, cap).astype(int) - 1)
    idx[-1] = n - 1
    return idx


def _run_gronwall(p: dict, seed):
    spec = build_gronwall_spec(p)
    oracle = gronwall_variant_oracle if spec.variant == 1 else gronwall_variant2_oracle
    run = oracle(spec, p["T"], burn_in=p["burn_in"])
    header = ["t", "f"]
    # the integrator stores every accepted step; the CSV keeps a log-spaced
    # subset (the fit above already consumed the full series)
    idx = _subsample_indices(len(run.times))
    rows = [[float(run.times[i]), float(run.values[i])] for i in idx]
    results = {
        "predicted": run.predicted, "fitted_exponent": run.fitted_exponent,
        "residual": run.residual, "variant": spec.variant, "T": p["T"],
    }
    if run.measured_A is not None:
        results["measured_A"] = [float(a) for a in run.measured_A]
    checks = [_check(
        "gronwall-upper", run.fitted_exponent <= run.predicted + p["slack"],
        f"fitted {run.fitted_exponent:.4f} vs predicted {run.predicted:.4f} "
        f"+ slack {p['slack']}")]
    if p["saturated"]:
        gap = abs(run.fitted_exponent - run.predicted)
        checks.append(_check("gronwall-saturated", gap <= p["sat_tol"],
                             f"|fitted - predicted| = {gap:.4f} "
                             f"vs tol {p['sat_tol']}"))
    return header, rows, results, checks


def _mode(grid: TorusGrid, k: int) -> SpectralField:
    coeff = np.zeros(grid.shape, dtype=np.complex128)
    coeff[(k,)] = 1.0
    return SpectralField(grid, coeff)


def _run_leibniz(p: dict, seed):
    grid = TorusGrid(1, p["m"])
    rows = []
    worst: Dict[str, float] = {}

    def push(check: str, param: float, k1: int, k2: int, err: float, tol: float):
        rows.append([check, param, k1, k2, err, tol])
        worst[check] = max(worst.get(check, 0.0), err)

    for (k1, k2) in p["pairs"]:
        f, g = _mode(grid, k1), _mode(grid, k2)
        scale = l2_norm(f) * l2_norm(g)
        for s in p["s_values"]:
            defect = leibniz_defect(f, g, s, order=1)
            expected = np.zeros(grid.shape, dtype=np.complex128)
            expected[(k1 + k2,)] = (abs(k1 + k2) ** s
                                    - abs(k1) ** s - abs(k2) ** s)
            err = float(np.max(np.abs(defect.coeff - expected)))
            push("order1-two-mode", s, k1, k2, err, p["tol_closed"])
        defect2 = leibniz_defect(f, g, 2.0, order=2)
        err2 = float(np.max(np.abs(defect2.coeff))) / max(scale, 1e-300)
        push("order2-s2-zero", 2.0, k1, k2, err2, p["tol_order2"])
    for alpha in p["alpha_values"]:
        for (k1, _unused) in p["pairs"]:
            u = _mode(grid, k1)
            vals = synthesize(commutator(u, alpha))
            expected = 2.0 * abs(k1) ** alpha
            err = float(np.max(np.abs(vals - expected)))
            push("commutator-single-mode", alpha, k1, 0, err,
                 p["tol_commutator"])

    header = ["check", "param", "k1", "k2", "abs_error", "tol"]
    results = {"max_abs_error": dict(sorted(worst.items()))}
    tol_of = {"order1-two-mode": p["tol_closed"],
              "order2-s2-zero": p["tol_order2"],
              "commutator-single-mode": p["tol_commutator"]}
    checks = [_check(name, worst.get(name, 0.0) <= tol, f"max error "
                     f"{worst.get(name, 0.0):.3e} vs tol {tol:.1e}")
              for name, tol in tol_of.items()]
    return header, rows, results, checks


def _run_kernel_dump(p: dict, seed):
    d, alpha, N = p["d"], p["alpha"], p["N"]
    require_dispersive(alpha)
    m = 1 << max(4 * N * p["oversample"] - 1, 8).bit_length()
    grid = TorusGrid(d, m)
    env = DecayEnvelope(d, alpha, N)
    axes = grid.nodes()
    header = ["t"] + [f"x{i}" for i in range(d)] + ["re", "im"]
    rows = []
    sup_by_t, omega_by_t = {}, {}
    coords = np.meshgrid(*[np.ravel(a) for a in axes], indexing="ij")
    flat_coords = [c.ravel() for c in coords]
    for t in p["times"]:
        vals = kernel_eval(grid, N, alpha, float(t)).ravel()
        for i in range(vals.size):
            rows.append([float(t)] + [float(c[i]) for c in flat_coords]
                        + [float(vals[i].real), float(vals[i].imag)])
        sup_by_t[str(t)] = float(np.max(np.abs(vals)))
        omega_by_t[str(t)] = env.value(float(t))
    results = {"m": m, "sup_kappa": sup_by_t, "omega": omega_by_t}
    return header, rows, results, []


_RUNNERS: Dict[str, Callable] = {
    "envelope-certificate": _run_envelope,
    "strichartz-scaling": _run_scaling,
    "evolve": _run_evolve,
    "growth": _run_growth,
    "gronwall": _run_gronwall,
    "leibniz-suite": _run_leibniz,
    "kernel-dump": _run_kernel_dump,
}


def run_experiment(spec: ExperimentSpec, out_root) -> ExperimentOutcome:
    """Execute one block and write name.csv + name.json atomically."""
    if spec.kind not in _RUNNERS:
        raise DomainError(f"unknown experiment kind {spec.kind!r}")
    params = resolve_params(spec.kind, spec.params)
    out_dir = Path(out_root) / spec.out if spec.out else Path(out_root)
    out_dir.mkdir(parents=True, exist_ok=True)
    header, rows, results, checks = _RUNNERS[spec.kind](params, spec.seed)
    csv_path = out_dir / f"{spec.name}.csv"
    json_path = out_dir / f"{spec.name}.json"
    summary = {
        "name": spec.name,
        "kind": spec.kind,
        "version": __version__,
        "seed": spec.seed,
        "params": _jsonable(params),
        "results": results,
        "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail}
                   for c in checks],
        "passed": all(c.passed for c in checks),
    }
    write_csv_atomic(csv_path, header, rows)
    write_json_atomic(json_path, summary)
    return ExperimentOutcome(name=spec.name, kind=spec.kind, checks=checks,
                             csv_path=str(csv_path), json_path=str(json_path),
                             summary=summary)


def _jsonable(value):
    """TOML values plus the tuples/paths resolve_params may introduce."""
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, float) and math.isinf(value):
        return "inf"
    return value
