"""Acceptance runs: pinned parameter matrices, pinned tolerances.

One test per numbered criterion, in order, so a verbose run reads as a
checklist.  Each test prints a single summary line with the measured
numbers before asserting; everything here goes through public entry
points, and run parameters are frozen (no environment-dependent tuning).

Criterion 1 is known to fail at the (d=2, alpha=0.5) cell: the measured
sup|kappa_N| / omega_N constant is N-uniform asymptotically (it plateaus
near 27 by N = 64) but the pinned window N <= 32 sits on the
preasymptotic flank where the oscillation parameter N^alpha t only
reaches ~5.7, so the fitted slope lands near +0.38.  The run is kept
faithful rather than widened.
"""

import functools
import math
import shutil
import subprocess
import sys
import time

import numpy as np
import pytest

from fnls_lab import kernel as kl
from fnls_lab.data import random_annulus, single_bump
from fnls_lab.energetics import (
    commutator,
    equivalence_ratio,
    equivalence_threshold,
    leibniz_defect,
)
from fnls_lab.evolution import EquationParams, evolve, picard_solve
from fnls_lab.growth import (
    GronwallSpec,
    GronwallTerm,
    GrowthExperimentConfig,
    gronwall_variant2_oracle,
    gronwall_variant_oracle,
    growth_experiment,
)
from fnls_lab.spectral import (
    SpectralField,
    TorusGrid,
    l2_norm,
    sobolev_norm,
    synthesize,
)


def _line(num: int, slug: str, ok: bool, detail: str) -> None:
    print(f"criterion {num:2d} {slug}: {'PASS' if ok else 'FAIL'} ({detail})")


def _band_limited(grid: TorusGrid, seed: int, kmax: int, scale: float) -> SpectralField:
    rng = np.random.Generator(np.random.Philox(seed))
    coeff = np.zeros(grid.shape, dtype=np.complex128)
    small = grid.k_norm() <= kmax
    vals = rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape)
    coeff[small] = scale * vals[small]
    return SpectralField(grid, coeff)


def _rel_drift(series: np.ndarray) -> float:
    return float(np.max(np.abs(series - series[0])) / abs(series[0]))


# ---------------------------------------------------------------------------
# 1. Envelope certificate: N-uniform constant across (d, alpha)
# ---------------------------------------------------------------------------

def test_01_envelope_slope_uniformity():
    cells = [
        (1, 2.0, (8, 16, 32, 64)),
        (1, 1.5, (8, 16, 32, 64)),
        (1, 0.5, (8, 16, 32, 64)),
        (2, 2.0, (8, 16, 32)),
        (2, 1.5, (8, 16, 32)),
        (2, 0.5, (8, 16, 32)),
    ]
    window = 0.2
    budget = 300.0
    t0 = time.monotonic()
    slopes = {}
    for d, alpha, Ns in cells:
        rep = kl.envelope_certificate(Ns, alpha, d)
        slopes[(d, alpha)] = rep.slope
    elapsed = time.monotonic() - t0
    worst = max(slopes.items(), key=lambda kv: abs(kv[1]))
    ok = all(abs(s) <= window for s in slopes.values()) and elapsed < budget
    detail = (f"slopes {', '.join(f'd={d} a={a}: {s:+.4f}' for (d, a), s in slopes.items())}; "
              f"{elapsed:.1f}s")
    _line(1, "envelope-certificate", ok, detail)
    assert elapsed < budget, f"envelope sweep took {elapsed:.1f}s"
    assert abs(worst[1]) <= window, (
        f"max-ratio slope at (d, alpha) = {worst[0]} is {worst[1]:+.4f}, "
        f"outside [-{window}, {window}]; all slopes: {slopes}")


# ---------------------------------------------------------------------------
# 2. Strichartz sharpness: wavepacket quotient slopes
# ---------------------------------------------------------------------------

def test_02_strichartz_scaling_slopes():
    targets = [(1.5, 4.0, 0.8125), (0.5, 2.0, 0.875)]
    tol = 0.15
    budget = 600.0
    t0 = time.monotonic()
    fits = []
    for alpha, p, target in targets:
        res = kl.strichartz_scaling(2, alpha, p, (8, 16, 32, 64))
        fits.append((alpha, p, target, res["slope"]))
    elapsed = time.monotonic() - t0
    ok = all(abs(s - t) <= tol for _, _, t, s in fits) and elapsed < budget
    detail = ("; ".join(f"a={a} p={p}: slope {s:.4f} vs {t}" for a, p, t, s in fits)
              + f"; {elapsed:.1f}s")
    _line(2, "strichartz-scaling", ok, detail)
    assert elapsed < budget, f"scaling sweep took {elapsed:.1f}s"
    for alpha, p, target, slope in fits:
        assert abs(slope - target) <= tol, (
            f"(alpha={alpha}, p={p}) slope {slope:.4f} vs {target} +- {tol}")


# ---------------------------------------------------------------------------
# 3 + 4. Conservation on a defocusing split-step run
# ---------------------------------------------------------------------------

@functools.lru_cache(maxsize=None)
def _conservation_run(dt: float):
    grid = TorusGrid(1, 256)
    u0 = single_bump(grid, amplitude=0.15, tau=0.1)
    params = EquationParams(d=1, alpha=2.0, sigma=1, sign=1)
    return evolve(u0, 10.0, dt, params, sample_every=100)


def test_03_mass_conservation():
    res = _conservation_run(1e-3)
    drift = _rel_drift(res.record.mass)
    ok = drift < 1e-11
    _line(3, "mass-conservation", ok, f"relative drift {drift:.3e} vs 1e-11")
    assert drift < 1e-11


def test_04_energy_conservation_second_order():
    d1 = _rel_drift(_conservation_run(1e-3).record.energy)
    d2 = _rel_drift(_conservation_run(5e-4).record.energy)
    ratio = d1 / d2
    ok = d1 < 1e-6 and 3.0 <= ratio <= 5.0
    _line(4, "energy-conservation-order", ok,
          f"drift {d1:.3e} vs 1e-6; halving ratio {ratio:.3f} in [3, 5]")
    assert d1 < 1e-6, f"energy drift {d1:.3e}"
    assert 3.0 <= ratio <= 5.0, f"halving ratio {ratio:.3f}"


# ---------------------------------------------------------------------------
# 5. Picard / split-step cross-validation
# ---------------------------------------------------------------------------

def test_05_solver_cross_validation():
    grid = TorusGrid(1, 16)
    u0 = _band_limited(grid, seed=101, kmax=2, scale=0.15)
    params = EquationParams(d=1, alpha=2.0, sigma=1, sign=1)
    T = 0.1
    pic = picard_solve(u0, T, params, tol=1e-7, n_nodes=257)
    evo = evolve(u0, T, T / 1024, params, sample_every=128, keep_fields=True)
    gaps = [l2_norm(pic.at_time(float(t)) - f)
            for t, f in zip(evo.record.times, evo.fields)]
    sup_gap = max(gaps)
    ok = sup_gap < 1e-6 and pic.contraction_ratio < 0.9
    _line(5, "solver-cross-validation", ok,
          f"sup L2 gap {sup_gap:.3e} over {len(gaps)} times vs 1e-6; "
          f"contraction {pic.contraction_ratio:.4f} vs 0.9")
    assert sup_gap < 1e-6
    assert pic.contraction_ratio < 0.9


# ---------------------------------------------------------------------------
# 6. Modified-energy equivalence above the calibrated threshold
# ---------------------------------------------------------------------------

def test_06_modified_energy_equivalence():
    amplitude = 0.01
    details = []
    ok = True
    for n in (0, 1):
        cal = equivalence_threshold(3.0, 2, n, amplitude=amplitude)
        grid = TorusGrid(2, 64)
        ratios = []
        for seed in range(1000, 1020):
            u = random_annulus(grid, 16, seed=seed, amplitude=amplitude)
            assert sobolev_norm(u, 3.0 + n) > cal.threshold, (
                f"seed {seed} state below calibration threshold {cal.threshold:.4g}")
            ratios.append(equivalence_ratio(u, 3.0, n))
        lo, hi = min(ratios), max(ratios)
        ok = ok and 0.5 <= lo and hi <= 2.0
        details.append(f"n={n}: threshold {cal.threshold:.4g} (shell {cal.shell}), "
                       f"20 ratios in [{lo:.4f}, {hi:.4f}]")
        assert 0.5 <= lo and hi <= 2.0, details[-1]
    _line(6, "modified-energy-equivalence", ok, "; ".join(details))


# ---------------------------------------------------------------------------
# 7. One-sided growth bound on a long 2d run
# ---------------------------------------------------------------------------

def test_07_growth_bound_one_sided():
    budget = 1200.0
    t0 = time.monotonic()
    cfg = GrowthExperimentConfig(
        params=EquationParams(d=2, alpha=3.0, sigma=1, sign=1),
        m=64, family="random-smooth", amplitude=1e-3, T=50.0, dt=0.01,
        seed=7, data_params={"decay": 2.0}, norm_orders=(3.0, 1.5),
        modified_orders=(0,), sample_every=10, burn_in=1.0)
    res = growth_experiment(cfg)
    elapsed = time.monotonic() - t0
    expo, _ = res.fitted["h_3"]
    h_low = res.record.sobolev[1.5]
    flat = _rel_drift(h_low)
    ok = expo <= 3.1 and flat <= 1e-6 and elapsed < budget
    _line(7, "growth-bound", ok,
          f"H^3 exponent {expo:.4f} vs 3.1; H^1.5 drift {flat:.3e} vs 1e-6; "
          f"{elapsed:.1f}s")
    assert elapsed < budget, f"growth run took {elapsed:.1f}s"
    assert expo <= 3.1, f"fitted H^3 exponent {expo:.4f}"
    assert flat <= 1e-6, f"H^1.5 relative drift {flat:.3e}"


# ---------------------------------------------------------------------------
# 8. Gronwall oracle matrix
# ---------------------------------------------------------------------------

# (terms, saturated): single-term specs are driven at saturation and must
# match the predicted exponent within 0.05; multi-term specs check only
# the upper bound (the subdominant term biases the fit low at T = 1e4).
GRONWALL_V1 = [
    ((GronwallTerm(lam=0.5, beta=0.0),), True),   # exact solution (1 + t/2)^2
    ((GronwallTerm(lam=1.0, beta=1.0),), True),   # f ~ t^2/2
    ((GronwallTerm(lam=1.0, beta=0.0),), True),   # exact solution f0 + t
    ((GronwallTerm(lam=1.0 / 3.0, beta=0.5),), True),
    ((GronwallTerm(lam=0.75, beta=2.0),), True),
    ((GronwallTerm(lam=0.5, beta=1.0),), True),
    ((GronwallTerm(lam=1.0, beta=0.0), GronwallTerm(lam=0.5, beta=0.0)), False),
]
GRONWALL_V2 = [
    ((GronwallTerm(lam=1.0, A=0.5, p=2.0, g="one"),), True),   # f = f0 + t
    ((GronwallTerm(lam=0.5, A=0.0, p=math.inf, g="one"),), True),  # quadratic
    ((GronwallTerm(lam=1.0, A=1.0, p=2.0, g="power:0.5"),), True),
    ((GronwallTerm(lam=1.0, A=0.5, p=math.inf, g="power:0.5"),), True),
    ((GronwallTerm(lam=0.5, A=0.25, p=4.0, g="one"),), True),
    ((GronwallTerm(lam=1.0, A=2.0, p=1.0, g="power:1"),), True),
    ((GronwallTerm(lam=1.0, A=0.5, p=2.0, g="one"),
      GronwallTerm(lam=0.5, A=0.0, p=math.inf, g="one")), False),
]


def test_08_gronwall_oracle_matrix():
    T = 1e4
    rows = []
    ok = True
    for variant, matrix, oracle in ((1, GRONWALL_V1, gronwall_variant_oracle),
                                    (2, GRONWALL_V2, gronwall_variant2_oracle)):
        for terms, saturated in matrix:
            spec = GronwallSpec(variant=variant, terms=terms)
            run = oracle(spec, T)
            gap = run.fitted_exponent - run.predicted
            upper = gap <= 0.1
            tight = (abs(gap) <= 0.05) if saturated else True
            ok = ok and upper and tight
            rows.append((variant, saturated, run.predicted, run.fitted_exponent))
            assert upper, (f"v{variant} {terms}: fitted {run.fitted_exponent:.4f} "
                           f"> predicted {run.predicted:.4f} + 0.1")
            if saturated:
                assert tight, (f"v{variant} {terms}: |gap| = {abs(gap):.4f} > 0.05 "
                               f"on a saturated spec")
    n_sat = sum(1 for _, sat, _, _ in rows if sat)
    worst = max(abs(f - p) for _, sat, p, f in rows if sat)
    _line(8, "gronwall-oracles", ok,
          f"{len(rows)} specs ({n_sat} saturated, worst saturated gap {worst:.4f}); "
          f"all within predicted + 0.1")


# ---------------------------------------------------------------------------
# 9. Leibniz defect closed forms
# ---------------------------------------------------------------------------

def _mode(grid: TorusGrid, k: int) -> SpectralField:
    coeff = np.zeros(grid.shape, dtype=np.complex128)
    coeff[(k,)] = 1.0
    return SpectralField(grid, coeff)


def test_09_leibniz_defect_closed_forms():
    grid = TorusGrid(1, 64)

    f = _band_limited(grid, seed=31, kmax=10, scale=0.7)
    g = _band_limited(grid, seed=32, kmax=10, scale=0.7)
    scale = l2_norm(f) * l2_norm(g)
    order2 = float(np.max(np.abs(leibniz_defect(f, g, 2.0, order=2).coeff))) / scale

    k = 3
    u = _mode(grid, k)
    two_mode_errs = {}
    for s in (0.5, 1.0, 1.5, 3.0):
        defect = leibniz_defect(u, u, s, order=1)
        expected = (2.0 ** s - 2.0) * abs(k) ** s  # exactly zero at s = 1
        got = complex(defect.coeff[(2 * k,)])
        rest = defect.coeff.copy()
        rest[(2 * k,)] = 0.0
        err = max(abs(got - expected), float(np.max(np.abs(rest))))
        two_mode_errs[s] = err / max(abs(expected), 1.0)

    comm_errs = {}
    for alpha in (1.5, 2.5):
        for kk in (2, 7):
            vals = synthesize(commutator(_mode(grid, kk), alpha))
            comm_errs[(alpha, kk)] = float(np.max(np.abs(vals - 2.0 * abs(kk) ** alpha)))

    ok = (order2 <= 1e-12
          and all(e <= 1e-10 for e in two_mode_errs.values())
          and all(e <= 1e-12 for e in comm_errs.values()))
    _line(9, "leibniz-defects", ok,
          f"order-2 s=2 residual {order2:.2e} vs 1e-12*||inputs||; "
          f"two-mode rel errs {max(two_mode_errs.values()):.2e} vs 1e-10; "
          f"commutator abs errs {max(comm_errs.values()):.2e} vs 1e-12")
    assert order2 <= 1e-12
    for s, err in two_mode_errs.items():
        assert err <= 1e-10, f"s = {s}: relative error {err:.3e}"
    for key, err in comm_errs.items():
        assert err <= 1e-12, f"(alpha, k) = {key}: error {err:.3e}"


# ---------------------------------------------------------------------------
# 10. Van der Corput bound across a (k, lambda) matrix
# ---------------------------------------------------------------------------

def _monomial_phase(k: int):
    def phase(t, order=0):
        t = np.asarray(t, dtype=float)
        if order > k:
            return np.zeros_like(t)
        c = 1.0
        for j in range(order):
            c *= (k - j)
        return c * t ** (k - order)
    return phase


def test_10_van_der_corput_matrix():
    lams = (10.0, 1e2, 1e3, 1e4)
    ok = True
    details = []
    for k in (1, 2, 3):
        scaled = []
        for lam in lams:
            lhs, bound, passed = kl.van_der_corput_check(
                _monomial_phase(k), k, lam, 0.0, 1.0)
            assert passed, f"k={k}, lam={lam}: lhs {lhs:.4e} > bound {bound:.4e}"
            scaled.append(lhs * lam ** (1.0 / k))
        spread = max(scaled) / min(scaled)
        ok = ok and spread < 10.0
        details.append(f"k={k}: lhs*lam^(1/{k}) spread {spread:.3f}")
        assert spread < 10.0, f"k={k}: scaled-lhs spread {spread:.3f} >= 10"
    _line(10, "van-der-corput", ok, "; ".join(details) + "; all lhs <= bound")


# ---------------------------------------------------------------------------
# 11. Poisson block sum against the lattice kernel
# ---------------------------------------------------------------------------

def test_11_oscillatory_block_consistency():
    N, alpha = 8, 2.0
    grid = TorusGrid(1, 8 * N)
    errs = {}
    for t in (0.005, 0.01, 0.02):
        kappa = kl.kernel_eval(grid, N, alpha, t)[0]
        total = kl.poisson_block_sum(N, alpha, 0.0, t, n_range=2)
        errs[t] = abs(total - kappa) / abs(kappa)
    ok = all(e < 1e-6 for e in errs.values())
    _line(11, "oscillatory-blocks", ok,
          "; ".join(f"t={t}: rel err {e:.2e}" for t, e in errs.items()) + " vs 1e-6")
    for t, e in errs.items():
        assert e < 1e-6, f"t = {t}: relative error {e:.3e}"


# ---------------------------------------------------------------------------
# 12. Renderer round-trip (skipped when the plotting package is absent)
# ---------------------------------------------------------------------------

def test_12_render_round_trip(tmp_path):
    if shutil.which("render") is None:
        pytest.skip("renderer not installed; the core suite stands alone")

    from fnls_lab.cli import main as lab_main

    config = tmp_path / "experiments.toml"
    config.write_text(
        '[[experiment]]\n'
        'kind = "envelope-certificate"\n'
        'name = "env"\n'
        '[experiment.params]\n'
        'd = 1\n'
        'alpha = 2.0\n'
        'N = [8, 16]\n'
    )
    out = tmp_path / "results"
    assert lab_main(["run", "--config", str(config), "--out", str(out),
                     "--quiet"]) == 0

    import json
    summary = json.loads((out / "env.json").read_text())
    slope = summary["results"]["slope"]

    spec = tmp_path / "plots.toml"
    spec.write_text(
        '[[plot]]\n'
        'kind = "envelope"\n'
        f'csv = "{out / "env.csv"}"\n'
        f'summary = "{out / "env.json"}"\n'
        f'out = "{tmp_path / "figs" / "env"}"\n'
    )
    proc = subprocess.run(["render", "--spec", str(spec)],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    png = tmp_path / "figs" / "env.png"
    svg = tmp_path / "figs" / "env.svg"
    assert png.exists() and svg.exists()
    annotation = f"slope {slope:.3f}"
    assert annotation in svg.read_text(), (
        f"annotation {annotation!r} missing from the SVG text")

    empty_csv = tmp_path / "empty.csv"
    empty_csv.write_text("N,t,sup_kappa,omega,ratio\n")
    bad_spec = tmp_path / "bad1.toml"
    bad_spec.write_text(
        '[[plot]]\nkind = "envelope"\n'
        f'csv = "{empty_csv}"\nsummary = "{out / "env.json"}"\n'
        f'out = "{tmp_path / "figs" / "bad1"}"\n'
    )
    proc = subprocess.run(["render", "--spec", str(bad_spec)],
                          capture_output=True, text=True)
    assert proc.returncode != 0
    assert "no data rows" in proc.stderr

    noratio_csv = tmp_path / "noratio.csv"
    noratio_csv.write_text("N,t,sup_kappa\n8,0.5,12.0\n")
    bad_spec2 = tmp_path / "bad2.toml"
    bad_spec2.write_text(
        '[[plot]]\nkind = "envelope"\n'
        f'csv = "{noratio_csv}"\nsummary = "{out / "env.json"}"\n'
        f'out = "{tmp_path / "figs" / "bad2"}"\n'
    )
    proc = subprocess.run(["render", "--spec", str(bad_spec2)],
                          capture_output=True, text=True)
    assert proc.returncode != 0
    assert "ratio" in proc.stderr
    _line(12, "render-round-trip", True,
          f"annotation {annotation!r} reproduced; empty and missing-column "
          f"inputs rejected")
