"""Dispersive kernel measurements: decay envelopes, scaling exponents,
oscillatory building blocks and the stationary-phase bounds behind them.

The object under study is the frequency-localized free propagator

    kappa_N(x, t) = sum_k e^{i(k.x - |k|^alpha t)} psi(|k|/N)

whose size is controlled by a piecewise envelope omega_N(t) with regime
boundaries at |t| = N^{-alpha} and (for alpha > 1) N^{1-alpha}.  Everything
here measures; nothing asserts sharpness (the large-time regime for
alpha > 1 is a one-sided bound only).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import (
    DomainError,
    HalfWaveError,
    PreconditionError,
    ResolutionError,
    ToleranceError,
)
from .spectral import (
    SpectralField,
    TorusGrid,
    annulus_profile,
    apply_multiplier,
    synthesize,
)


from .errors import require_dispersive as _require_dispersive


# ---------------------------------------------------------------------------
# Exponents
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExponentTable:
    """Time-integrability exponent of the envelope: ||omega_N||_{L^p} ~ N^gamma."""

    alpha: float
    p: float
    d: int
    exponent: float
    regime: str


def dispersion_exponents(alpha: float, p: float, d: int) -> ExponentTable:
    """Exponent gamma (alpha > 1) or ell (alpha < 1) governing N-growth.

    alpha > 1:  gamma = d alpha / 2 when alpha >= 2 or the crossover
                2 alpha/(2-alpha) dominates p d; otherwise d - alpha/p.
    alpha < 1:  ell = d - alpha/p.
    """
    _require_dispersive(alpha)
    if p <= 0.0:
        raise DomainError(f"p must be positive, got {p}")
    if alpha > 1.0:
        if alpha >= 2.0 or 2.0 * alpha / (2.0 - alpha) >= p * d:
            return ExponentTable(alpha, p, d, d * alpha / 2.0, "stationary")
        return ExponentTable(alpha, p, d, d - alpha / p, "endpoint")
    return ExponentTable(alpha, p, d, d - alpha / p, "low-dispersion")


# ---------------------------------------------------------------------------
# Kernel and envelope
# ---------------------------------------------------------------------------

def kernel_eval(grid: TorusGrid, N: int, alpha: float, t: float) -> np.ndarray:
    """kappa_N(. , t) on the grid nodes via one multiplier + synthesize.

    Exact lattice sum: psi truncates at |k| < 2N, so a grid with
    m/2 >= 2N holds every annulus mode without aliasing.
    """
    _require_dispersive(alpha)
    if grid.m // 2 < 2 * N:
        raise ResolutionError(f"kernel at N = {N} needs m/2 >= {2 * N}, grid has {grid.m // 2}")
    kn = grid.k_norm()
    coeff = annulus_profile(kn / N) * np.exp(-1j * kn ** alpha * t)
    return synthesize(SpectralField(grid, coeff.astype(np.complex128)))


@dataclass(frozen=True)
class DecayEnvelope:
    """Piecewise bound omega_N(t), constants 1, exact regime boundaries."""

    d: int
    alpha: float
    N: int

    def __post_init__(self):
        _require_dispersive(self.alpha)
        if self.N < 1:
            raise DomainError(f"N must be >= 1, got {self.N}")

    @property
    def boundaries(self) -> tuple:
        """(N^-alpha, N^{1-alpha} or None): regime crossover times in (0, 1]."""
        t1 = float(self.N) ** (-self.alpha)
        t2 = float(self.N) ** (1.0 - self.alpha) if self.alpha > 1.0 else None
        return (t1, t2)

    def value(self, t: float) -> float:
        d, alpha, N = self.d, self.alpha, float(self.N)
        at = abs(t)
        if at > 1.0:
            raise DomainError(f"envelope defined for |t| <= 1, got {t}")
        t1, t2 = self.boundaries
        if at <= t1:
            return N ** d
        if alpha < 1.0:
            return N ** (d - d * alpha / 2.0) * at ** (-d / 2.0)
        if at <= t2:
            return N ** (d - d * alpha / 2.0) * at ** (-d / 2.0)
        return N ** (d * alpha / 2.0) * at ** (d / 2.0)

    def __call__(self, t):
        if np.ndim(t) == 0:
            return self.value(float(t))
        return np.array([self.value(float(s)) for s in np.ravel(t)]).reshape(np.shape(t))


def decay_envelope(N: int, alpha: float, d: int, t: float) -> float:
    return DecayEnvelope(d, alpha, N).value(t)


@dataclass
class EnvelopeReport:
    """Measured sup|kappa_N| against omega_N over an (N, t) sweep."""

    alpha: float
    d: int
    rows: list = field(default_factory=list)  # dicts: N, t, sup_kappa, omega, ratio
    max_ratio_by_N: dict = field(default_factory=dict)
    slope: float = math.nan
    residual: float = math.nan

    def csv_rows(self):
        header = ["N", "t", "sup_kappa", "omega", "ratio"]
        return header, [[r[h] for h in header] for r in self.rows]

    def summary(self) -> dict:
        return {
            "alpha": self.alpha,
            "d": self.d,
            "max_ratio_by_N": {str(k): v for k, v in self.max_ratio_by_N.items()},
            "slope": self.slope,
            "residual": self.residual,
        }


def _fit_loglog(x: np.ndarray, y: np.ndarray) -> tuple:
    """Least-squares slope of log y against log x, with RMS residual."""
    lx, ly = np.log(np.asarray(x, dtype=float)), np.log(np.asarray(y, dtype=float))
    A = np.vstack([lx, np.ones_like(lx)]).T
    sol, *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - A @ sol
    return float(sol[0]), float(np.sqrt(np.mean(resid ** 2)))


def certificate_time_grid(N: int, alpha: float, n_t: int = 64) -> np.ndarray:
    """Log-spaced times covering (N^-alpha / 4, 1]: all envelope regimes."""
    t_lo = 0.25 * float(N) ** (-alpha)
    return np.geomspace(t_lo, 1.0, n_t)


def envelope_certificate(N_list, alpha: float, d: int, t_grid=None,
                         n_t: int = 64, oversample: int = 2) -> EnvelopeReport:
    """Measure sup_x |kappa_N| / omega_N over times and dyadic N.

    With t_grid=None each N gets its own log grid spanning every regime.
    The summary fits the log-log slope of max-ratio against N; an
    N-uniform envelope shows up as a slope near zero.  No tightness claim
    is made for the post-crossover regime at alpha > 1.
    """
    _require_dispersive(alpha)
    report = EnvelopeReport(alpha=alpha, d=d)
    for N in N_list:
        m = 1 << max(4 * N * oversample - 1, 8).bit_length()  # power of two >= 4N
        grid = TorusGrid(d, m)
        env = DecayEnvelope(d, alpha, N)
        times = certificate_time_grid(N, alpha, n_t) if t_grid is None else np.asarray(t_grid)
        best = -math.inf
        for t in times:
            sup = float(np.max(np.abs(kernel_eval(grid, N, alpha, float(t)))))
            omega = env.value(float(t))
            ratio = sup / omega
            report.rows.append(
                {"N": N, "t": float(t), "sup_kappa": sup, "omega": omega, "ratio": ratio}
            )
            best = max(best, ratio)
        report.max_ratio_by_N[int(N)] = best
    Ns = np.array(sorted(report.max_ratio_by_N))
    if len(Ns) >= 2:
        report.slope, report.residual = _fit_loglog(
            Ns, np.array([report.max_ratio_by_N[int(N)] for N in Ns])
        )
    return report


# ---------------------------------------------------------------------------
# Wavepackets and Strichartz quotients
# ---------------------------------------------------------------------------

def sharpness_wavepacket(grid: TorusGrid, N: int) -> SpectralField:
    """Unit coefficients on the annulus N <= |k| <= 2N.

    Modes touching the unpaired Nyquist row (any |k_i| = m/2) are left out
    so the packet keeps its +/-k symmetry; grids with m >= 8N contain the
    annulus strictly inside and lose nothing.
    """
    if grid.m < 4 * N:
        raise ResolutionError(f"wavepacket at N = {N} needs m >= {4 * N}, got {grid.m}")
    kn = grid.k_norm()
    coeff = ((kn >= N) & (kn <= 2 * N) & ~grid.nyquist_mask()).astype(np.complex128)
    return SpectralField(grid, coeff)


def free_propagator_symbol(grid: TorusGrid, alpha: float, t: float) -> np.ndarray:
    return np.exp(-1j * grid.k_norm() ** alpha * t)


def strichartz_quotient(f: SpectralField, alpha: float, p: float, t_samples: np.ndarray) -> float:
    """|| sup_x |e^{-it|D|^alpha} f| ||_{L^{2p}[0,1]} / ||f||_{L^2}.

    Time integral of the 2p-th power by the trapezoid rule on the given
    uniform partition of [0, 1].
    """
    _require_dispersive(alpha)
    if p < 1.0:
        raise DomainError(f"p must be >= 1, got {p}")
    t_samples = np.asarray(t_samples, dtype=float)
    if t_samples.ndim != 1 or len(t_samples) < 2:
        raise DomainError("need at least two time samples")
    grid = f.grid
    kn = grid.k_norm()
    base = f.coeff
    sup = np.empty(len(t_samples))
    for i, t in enumerate(t_samples):
        vals = synthesize(SpectralField(grid, base * np.exp(-1j * kn ** alpha * t)))
        sup[i] = np.max(np.abs(vals))
    mass = math.sqrt((2.0 * math.pi) ** grid.d * float(np.sum(np.abs(base) ** 2)))
    if mass == 0.0:
        raise DomainError("zero initial data")
    time_norm = float(np.trapezoid(sup ** (2.0 * p), t_samples)) ** (1.0 / (2.0 * p))
    return time_norm / mass


def refined_strichartz_quotient(f: SpectralField, alpha: float, p: float,
                                n_t: int = 1024, rel_change: float = 0.005,
                                max_rounds: int = 6) -> tuple:
    """Quotient with the time grid doubled until it moves < rel_change."""
    prev = strichartz_quotient(f, alpha, p, np.linspace(0.0, 1.0, n_t))
    for _ in range(max_rounds):
        n_t *= 2
        cur = strichartz_quotient(f, alpha, p, np.linspace(0.0, 1.0, n_t))
        if abs(cur - prev) <= rel_change * abs(prev):
            return cur, n_t
        prev = cur
    return prev, n_t


def predicted_quotient_slope(alpha: float, p: float, d: int) -> float:
    """Expected log-log slope of the wavepacket quotient family in N.

    The packet profile gives N^{d/2 - alpha/(2p)} against the flat
    N^{d/2} floor for alpha > 1; below alpha = 1 there is no floor.
    """
    _require_dispersive(alpha)
    raw = d / 2.0 - alpha / (2.0 * p)
    return max(raw, 0.0) if alpha > 1.0 else raw


def strichartz_scaling(d: int, alpha: float, p: float, N_list,
                       n_t: int = 1024, rel_change: float = 0.005) -> dict:
    """Fit the quotient's N-slope over a dyadic wavepacket family."""
    _require_dispersive(alpha)
    N_list = sorted(int(N) for N in N_list)
    if len(N_list) < 2:
        raise DomainError("need at least two packet scales to fit a slope")
    quotients = {}
    grids_used = {}
    for N in N_list:
        m = 1 << (4 * N - 1).bit_length()
        grid = TorusGrid(d, m)
        q, used = refined_strichartz_quotient(sharpness_wavepacket(grid, N), alpha, p,
                                              n_t=n_t, rel_change=rel_change)
        quotients[N] = q
        grids_used[N] = used
    slope, residual = _fit_loglog(np.array(N_list, dtype=float),
                                  np.array([quotients[N] for N in N_list]))
    return {
        "d": d, "alpha": alpha, "p": p,
        "quotients": quotients, "slope": slope, "residual": residual,
        "predicted": predicted_quotient_slope(alpha, p, d),
        "time_samples": grids_used,
    }


# ---------------------------------------------------------------------------
# Oscillatory blocks (Poisson summation pieces)
# ---------------------------------------------------------------------------

def _quad_complex_1d(fn, a, b, epsabs, limit=800):
    # epsrel pinned tiny so epsabs drives refinement; quad's default epsrel
    # would otherwise stop at ~1e-8 relative.  Accuracy shortfalls surface
    # as ToleranceError downstream, so quad's own warning is muted.
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        re, re_err = integrate.quad(lambda s: fn(s).real, a, b,
                                    epsabs=epsabs, epsrel=1e-13, limit=limit)
        im, im_err = integrate.quad(lambda s: fn(s).imag, a, b,
                                    epsabs=epsabs, epsrel=1e-13, limit=limit)
    return re + 1j * im, re_err + im_err


def oscillatory_block(n, N: int, alpha: float, x, t: float, tol: float = None) -> complex:
    """I_{n,N} = N^d int e^{i phi} psi(|xi|) dxi over the annulus support,
    with phase phi = N (x - 2 pi n).xi - N^alpha t |xi|^alpha.

    Poisson summation turns kappa_N into the lattice sum of these blocks.
    Adaptive quadrature; default absolute tolerance 1e-8 * N^d.
    """
    _require_dispersive(alpha)
    n = np.atleast_1d(np.asarray(n, dtype=float))
    x = np.atleast_1d(np.asarray(x, dtype=float))
    d = len(n)
    if len(x) != d or d not in (1, 2):
        raise DomainError("n and x must share dimension 1 or 2")
    scale = float(N) ** d
    if tol is None:
        tol = 1e-8 * scale
    shift = N * (x - 2.0 * math.pi * n)
    lam = float(N) ** alpha * t

    if d == 1:
        def fn(xi):
            return np.exp(1j * (shift[0] * xi - lam * abs(xi) ** alpha)) * annulus_profile(abs(xi))

        eps_each = tol / scale / 8.0
        left, el = _quad_complex_1d(fn, -2.0, -0.5, eps_each)
        right, er = _quad_complex_1d(fn, 0.5, 2.0, eps_each)
        value = scale * (left + right)
        achieved = scale * (el + er)
    else:
        def fn_re(y, x1):
            r = math.hypot(x1, y)
            return math.cos(shift[0] * x1 + shift[1] * y - lam * r ** alpha) * annulus_profile(r)

        def fn_im(y, x1):
            r = math.hypot(x1, y)
            return math.sin(shift[0] * x1 + shift[1] * y - lam * r ** alpha) * annulus_profile(r)

        eps_each = tol / scale / 8.0
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            re, re_err = integrate.dblquad(fn_re, -2.0, 2.0, -2.0, 2.0,
                                           epsabs=eps_each, epsrel=1e-13)
            im, im_err = integrate.dblquad(fn_im, -2.0, 2.0, -2.0, 2.0,
                                           epsabs=eps_each, epsrel=1e-13)
        value = scale * (re + 1j * im)
        achieved = scale * (re_err + im_err)
    if achieved > tol:
        raise ToleranceError(
            f"oscillatory block quadrature reached {achieved:.3e} > tol {tol:.3e}",
            estimate=value, achieved_error=achieved,
        )
    return complex(value)


def poisson_block_sum(N: int, alpha: float, x: float, t: float, n_range: int = 2) -> complex:
    """Sum of I_{n,N} over |n| <= n_range (1d); approximates kappa_N(x,t)."""
    total = 0.0 + 0.0j
    for n in range(-n_range, n_range + 1):
        total += oscillatory_block((n,), N, alpha, (x,), t)
    return total


# ---------------------------------------------------------------------------
# Van der Corput
# ---------------------------------------------------------------------------

def van_der_corput_check(phase, k: int, lam: float, a: float, b: float,
                         weight=None, weight_derivative=None,
                         n_precondition_samples: int = 2049) -> tuple:
    """Oscillatory-integral bound check.

    phase(t, order) must return the order-th derivative of the phase u.
    Hypotheses sampled on [a, b]: u^{(k)} >= 1 (k >= 2), or u' >= 1 and
    monotone (k = 1).  Returns (lhs, bound, passed) with

        lhs   = | int_a^b e^{i lam u(t)} psi(t) dt |
        bound = C_k lam^{-1/k} ( |psi(b)| + int_a^b |psi'| ),

    C_k = 12 k for k >= 2 and 3 for k = 1.  psi defaults to 1.
    """
    if k < 1:
        raise DomainError(f"derivative order k must be >= 1, got {k}")
    if lam <= 0.0:
        raise DomainError(f"lambda must be positive, got {lam}")
    if not b > a:
        raise DomainError("need b > a")
    ts = np.linspace(a, b, n_precondition_samples)
    dk = np.asarray(phase(ts, k), dtype=float)
    if np.min(dk) < 1.0 - 1e-12:
        raise PreconditionError(
            f"sampled u^({k}) dips to {np.min(dk):.6g} < 1 on [{a}, {b}]"
        )
    if k == 1:
        diffs = np.diff(dk)
        if np.any(diffs > 1e-12) and np.any(diffs < -1e-12):
            raise PreconditionError("u' must be monotone for the k = 1 bound")

    if weight is None:
        psi = lambda t: np.ones_like(np.asarray(t, dtype=float))
        total_variation = 0.0
        psi_b = 1.0
    else:
        psi = weight
        if weight_derivative is None:
            raise DomainError("weight_derivative required alongside weight")
        total_variation, _ = integrate.quad(
            lambda s: abs(float(weight_derivative(s))), a, b, limit=200
        )
        psi_b = abs(float(psi(b)))

    fn = lambda s: np.exp(1j * lam * float(phase(s, 0))) * float(psi(s))
    lhs_val, _ = _quad_complex_1d(fn, a, b, epsabs=1e-11, limit=800)
    lhs = abs(lhs_val)
    c_k = 3.0 if k == 1 else 12.0 * k
    bound = c_k * lam ** (-1.0 / k) * (psi_b + total_variation)
    return lhs, bound, bool(lhs <= bound)
