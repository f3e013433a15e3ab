"""Spectral building blocks on the d-dimensional torus [0, 2pi)^d.

Conventions (fixed once, everything downstream relies on them):

  u(x) = sum_k uhat(k) e^{i k.x},   uhat(k) = (2pi)^{-d} int u(x) e^{-i k.x} dx

so Parseval reads ||u||_{L^2}^2 = (2pi)^d sum_k |uhat(k)|^2, and the grid
quadrature (2pi/m)^d sum_j |u(x_j)|^2 is exact for band-limited fields.

Coefficients are stored in FFT wrapped ordering: axis frequencies run
0, 1, ..., m/2-1, -m/2, ..., -1.  The asymmetric Nyquist row k_i = -m/2
is representable but has no +m/2 partner; multipliers with odd symbols
zero it so derivative-type operators keep real fields real.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, DomainError, ResolutionError, SingularMultiplierError

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class TorusGrid:
    """Uniform tensor grid with m points per axis, x_j = 2pi j / m."""

    d: int
    m: int

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise DomainError(f"d must be 1, 2 or 3, got {self.d}")
        # even >= 4 is the hard invariant; experiment configs stick to powers
        # of two, but padded product grids (factor sigma+1) may land between
        if self.m < 4 or self.m % 2 != 0:
            raise DomainError(f"m must be even and >= 4, got {self.m}")

    @property
    def shape(self) -> tuple:
        return (self.m,) * self.d

    @property
    def spacing(self) -> float:
        return TWO_PI / self.m

    @property
    def cell_volume(self) -> float:
        return self.spacing ** self.d

    def nodes(self):
        """Coordinate arrays (one per axis, broadcastable to `shape`)."""
        ax = TWO_PI * np.arange(self.m) / self.m
        return np.meshgrid(*([ax] * self.d), indexing="ij", sparse=True)

    def wavenumbers(self):
        """Integer frequency arrays per axis in wrapped ordering."""
        k = np.fft.fftfreq(self.m, d=1.0 / self.m)
        return np.meshgrid(*([k] * self.d), indexing="ij", sparse=True)

    def k_norm(self) -> np.ndarray:
        """|k| on the full coefficient array."""
        ks = self.wavenumbers()
        out = np.zeros(self.shape)
        for k in ks:
            out = out + k ** 2
        return np.sqrt(out)

    def nyquist_mask(self) -> np.ndarray:
        """True where any axis frequency equals -m/2 (the unpaired row)."""
        ks = self.wavenumbers()
        mask = np.zeros(self.shape, dtype=bool)
        for k in ks:
            mask = mask | (k == -self.m // 2)
        return mask


def _frozen_array(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class SpectralField:
    """Immutable Fourier coefficients of a field on a TorusGrid."""

    grid: TorusGrid
    coeff: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.asarray(self.coeff, dtype=np.complex128)
        if c.shape != self.grid.shape:
            raise DimensionError(
                f"coefficient shape {c.shape} != grid shape {self.grid.shape}"
            )
        object.__setattr__(self, "coeff", _frozen_array(c))

    def __add__(self, other: "SpectralField") -> "SpectralField":
        if other.grid != self.grid:
            raise DimensionError("fields live on different grids")
        return SpectralField(self.grid, self.coeff + other.coeff)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        if other.grid != self.grid:
            raise DimensionError("fields live on different grids")
        return SpectralField(self.grid, self.coeff - other.coeff)

    def __mul__(self, scalar) -> "SpectralField":
        return SpectralField(self.grid, self.coeff * scalar)

    __rmul__ = __mul__

    def conj(self) -> "SpectralField":
        """Complex conjugate of the physical field: c(k) -> conj(c(-k))."""
        flipped = self.coeff
        for ax in range(self.grid.d):
            flipped = np.roll(np.flip(flipped, axis=ax), 1, axis=ax)
        return SpectralField(self.grid, np.conj(flipped))

    def mean(self) -> complex:
        return complex(self.coeff[(0,) * self.grid.d])


# ---------------------------------------------------------------------------
# Littlewood-Paley bump
# ---------------------------------------------------------------------------

def _smoothstep(t: np.ndarray) -> np.ndarray:
    """C^inf step: 0 for t <= 0, 1 for t >= 1, exp(-1/t)-glued between."""
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        f = np.where(t > 0.0, np.exp(-1.0 / np.maximum(t, 1e-300)), 0.0)
        g = np.where(t < 1.0, np.exp(-1.0 / np.maximum(1.0 - t, 1e-300)), 0.0)
    return f / (f + g)


def lowpass_profile(r) -> np.ndarray:
    """chi(r): 1 for r <= 1, 0 for r >= 2, smooth and monotone between."""
    r = np.asarray(r, dtype=float)
    return _smoothstep(2.0 - r)


def annulus_profile(r) -> np.ndarray:
    """psi(r) = chi(r) - chi(2r): supported in 1/2 < r < 2, values in [0, 1].

    Dyadic dilates telescope: sum_{j>=1} psi(2^{-j} r) = 1 for every r >= 2.
    """
    r = np.asarray(r, dtype=float)
    return lowpass_profile(r) - lowpass_profile(2.0 * r)


class LPBump:
    """Namespace holding the fixed dyadic partition profile pair."""

    psi = staticmethod(annulus_profile)
    chi = staticmethod(lowpass_profile)

    @staticmethod
    def partition_defect(r, j_max: int = 64) -> np.ndarray:
        """|1 - sum_{j=1..j_max} psi(2^-j r)| for r >= 2 (telescopes to 0)."""
        r = np.asarray(r, dtype=float)
        total = np.zeros_like(r)
        for j in range(1, j_max + 1):
            total += annulus_profile(r / 2.0 ** j)
        return np.abs(1.0 - total)


# ---------------------------------------------------------------------------
# Transforms
# ---------------------------------------------------------------------------

def analyze(samples: np.ndarray, grid: TorusGrid) -> SpectralField:
    """Grid samples -> Fourier coefficients (forward DFT / m^d)."""
    samples = np.asarray(samples)
    if samples.shape != grid.shape:
        raise DimensionError(
            f"sample shape {samples.shape} != grid shape {grid.shape}"
        )
    return SpectralField(grid, np.fft.fftn(samples) / grid.m ** grid.d)


def synthesize(f: SpectralField) -> np.ndarray:
    """Fourier coefficients -> samples at the grid nodes."""
    return np.fft.ifftn(f.coeff * f.grid.m ** f.grid.d)


# ---------------------------------------------------------------------------
# Multipliers
# ---------------------------------------------------------------------------

def apply_multiplier(f: SpectralField, symbol: np.ndarray, odd: bool = False) -> SpectralField:
    """Multiply coefficients by a precomputed symbol array.

    odd=True zeroes the unpaired Nyquist rows (symbol has no well-defined
    value there since +m/2 and -m/2 coincide with opposite signs).
    """
    out = f.coeff * symbol
    if odd:
        out = np.where(f.grid.nyquist_mask(), 0.0, out)
    return SpectralField(f.grid, out)


def _require_mean_zero(f: SpectralField, s: float):
    if abs(f.mean()) != 0.0:
        raise SingularMultiplierError(
            f"|D|^{s} with s < 0 needs a mean-zero field; mean = {f.mean()}"
        )


def fractional_symbol(grid: TorusGrid, s: float) -> np.ndarray:
    """|k|^s with the k=0 entry set to 0 for s > 0 (and 0^0 = 1 at s = 0)."""
    kn = grid.k_norm()
    with np.errstate(divide="ignore"):
        sym = np.where(kn > 0.0, kn, 1.0) ** s
    sym = np.where(kn > 0.0, sym, 0.0 if s != 0.0 else 1.0)
    return sym


def apply_fractional_power(f: SpectralField, s: float) -> SpectralField:
    """|D|^s f: multiply coefficient at k by |k|^s.

    s < 0 is only defined on mean-zero fields (the symbol is singular at
    k = 0); s = 0 is the identity.
    """
    if s < 0.0:
        _require_mean_zero(f, s)
    return apply_multiplier(f, fractional_symbol(f.grid, s))


def symbol_derivative_values(grid: TorusGrid, s: float, beta: tuple) -> np.ndarray:
    """d^beta_xi |xi|^s evaluated on the integer lattice, |beta| <= 2.

    Closed forms:
      |beta| = 0:            |xi|^s
      beta = e_i:            s |xi|^{s-2} xi_i
      beta = e_i + e_j, i!=j: s (s-2) |xi|^{s-4} xi_i xi_j
      beta = 2 e_i:          s |xi|^{s-2} + s (s-2) |xi|^{s-4} xi_i^2
    The k = 0 entry is 0 for |beta| >= 1 (and follows the |k|^s convention
    for |beta| = 0).
    """
    order = sum(beta)
    kn = grid.k_norm()
    ks = grid.wavenumbers()
    safe = np.where(kn > 0.0, kn, 1.0)
    if order == 0:
        return fractional_symbol(grid, s)
    if order == 1:
        i = beta.index(1)
        sym = s * safe ** (s - 2.0) * ks[i]
    elif order == 2:
        if 2 in beta:
            i = beta.index(2)
            sym = s * safe ** (s - 2.0) + s * (s - 2.0) * safe ** (s - 4.0) * ks[i] ** 2
        else:
            i = beta.index(1)
            j = beta.index(1, i + 1)
            sym = s * (s - 2.0) * safe ** (s - 4.0) * ks[i] * ks[j]
    else:
        raise DomainError(f"|beta| = {order} > 2 has no closed form here")
    return np.where(kn > 0.0, sym, 0.0)


def apply_symbol_derivative(f: SpectralField, s: float, beta: tuple) -> SpectralField:
    """Multiplier i^{-|beta|} d^beta_xi(|xi|^s) at xi = k, for |beta| <= 2.

    Reduces to apply_fractional_power when beta = 0.  Odd |beta| gives an
    odd symbol, so the Nyquist rows are zeroed.
    """
    beta = tuple(int(b) for b in beta)
    if len(beta) != f.grid.d or any(b < 0 for b in beta):
        raise DimensionError(f"beta {beta} is not a multi-index for d = {f.grid.d}")
    order = sum(beta)
    if order > 2:
        raise DomainError(f"|beta| = {order} > 2 has no closed form here")
    if s < 0.0:
        _require_mean_zero(f, s)
    sym = symbol_derivative_values(f.grid, s, beta) * (-1j) ** order
    return apply_multiplier(f, sym, odd=(order % 2 == 1))


def apply_partial_derivative(f: SpectralField, beta: tuple) -> SpectralField:
    """d^beta f via the (ik)^beta multiplier; odd orders zero the Nyquist rows."""
    beta = tuple(int(b) for b in beta)
    if len(beta) != f.grid.d or any(b < 0 for b in beta):
        raise DimensionError(f"beta {beta} is not a multi-index for d = {f.grid.d}")
    ks = f.grid.wavenumbers()
    sym = np.ones(f.grid.shape, dtype=np.complex128)
    for i, b in enumerate(beta):
        if b:
            sym = sym * (1j * ks[i]) ** b
    return apply_multiplier(f, sym, odd=(sum(beta) % 2 == 1))


# ---------------------------------------------------------------------------
# Norms
# ---------------------------------------------------------------------------

def sobolev_norm(f: SpectralField, s: float) -> float:
    """H^s norm: ((2pi)^d sum_k (1+|k|^2)^s |uhat(k)|^2)^{1/2}."""
    kn2 = f.grid.k_norm() ** 2
    total = np.sum((1.0 + kn2) ** s * np.abs(f.coeff) ** 2)
    return float(np.sqrt(TWO_PI ** f.grid.d * total))


def lebesgue_norm(u_samples: np.ndarray, grid: TorusGrid, p: float) -> float:
    """L^p norm by grid quadrature; p = inf is the max over nodes.

    Exact for band-limited integrands of degree < m (so e.g. |u|^2 of a
    field with modes below m/2).
    """
    u_samples = np.asarray(u_samples)
    if u_samples.shape != grid.shape:
        raise DimensionError(
            f"sample shape {u_samples.shape} != grid shape {grid.shape}"
        )
    if p == math.inf:
        return float(np.max(np.abs(u_samples)))
    if p < 1.0:
        raise DomainError(f"L^p needs p >= 1 (or inf), got {p}")
    total = np.sum(np.abs(u_samples) ** p) * grid.cell_volume
    return float(total ** (1.0 / p))


def l2_norm(f: SpectralField) -> float:
    """L^2 norm straight from coefficients (Parseval)."""
    return float(np.sqrt(TWO_PI ** f.grid.d * np.sum(np.abs(f.coeff) ** 2)))


# ---------------------------------------------------------------------------
# Dyadic projections
# ---------------------------------------------------------------------------

def lp_project(f: SpectralField, j: int) -> SpectralField:
    """Littlewood-Paley block.

    j >= 1: multiplier psi(|k| / 2^j), an annulus at scale N = 2^j.
    j = 0: the complement block (multiplier chi(|k|)), i.e. everything the
    dyadic annuli do not cover; a constant field passes through unchanged.
    """
    if j < 0:
        raise DomainError(f"block index must be >= 0, got {j}")
    kn = f.grid.k_norm()
    if j == 0:
        return apply_multiplier(f, lowpass_profile(kn))
    if 2 ** (j + 1) > f.grid.m // 2:
        raise ResolutionError(
            f"block j = {j} reaches |k| < {2 ** (j + 1)} but the grid resolves |k| <= {f.grid.m // 2}"
        )
    return apply_multiplier(f, annulus_profile(kn / 2.0 ** j))


# ---------------------------------------------------------------------------
# Padded products (shared by energetics / evolution)
# ---------------------------------------------------------------------------

def pad_coefficients(f: SpectralField, factor: int) -> SpectralField:
    """Embed coefficients into a grid `factor` times finer (zero padding)."""
    if factor < 1:
        raise DomainError(f"padding factor must be >= 1, got {factor}")
    if factor == 1:
        return f
    m, d = f.grid.m, f.grid.d
    big = TorusGrid(d, factor * m)
    out = np.zeros(big.shape, dtype=np.complex128)
    half = m // 2
    idx_big = np.r_[0:half, factor * m - half : factor * m]
    out[np.ix_(*([idx_big] * d))] = f.coeff
    return SpectralField(big, out)


def truncate_coefficients(f: SpectralField, grid: TorusGrid) -> SpectralField:
    """Restrict coefficients back to a coarser grid (inverse of padding)."""
    M, m, d = f.grid.m, grid.m, grid.d
    if M == m:
        return SpectralField(grid, f.coeff)
    if M < m or f.grid.d != d:
        raise DimensionError("target grid must be a coarser grid of the same dimension")
    half = m // 2
    idx_big = np.r_[0:half, M - half : M]
    out = f.coeff[np.ix_(*([idx_big] * d))]
    return SpectralField(grid, out)


def padded_product(fields, grid: TorusGrid, factor: int, conjugate=None) -> SpectralField:
    """Pointwise product of several fields on a zero-padded grid.

    `conjugate` flags which factors enter conjugated.  The result is
    truncated back to `grid`; with factor >= number of factors the retained
    band is alias-free for band-limited inputs.
    """
    if conjugate is None:
        conjugate = [False] * len(fields)
    big = None
    prod = None
    for f, cj in zip(fields, conjugate):
        fp = pad_coefficients(f, factor)
        big = fp.grid
        vals = synthesize(fp)
        if cj:
            vals = np.conj(vals)
        prod = vals if prod is None else prod * vals
    return truncate_coefficients(analyze(prod, big), grid)
