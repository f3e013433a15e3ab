"""Named, seeded initial-data families.

Fixed names keep long runs reproducible: a config file stating
family/amplitude/seed pins the state bit-for-bit (counter-based RNG).
"""
from __future__ import annotations

import math
from typing import Optional

import numpy as np

from .errors import DomainError
from .kernel import sharpness_wavepacket
from .spectral import SpectralField, TorusGrid

FAMILY_NAMES = ("single-bump", "annulus", "random-smooth", "random-annulus")


def single_bump(grid: TorusGrid, amplitude: float = 1.0,
                tau: float = 0.1) -> SpectralField:
    """Truncated heat kernel: c(k) = amplitude e^{-tau |k|^2}, a smooth
    positive bump centered at the origin."""
    if tau <= 0.0:
        raise DomainError(f"tau must be positive, got {tau}")
    coeff = amplitude * np.exp(-tau * grid.k_norm() ** 2)
    return SpectralField(grid, coeff.astype(np.complex128))


def annulus(grid: TorusGrid, N: int, amplitude: float = 1.0) -> SpectralField:
    """Scaled sharpness wavepacket: unit coefficients on N <= |k| <= 2N."""
    return sharpness_wavepacket(grid, N) * amplitude


def random_smooth(grid: TorusGrid, seed: int, amplitude: float = 1.0,
                  decay: float = 2.0) -> SpectralField:
    """Seeded complex Gaussian coefficients damped by (1 + |k|^2)^{-decay}."""
    if decay < 0.0:
        raise DomainError(f"decay must be >= 0, got {decay}")
    rng = np.random.Generator(np.random.Philox(seed))
    shape = grid.shape
    vals = (rng.normal(size=shape) + 1j * rng.normal(size=shape)) / math.sqrt(2.0)
    coeff = amplitude * (1.0 + grid.k_norm() ** 2) ** (-decay) * vals
    return SpectralField(grid, coeff)


def random_annulus(grid: TorusGrid, N: int, seed: int,
                   amplitude: float = 1.0) -> SpectralField:
    """Seeded random-phase state on the annulus N <= |k| <= 2N.

    Complex Gaussian coefficients restricted to the shell, L^2-normalized,
    then scaled: ||u||_{L^2} = amplitude exactly.  Raising N pushes the
    state to high frequency at fixed mass.
    """
    rng = np.random.Generator(np.random.Philox(seed))
    shape = grid.shape
    vals = (rng.normal(size=shape) + 1j * rng.normal(size=shape)) / math.sqrt(2.0)
    knorm = grid.k_norm()
    mask = (knorm >= N) & (knorm <= 2 * N) & ~grid.nyquist_mask()
    coeff = np.where(mask, vals, 0.0)
    norm2 = float(np.sum(np.abs(coeff) ** 2))
    if norm2 == 0.0:
        raise DomainError(f"annulus {N} <= |k| <= {2 * N} is empty on this grid")
    scale = amplitude / math.sqrt((2.0 * math.pi) ** grid.d * norm2)
    return SpectralField(grid, coeff * scale)


def make_initial_data(grid: TorusGrid, family: str, amplitude: float = 1.0,
                      seed: Optional[int] = None, **params) -> SpectralField:
    """Dispatch by family name; randomized families require a seed."""
    if family == "single-bump":
        return single_bump(grid, amplitude, **params)
    if family == "annulus":
        return annulus(grid, amplitude=amplitude, **params)
    if family == "random-smooth":
        if seed is None:
            raise DomainError("random-smooth requires a seed")
        return random_smooth(grid, seed, amplitude, **params)
    if family == "random-annulus":
        if seed is None:
            raise DomainError("random-annulus requires a seed")
        return random_annulus(grid, seed=seed, amplitude=amplitude, **params)
    raise DomainError(f"unknown family {family!r}; choose from {FAMILY_NAMES}")
