"""Exact 2D discrete Fourier analysis of real grids.

Forward transforms are unnormalized, ``F(u, v) = sum_h sum_w x(h, w)
exp(-2j*pi*(h*u/H + w*v/W))``; the inverse carries the ``1/(H*W)`` factor.
All arithmetic is float64 / complex128 regardless of the input dtype.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
import scipy.fft

from freqpix import _kernels
from freqpix.errors import DimensionError, LayoutError, ValidationError

__all__ = [
    "Layout",
    "Spectrum",
    "dft2",
    "idft2",
    "decompose",
    "recompose",
    "shift",
    "unshift",
    "naive_dft2",
    "dft2_channels",
    "idft2_channels",
]


class Layout(enum.Enum):
    NATURAL = "natural"  # DC at (0, 0)
    CENTERED = "centered"  # DC at (H // 2, W // 2)


@dataclass(frozen=True)
class Spectrum:
    values: np.ndarray
    layout: Layout = Layout.NATURAL

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    @property
    def real(self) -> np.ndarray:
        return self.values.real

    @property
    def imag(self) -> np.ndarray:
        return self.values.imag


def _check_grid(grid) -> np.ndarray:
    grid = np.asarray(grid, dtype=np.float64)
    if grid.ndim != 2:
        raise DimensionError(f"expected a 2D grid, got shape {grid.shape}")
    if grid.size == 0:
        raise DimensionError("grid is empty")
    if not np.all(np.isfinite(grid)):
        raise ValidationError("grid contains non-finite values")
    return grid


def dft2(grid) -> Spectrum:
    """Full complex DFT of one real channel, DC at index (0, 0)."""
    grid = _check_grid(grid)
    return Spectrum(scipy.fft.fft2(grid), Layout.NATURAL)


def naive_dft2(grid) -> np.ndarray:
    """Direct double-sum DFT in O((HW)^2). Verification oracle only."""
    return _kernels.naive_dft2(_check_grid(grid))


def idft2(spectrum: Spectrum, *, return_residue: bool = False):
    """Real part of the inverse DFT.

    With ``return_residue=True`` also returns the largest absolute imaginary
    component that was discarded; it is ~1e-16 for Hermitian spectra and
    grows when the spectrum has lost conjugate symmetry.
    """
    if spectrum.layout is not Layout.NATURAL:
        raise LayoutError("idft2 needs a natural-layout spectrum; unshift it first")
    z = scipy.fft.ifft2(spectrum.values)
    if return_residue:
        resid = float(np.max(np.abs(z.imag))) if z.size else 0.0
        return z.real.copy(), resid
    return z.real.copy()


def decompose(spectrum: Spectrum) -> tuple[np.ndarray, np.ndarray]:
    """Amplitude and four-quadrant phase in (-pi, pi]; phase 0 where both parts are 0."""
    re = spectrum.values.real
    im = spectrum.values.imag
    amplitude = np.hypot(re, im)
    phase = np.arctan2(im, re)
    # atan2 returns -pi for (negative, -0.0); fold it into the half-open range
    phase[phase == -np.pi] = np.pi
    # (±0, ±0) -> +0 rather than ±pi or -0
    phase[amplitude == 0.0] = 0.0
    return amplitude, phase


def recompose(amplitude, phase, layout: Layout = Layout.NATURAL) -> Spectrum:
    amplitude = np.asarray(amplitude, dtype=np.float64)
    phase = np.asarray(phase, dtype=np.float64)
    if amplitude.shape != phase.shape:
        raise DimensionError(
            f"amplitude {amplitude.shape} and phase {phase.shape} differ in shape"
        )
    values = np.empty(amplitude.shape, dtype=np.complex128)
    values.real = amplitude * np.cos(phase)
    values.imag = amplitude * np.sin(phase)
    return Spectrum(values, layout)


def shift(spectrum: Spectrum) -> Spectrum:
    """Toggle the layout: natural -> centered via fftshift, centered -> natural via ifftshift."""
    if spectrum.layout is Layout.NATURAL:
        return Spectrum(np.fft.fftshift(spectrum.values), Layout.CENTERED)
    return Spectrum(np.fft.ifftshift(spectrum.values), Layout.NATURAL)


def unshift(spectrum: Spectrum) -> Spectrum:
    if spectrum.layout is not Layout.CENTERED:
        raise LayoutError("spectrum is already in natural layout")
    return shift(spectrum)


# multi-channel helpers used by the mixing hot path; tensors are (H, W, C),
# spectra come back as (C, H, W) so each channel is contiguous


def dft2_channels(tensor: np.ndarray) -> np.ndarray:
    chw = np.ascontiguousarray(np.moveaxis(np.asarray(tensor, dtype=np.float64), -1, 0))
    return scipy.fft.fft2(chw, axes=(-2, -1))


def idft2_channels(spectra: np.ndarray) -> tuple[np.ndarray, float]:
    z = scipy.fft.ifft2(spectra, axes=(-2, -1))
    resid = float(np.max(np.abs(z.imag))) if z.size else 0.0
    return np.moveaxis(z.real, 0, -1), resid
