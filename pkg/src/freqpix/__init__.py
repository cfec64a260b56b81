"""Frequency-pixel mixing augmentation and a class/domain connectivity lab."""

from freqpix._kernels import BACKEND
from freqpix.mixing import (
    CropRegion,
    MixAudit,
    MixParams,
    apply_mix,
    frequency_augment,
    frequency_pixel_mix,
    fuse,
    mix_amplitude,
    pixel_blend,
)
from freqpix.sampler import PairingStrategy, SampleRecord, derive_stream, select_target
from freqpix.spectral import Layout, Spectrum, decompose, dft2, idft2, recompose, shift, unshift

__version__ = "0.1.0"
