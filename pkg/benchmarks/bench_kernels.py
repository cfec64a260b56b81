"""Compare the numba and numpy kernel backends, then time the whole mix.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Both backends are imported in one process; the public kernel names are
rebound for the pipeline timings the same way FREQPIX_NO_NUMBA=1 would.
"""

import argparse
import time

import numpy as np

from freqpix import _kernels
from freqpix.mixing import MixParams, frequency_pixel_mix
from freqpix.sampler import derive_stream


def best_of(fn, repeat):
    fn()  # compile / warm caches
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def kernel_inputs(rng):
    f = rng.standard_normal((3, 256, 256)) + 1j * rng.standard_normal((3, 256, 256))
    g = rng.standard_normal((3, 256, 256)) + 1j * rng.standard_normal((3, 256, 256))
    x = rng.random((256, 256, 3))
    X = rng.standard_normal((480, 256))
    y = (X[:, 0] > 0).astype(float)
    return {
        "naive_dft2": (rng.random((16, 16)),),
        "mix_spectrum": (f, g, 0.4, 64, 64, 128, 128),
        "blend_fuse": (x, x[::-1].copy(), x[:, ::-1].copy(), 0.5, 0.5),
        "resize": (x, 180, 320),
        "logistic_fit": (X, y, 0.5, 200, 0.01),
    }


def bind(index):
    for name, impls in _kernels.IMPLEMENTATIONS.items():
        setattr(_kernels, name, impls[index])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--images", type=int, default=40)
    args = ap.parse_args()
    rng = np.random.default_rng(0)

    print(f"numba available: {_kernels.HAVE_NUMBA}\n")
    print(f"{'kernel':<14}{'numpy ms':>10}{'numba ms':>10}{'speedup':>9}")
    for name, inputs in kernel_inputs(rng).items():
        np_impl, nb_impl = _kernels.IMPLEMENTATIONS[name]
        t_np = best_of(lambda: np_impl(*inputs), args.repeat)
        t_nb = best_of(lambda: nb_impl(*inputs), args.repeat)
        print(f"{name:<14}{t_np * 1e3:>10.2f}{t_nb * 1e3:>10.2f}{t_np / t_nb:>8.1f}x")

    x1, x2 = rng.random((256, 256, 3)), rng.random((256, 256, 3))
    params = MixParams(prob=1.0)
    print(f"\nfull mix, 256x256x3, {args.images} images, one process")
    for label, index in (("numpy", 0), ("numba", 1)):
        bind(index)

        def run():
            for i in range(args.images):
                frequency_pixel_mix(x1, x2, params, derive_stream(0, i), resid_ceiling=None)

        t = best_of(run, max(1, args.repeat // 2))
        print(f"  {label:<6}{args.images / t:>8.1f} images/s")
    bind(1 if _kernels.USE_NUMBA else 0)


if __name__ == "__main__":
    main()
