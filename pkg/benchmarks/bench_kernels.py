"""Compare the compiled and pure-Python transform kernels.

    python benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from wavemorph import _backend

CASES = [(32, 32, 1), (256, 256, 1), (1024, 1024, 1), (256, 256, 3)]


def _inputs(h, w, c):
    rng = np.random.default_rng(0)
    x = np.ascontiguousarray(rng.random((h, w, c)))
    bands = [np.ascontiguousarray(b) for b in _backend.python_kernels.haar_forward(x)]
    return x, bands


def _best(fn, repeat):
    number = max(1, int(0.2 / max(timeit.timeit(fn, number=1), 1e-7)))
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = {"python": _backend.python_kernels}
    if _backend.compiled_kernels is not None:
        backends["compiled"] = _backend.compiled_kernels
    else:
        print("compiled kernels not built; timing the python fallback only")
    print(f"{'kernel':<16}{'shape':>16}" + "".join(f"{n:>14}" for n in backends) + "   speedup")
    for h, w, c in CASES:
        x, bands = _inputs(h, w, c)
        jobs = {
            "haar_forward": lambda k: k.haar_forward(x),
            "haar_inverse": lambda k: k.haar_inverse(*bands),
            "bilinear_resize": lambda k: k.bilinear_resize(x, h // 2 + 3, w // 2 + 3),
        }
        for name, job in jobs.items():
            times = {b: _best(lambda: job(k), args.repeat) for b, k in backends.items()}
            cells = "".join(f"{times[b] * 1e6:>12.1f}us" for b in backends)
            speed = f"{times['python'] / times['compiled']:>9.1f}x" if "compiled" in times else ""
            print(f"{name:<16}{f'{h}x{w}x{c}':>16}{cells}{speed}")


if __name__ == "__main__":
    main()
