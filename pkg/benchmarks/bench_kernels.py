"""Timings for the compiled kernel lane against the pure-numpy fallback.

Run:  python benchmarks/bench_kernels.py
"""

import time

import numpy as np

import hesscone.kernels as kernels
from hesscone.cones import lines_cone, trace_cone
from hesscone.dirichlet import DirichletProblem, ma_solve_2d, perron_solve


def timeit(fn, repeat=3):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_eigh(backend):
    gen = np.random.Generator(np.random.Philox(3))
    mats = gen.normal(size=(20000, 3, 3))
    mats = mats + np.swapaxes(mats, 1, 2)
    be = kernels.get_backend(backend)
    return timeit(lambda: be.eigh(mats))


def envelope_problem():
    phi = lambda p: np.sqrt((p[:, 0] - 0.3) ** 2 + p[:, 1] ** 2)
    return DirichletProblem(((-1.0, 1.0), (-1.0, 1.0)), 0.05,
                            lines_cone(2, density=32), phi)


def harmonic_problem_3d():
    phi = lambda p: p[:, 0] ** 2 - 0.5 * p[:, 1] ** 2 - 0.5 * p[:, 2] ** 2
    return DirichletProblem(((-1.0, 1.0),) * 3, 0.1, trace_cone(3), phi)


def bench_solve(backend, make, solver=perron_solve, **kw):
    prob = make()
    return timeit(lambda: solver(prob, backend=backend, **kw), repeat=1)


def main():
    rows = []
    have_ext = True
    try:
        kernels.get_backend("ext")
    except RuntimeError:
        have_ext = False

    lanes = ["ext", "pure"] if have_ext else ["pure"]
    print(f"lanes available: {', '.join(lanes)}\n")
    header = f"{'benchmark':38s}" + "".join(f"{l:>12s}" for l in lanes)
    print(header)
    print("-" * len(header))

    def report(name, times):
        line = f"{name:38s}" + "".join(f"{t:>11.3f}s" for t in times)
        if len(times) == 2 and times[1] > 0:
            line += f"   x{times[1] / times[0]:.1f}"
        print(line)

    report("jacobi eigh, 20k 3x3 batch",
           [bench_eigh(l) for l in lanes])
    report("convex envelope 41x41, 32 lines",
           [bench_solve(l, envelope_problem, tol=1e-9) for l in lanes])
    report("subharmonic 21^3 solve",
           [bench_solve(l, harmonic_problem_3d, tol=1e-8) for l in lanes])
    report("monge-ampere 41x41, c=4",
           [bench_solve(l, lambda: DirichletProblem(
               ((-1.0, 1.0), (-1.0, 1.0)), 0.05, lines_cone(2, density=8),
               lambda p: (p ** 2).sum(axis=1)),
               solver=lambda prob, backend, **kw: ma_solve_2d(
                   prob, 4.0, backend=backend, **kw), tol=1e-9)
            for l in lanes])


if __name__ == "__main__":
    main()
