"""Compare the compiled and NumPy quadrature kernels on a realistic gate.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat 20] [--modes 3]

Times the two kernels alone (pulse samples precomputed) and the full
``chi_numeric`` call, and checks that both backends agree.
"""
import argparse
import timeit

import numpy as np

from modeforge import kernels
from modeforge.evaluate import gate_grid
from modeforge.mec import analyze
from modeforge.modes import measured_spectrum, mhz_to_angular
from modeforge.pulses import design_gate, waveform


def setup(n_modes):
    tau = 191.7e-6
    freqs = np.linspace(2.963, 3.036, n_modes) if n_modes != 3 else [2.963, 3.005, 3.036]
    spec = measured_spectrum(mhz_to_angular(freqs))
    mec = analyze(spec, tau)
    spec = spec.with_frequencies(4 * np.pi * np.asarray(mec.k) / tau)
    gate = design_gate(spec, (0, 1), tau, 2 * min(mec.k) + 1)
    wf = waveform(gate)
    grid = gate_grid(wf, spec)
    g = wf.evaluate
    return {
        "grid": grid,
        "omega": np.asarray(spec.frequencies),
        "phase": np.zeros(spec.n_modes),
        "wg_out": grid.w_out * g(grid.nodes),
        "wg_in": grid.w_in * g(grid.inner_nodes),
    }


def run(backend, data):
    grid = data["grid"]
    a = kernels.phase_integrals(grid.starts, grid.off_out, data["wg_out"], data["omega"],
                                data["phase"], backend)
    c = kernels.ordered_double_integrals(grid.starts, grid.off_out, grid.off_in,
                                         data["wg_out"], data["wg_in"], data["omega"],
                                         backend)
    return a, c


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=20)
    parser.add_argument("--modes", type=int, default=3)
    args = parser.parse_args()

    data = setup(args.modes)
    print(f"panels: {data['grid'].n_panels}, modes: {args.modes}, "
          f"available backends: {sorted(kernels.BACKENDS)}")
    results, times = {}, {}
    for name in sorted(kernels.BACKENDS):
        results[name] = run(name, data)
        t = timeit.repeat(lambda: run(name, data), number=1, repeat=args.repeat)
        times[name] = min(t)
        print(f"{name:>7s}: best {1e3 * times[name]:8.3f} ms per (phase + ordered) pair")
    if "cython" in results:
        a_py, c_py = results["python"]
        a_cy, c_cy = results["cython"]
        # At exact closure the phase integrals cancel to round-off, so scale
        # differences by the size of the integrand instead of the result.
        scale = np.sum(np.abs(data["wg_out"]))
        err_a = np.max(np.abs(a_py - a_cy)) / scale
        err_c = np.max(np.abs(c_py - c_cy) / np.max(np.abs(c_py)))
        print(f"speed-up: {times['python'] / times['cython']:.2f}x; "
              f"max relative difference {max(err_a, err_c):.2e}")
    else:
        print("compiled extension not built; only the fallback was timed")


if __name__ == "__main__":
    main()
