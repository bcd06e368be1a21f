"""Compare the numba and numpy kernel backends on the same inputs.

    python benchmarks/bench_kernels.py [--trials 100000] [--repeat 3]

Both backends are called directly, so the QTELEPORT_DISABLE_NUMBA flag does
not matter here. Each timing is the best of ``--repeat`` runs after one
warm-up call (which also pays the JIT compile cost).
"""
import argparse
import time

import numpy as np

from qteleport import kernels
from qteleport._accel import HAVE_NUMBA
from qteleport.gates import BELL_MATRIX
from qteleport.povm import ChannelParams, build_povm, min_x
from qteleport.protocol import InputState, _recovery_array, prepare_world


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def trial_args(trials, seed):
    rng = np.random.default_rng(seed)
    inp, ch = InputState.random(rng), ChannelParams.random(rng)
    povm = build_povm(ch, min_x(ch) * 1.2)
    return (
        prepare_world(inp, ch).amplitudes.copy(),
        BELL_MATRIX,
        np.array([k.matrix for k in povm.kraus]),
        np.array([v.amplitudes for v in povm.outcome_vectors]),
        _recovery_array(),
        inp.coefficients,
        rng.random((trials, 3)),
    )


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--trials", type=int, default=100_000)
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    if not HAVE_NUMBA:
        print("numba is not installed; both columns run the numpy path")

    rng = np.random.default_rng(args.seed)
    n = 8
    amps = rng.standard_normal(2**n) + 1j * rng.standard_normal(2**n)
    mat = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    bra = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    targets = np.array([5, 2], dtype=np.int64)
    z = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    herm = (z + z.conj().T) / 2
    targs = trial_args(args.trials, args.seed)
    loops = 2000

    cases = [
        (
            f"apply_matrix x{loops} (8 qubits)",
            lambda: [kernels.apply_matrix_nb(amps, n, mat, targets) for _ in range(loops)],
            lambda: [kernels.apply_matrix_np(amps, n, mat, targets) for _ in range(loops)],
        ),
        (
            f"contract x{loops} (8 qubits)",
            lambda: [kernels.contract_nb(amps, n, targets, bra) for _ in range(loops)],
            lambda: [kernels.contract_np(amps, n, targets, bra) for _ in range(loops)],
        ),
        (
            f"jacobi_eigh x{loops} (4x4)",
            lambda: [kernels.jacobi_eigh_nb(herm) for _ in range(loops)],
            lambda: [kernels.jacobi_eigh_np(herm) for _ in range(loops)],
        ),
        (
            f"simulate_trials ({args.trials} trials)",
            lambda: kernels.simulate_trials_nb(*targs),
            lambda: kernels.simulate_trials_np(*targs),
        ),
    ]

    print(f"{'kernel':<36}{'numba [s]':>12}{'numpy [s]':>12}{'ratio':>8}")
    for name, nb, np_ in cases:
        t_nb, t_np = best_of(nb, args.repeat), best_of(np_, args.repeat)
        print(f"{name:<36}{t_nb:>12.4f}{t_np:>12.4f}{t_np / t_nb:>8.1f}")

    a, b = kernels.simulate_trials_nb(*targs), kernels.simulate_trials_np(*targs)
    same = all(np.array_equal(x, y) for x, y in zip(a[:3], b[:3]))
    print(f"trial outcomes identical across backends: {same}")


if __name__ == "__main__":
    main()
