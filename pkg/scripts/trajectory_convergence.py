"""Compare ensemble-averaged photon number with the master equation.

Reports, for several ensemble sizes, how many sample times fall outside
3 standard errors and how many of those have no member between emissions,
plus the time-averaged mean after the transient.

    python3 scripts/trajectory_convergence.py [--preset fig16] [--sizes 1000 10000]
"""
import argparse

import numpy as np
import scipy.linalg as sla

from atomopo.hilbert import enumerate_basis, number_operator
from atomopo.lindblad import build_liouvillian, vec
from atomopo.presets import get_preset
from atomopo.trajectories import default_trajectory_n_max, ensemble_average


def master_equation_mean(params, times):
    space = enumerate_basis(params.n_max)
    step = sla.expm(build_liouvillian(params, space) * (times[1] - times[0]))
    readout = vec(number_operator(space).T).real
    x = np.zeros(space.dim ** 2)
    x[0] = 1.0
    out = np.empty(len(times))
    for k in range(len(times)):
        out[k] = (readout @ x).real
        x = step @ x
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--preset", default="fig16")
    ap.add_argument("--sizes", type=int, nargs="+", default=[1000, 10000])
    ap.add_argument("--t-max", type=float)
    ap.add_argument("--sample-dt", type=float)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--transient", type=float, default=5.0, help="skip t < this for time averages")
    args = ap.parse_args()

    preset = get_preset(args.preset)
    params = preset.params()
    params = params.replace(n_max=default_trajectory_n_max(params))
    t_max = args.t_max or preset.t_max
    dt = args.sample_dt or preset.sample_dt
    exact = None
    print(f"{'n_traj':>7} {'outside 3SE':>12} {'SE==0':>6} {'mean(t>=T)':>12} {'exact':>12}")
    for n in args.sizes:
        ens = ensemble_average(params, n, t_max, seed=args.seed, sample_dt=dt)
        if exact is None:
            exact = master_equation_mean(params, ens.times)
        outside = np.abs(ens.photon_number - exact) > 3 * ens.photon_number_se
        late = ens.times >= args.transient
        print(f"{n:7d} {outside.sum():6d}/{len(outside):<5d} "
              f"{np.sum(outside & (ens.photon_number_se == 0)):6d} "
              f"{ens.photon_number[late].mean():12.5e} {exact[late].mean():12.5e}")


if __name__ == "__main__":
    main()
