"""Coverage versus relay SNR (no interference) and versus interferer disk radius."""

import numpy as np
from _common import parser, simulate, write

from satrelay import analytic as an
from satrelay.config import ScenarioConfig


def main():
    args = parser(__doc__).parse_args()
    rows = []
    for H1 in (5, 10, 20):
        for L in (10, 20):
            for omega in np.arange(-10, 61, 5):
                cfg = ScenarioConfig.load(
                    overrides=[f"geometry.H1={H1} km", f"geometry.L={L} km", f"channel.Omega_R={omega} dB"]
                )
                g, r, t = cfg.geometry_params(), cfg.rician(), cfg.thresholds["gamma_th"]
                row = [H1, L, omega, an.coverage_ni_exact(g, r, t).value, an.coverage_ni_approx(g, r, t).value]
                if args.mc_trials:
                    row.append(simulate(cfg, "coverage-ni", args.mc_trials, args.seed))
                rows.append(row)
    header = ["H1_km", "L_km", "Omega_R_dB", "exact", "closed_form"] + (["mc"] if args.mc_trials else [])
    write(args.out, "coverage_ni_vs_omega.csv", header, rows)

    rows = []
    for L in (5, 10):
        for T_I in np.arange(15, 101, 5):
            cfg = ScenarioConfig.load(overrides=[f"geometry.L={L} km", f"geometry.T_I={T_I} km"])
            row = [L, T_I, an.coverage_interference(cfg.geometry_params(), cfg.interference(), 1.0, cfg.orders()).value]
            if args.mc_trials:
                row.append(simulate(cfg, "coverage-is", args.mc_trials, args.seed))
            rows.append(row)
    write(args.out, "coverage_is_vs_TI.csv", ["L_km", "T_I_km", "quadrature"] + (["mc"] if args.mc_trials else []), rows)


if __name__ == "__main__":
    main()
