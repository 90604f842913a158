"""Satellite-hop outage versus shadowing power, and end-to-end outage versus source power."""

import numpy as np
from _common import parser, simulate, write

from satrelay import analytic as an
from satrelay.config import ScenarioConfig


def main():
    args = parser(__doc__).parse_args()
    rows = []
    for psi in (30, 60, 90):
        for ps in (20, 30):
            for omega in np.arange(-20, 11, 2.5):
                cfg = ScenarioConfig.load(
                    overrides=[f"geometry.Psi={psi} deg", f"power.P_S={ps} dB", f"channel.Omega={omega} dB"]
                )
                out = an.outage_sr(cfg.geometry_params(), cfg.shadowed_rician(), 1.0, cfg.orders()).value
                row = [psi, ps, omega, out]
                if args.mc_trials:
                    row.append(simulate(cfg, "outage-sr", args.mc_trials, args.seed))
                rows.append(row)
    header = ["Psi_deg", "P_S_dB", "Omega_dB", "quadrature"] + (["mc"] if args.mc_trials else [])
    write(args.out, "outage_sr_vs_omega.csv", header, rows)

    rows = []
    base = ["geometry.H1=10 km", "geometry.L=5 km", "geometry.T_I=50 km"]
    for ps in np.arange(10, 51, 2.5):
        cfg = ScenarioConfig.load(overrides=base + [f"power.P_S={ps} dB"])
        g, sr, o = cfg.geometry_params(), cfg.shadowed_rician(), cfg.orders()
        ni = an.e2e_outage(g, sr, "ni", 1.0, 1.0, rician=cfg.rician(), orders=o, ni_method="exact").value
        is_ = an.e2e_outage(g, sr, "is", 1.0, 1.0, ip=cfg.interference(), orders=o).value
        row = [ps, ni, is_]
        if args.mc_trials:
            row += [simulate(cfg, "e2e-ni", args.mc_trials, args.seed), simulate(cfg, "e2e-is", args.mc_trials, args.seed)]
        rows.append(row)
    header = ["P_S_dB", "e2e_ni", "e2e_is"] + (["mc_ni", "mc_is"] if args.mc_trials else [])
    write(args.out, "e2e_vs_ps.csv", header, rows)


if __name__ == "__main__":
    main()
