"""Dual iteration traces and optimal energy efficiency versus deadline, disk radius, distance and power cap."""

import numpy as np
from _common import parser, write

from satrelay import optimizer as opt
from satrelay.config import ScenarioConfig

SWEEPS = {
    "T_total": ("optimizer.T_total", np.linspace(0.5, 5, 19), ""),
    "L": ("optimizer.L", np.linspace(5, 25, 11), "km"),
    "d0": ("optimizer.d0", np.linspace(800, 2400, 17), "km"),
    "P_S_max": ("optimizer.P_S_max", np.linspace(10, 100, 10), "W"),
}


def main():
    args = parser(__doc__).parse_args()
    rows = []
    for scenario in ("ni", "is"):
        for step in ("newton", "harmonic"):
            a = opt.optimize(ScenarioConfig.load().link_budget(scenario), step=step, max_iter=200)
            for i, (lam, eta) in enumerate(zip(a.lambda_trace, a.eta_trace)):
                rows.append([scenario, step, i, lam, eta])
    write(args.out, "optimizer_trace.csv", ["scenario", "step", "iteration", "lambda", "eta"], rows)

    for name, (field, values, unit) in SWEEPS.items():
        rows = []
        for v in values:
            cfg = ScenarioConfig.load(overrides=[f"{field}={float(v)!r} {unit}".strip()])
            row = [float(v)]
            for scenario in ("ni", "is"):
                try:
                    row.append(opt.optimize(cfg.link_budget(scenario)).eta)
                except opt.InfeasibleError:
                    row.append(float("nan"))
            rows.append(row)
        write(args.out, f"eta_vs_{name}.csv", [name, "eta_ni", "eta_is"], rows)


if __name__ == "__main__":
    main()
