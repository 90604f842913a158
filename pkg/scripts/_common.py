import argparse
import csv
from pathlib import Path

from satrelay import montecarlo as mc
from satrelay.config import ScenarioConfig


def parser(description):
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--out", default="results", help="output directory")
    p.add_argument("--mc-trials", type=int, default=0, help="add Monte-Carlo columns (0 skips)")
    p.add_argument("--seed", type=int, default=0)
    return p


def write(out_dir, name, header, rows):
    path = Path(out_dir) / name
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    print(f"wrote {path} ({len(rows)} rows)")


def simulate(cfg: ScenarioConfig, target, trials, seed):
    chans = mc.ChannelSet(cfg.rician(), cfg.interference(), cfg.shadowed_rician())
    thr = mc.Thresholds(cfg.thresholds["gamma_th"], cfg.thresholds["gamma_out"])
    return mc.mc_estimate(mc.McConfig(target, trials, seed), cfg.geometry_params(), chans, thr).mean
