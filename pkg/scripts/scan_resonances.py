"""Scan a rectangle for resonances of the rank-2 group and print the counting census."""
import argparse
import time
from dataclasses import dataclass

import numpy as np

from schottky_lab.schottky import SchottkyGroup
from schottky_lab.zeta import counting_census, find_resonances, zeta_real_root


@dataclass
class ScanConfig:
    pairs: tuple = ((-2.0, 1.0, 2.0, 1.0), (-6.0, 1.0, 6.0, 1.0))
    rect: tuple = (-1.95, 0.31, 0.05, 5.0)
    grid_step: float = 0.05
    strip_eps: float = 0.2


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--im-max", type=float, default=ScanConfig.rect[3])
    cfg = ScanConfig()
    cfg.rect = cfg.rect[:3] + (ap.parse_args().im_max,)
    group = SchottkyGroup.from_disk_pairs(cfg.pairs)
    delta = zeta_real_root(group)
    t0 = time.perf_counter()
    hits = find_resonances(group, cfg.rect, cfg.grid_step)
    print(f"delta {delta:.15f}; {len(hits)} resonances in {cfg.rect} ({time.perf_counter() - t0:.1f}s)")
    for h in hits:
        print(f"  {h.lam.real: .12f} {h.lam.imag:+.12f}i  mult {h.multiplicity}")
    rep = counting_census(hits, delta, cfg.strip_eps, radii=list(np.geomspace(1.5, cfg.rect[3], 8)))
    print("radii", np.round(rep.radii, 3).tolist())
    print("N(r)", rep.counts, "strip", rep.strip_counts)
    print("slopes", rep.fitted_exponents)


if __name__ == "__main__":
    main()
