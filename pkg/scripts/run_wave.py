"""Wave decay on the rank-2 group: field samples, leading term and fitted rate."""
from dataclasses import dataclass

import numpy as np
from scipy.special import gamma

from schottky_lab.dimension import ps_measure
from schottky_lab.hyperbolic import HPoint
from schottky_lab.resolvent import estimate_A_X
from schottky_lab.schottky import SchottkyGroup
from schottky_lab.wave import InitialData, decay_fit, leading_term, remainder_analysis, wave_field
from schottky_lab.zeta import zeta_real_root


@dataclass
class WaveConfig:
    pairs: tuple = ((-2.0, 1.0, 2.0, 1.0), (-6.0, 1.0, 6.0, 1.0))
    source: tuple = (0.0, 1.5)
    point: tuple = (4.0, 1.0)
    samples: tuple = ((0.0, 1.5), (4.0, 1.0), (-0.5, 2.5))
    mollifier: float = 1.0
    band: float = 40.0
    times: tuple = (5.0, 15.0, 0.5)


def main(cfg=WaveConfig()):
    group = SchottkyGroup.from_disk_pairs(cfg.pairs)
    delta = zeta_real_root(group)
    mu = ps_measure(group, delta, 10)
    residue = estimate_A_X(group, mu, delta, [HPoint.at(*s) for s in cfg.samples], L=10)
    src, m = HPoint.at(*cfg.source), HPoint.at(*cfg.point)
    data = InitialData(((src, 2.0),), ((src, 1.0),), cfg.mollifier)
    t0, t1, dt = cfg.times
    ts = np.arange(t0, t1 + dt / 2, dt)
    u = wave_field(ts, m, data, cfg.band, 14, group)
    lead = leading_term(m, data, residue, mu, delta)
    print("t  u  leading  ratio")
    for t, v in zip(ts, u):
        print(f"{t:5.1f} {v: .6e} {lead(t): .6e} {v / lead(t):.5f}")
    fit = decay_fit(list(zip(ts, u)), delta)
    print(f"rate {fit.rate:.6f} predicted {fit.predicted_rate:.6f} rel_error {fit.rel_rate_error:.3e}")
    alt = gamma(delta + 0.5) / gamma(1.5 - delta)
    print(f"ratio at t=12 with the alternative Gamma factor: {u[ts == 12][0] / (lead(12) * alt):.5f}")
    print("remainder", remainder_analysis(list(zip(ts, u)), lead, delta))


if __name__ == "__main__":
    main()
