"""Command-line entry point: config ingestion, one command per experiment, CSV/JSON artifacts.

Every artifact starts with a header recording the SHA-256 of the canonical config
and the tool version.  Numbers are written with 17 significant digits.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import BudgetError, ConfigError, ConvergenceError, DomainError, SchottkyViolation

VERSION = "0.1.0"
EXIT_OK, EXIT_CONFIG, EXIT_CONVERGENCE = 0, 2, 3
DEFAULT_BUDGETS = {"word_count": 10 ** 7, "N_max": 14, "R_cut": 60.0}
DEFAULT_SAMPLES = ((0.0, 1.5), (4.0, 1.0), (-0.5, 2.5))


@dataclass(frozen=True)
class RunConfig:
    pairs: tuple  # (c_src, r_src, c_dst, r_dst) per generator
    n: int = 1
    euler_char: int | None = None
    dk_values: tuple = ()
    budgets: dict = field(default_factory=lambda: dict(DEFAULT_BUDGETS))
    tolerances: dict = field(default_factory=dict)
    seed: int = 0
    digest: str = ""

    def group(self):
        from .schottky import SchottkyGroup, require_valid
        return require_valid(SchottkyGroup.from_disk_pairs(self.pairs, self.euler_char, self.dk_values))


def _number(obj, key, where, positive=False):
    if key not in obj:
        raise ConfigError(f"missing field '{where}{key}'")
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not np.isfinite(v):
        raise ConfigError(f"field '{where}{key}' must be a finite number, got {v!r}")
    if positive and v <= 0:
        raise ConfigError(f"field '{where}{key}' must be positive, got {v!r}")
    return float(v)


def parse_config(text: str) -> RunConfig:
    """Validate a JSON config; errors name the offending field."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(raw, dict):
        raise ConfigError("top-level config must be a JSON object")
    n = raw.get("n", 1)
    if n != 1:
        raise ConfigError(f"field 'n' must be 1 (surfaces only), got {n!r}")
    gens = raw.get("generators")
    if not isinstance(gens, list) or not gens:
        raise ConfigError("field 'generators' must be a non-empty list")
    pairs = []
    for i, g in enumerate(gens):
        if not isinstance(g, dict):
            raise ConfigError(f"field 'generators[{i}]' must be an object")
        where = f"generators[{i}]."
        pairs.append((_number(g, "c_src", where), _number(g, "r_src", where, True),
                      _number(g, "c_dst", where), _number(g, "r_dst", where, True)))
    chi = raw.get("euler_char", 1 - len(pairs))
    if isinstance(chi, bool) or not isinstance(chi, int):
        raise ConfigError(f"field 'euler_char' must be an integer, got {chi!r}")
    dk = raw.get("dk", [])
    if not isinstance(dk, list) or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in dk):
        raise ConfigError("field 'dk' must be a list of numbers")
    budgets = dict(DEFAULT_BUDGETS)
    user_budgets = raw.get("budgets", {})
    if not isinstance(user_budgets, dict):
        raise ConfigError("field 'budgets' must be an object")
    for key in user_budgets:
        if key not in DEFAULT_BUDGETS:
            raise ConfigError(f"unknown field 'budgets.{key}'")
        budgets[key] = _number(user_budgets, key, "budgets.", positive=True)
    budgets["word_count"] = int(budgets["word_count"])
    budgets["N_max"] = int(budgets["N_max"])
    tol = raw.get("tolerances", {})
    if not isinstance(tol, dict):
        raise ConfigError("field 'tolerances' must be an object")
    seed = raw.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigError(f"field 'seed' must be an integer, got {seed!r}")
    canonical = json.dumps(raw, sort_keys=True, separators=(",", ":"))
    digest = hashlib.sha256(canonical.encode()).hexdigest()
    return RunConfig(tuple(pairs), 1, chi, tuple(float(v) for v in dk), budgets, dict(tol), seed, digest)


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config '{path}': {exc.strerror}") from None
    return parse_config(text)


def fmt(x) -> str:
    return f"{float(x):.17g}"


def header_line(cfg: RunConfig) -> str:
    return f"# config_sha256={cfg.digest} version={VERSION}"


def write_csv(path, cfg: RunConfig, columns, rows):
    lines = [header_line(cfg), ",".join(columns)]
    for row in rows:
        lines.append(",".join(v if isinstance(v, str) else fmt(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _floats(obj):
    if isinstance(obj, dict):
        return {k: _floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_floats(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        return float(fmt(obj))
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def write_json(path, cfg: RunConfig, payload: dict):
    doc = {"header": {"config_sha256": cfg.digest, "version": VERSION}}
    doc.update(_floats(payload))
    Path(path).write_text(json.dumps(doc, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def read_resonances_csv(path):
    from .zeta import ResonanceHit
    hits = []
    with open(path, encoding="utf-8") as fh:
        rows = [ln.strip() for ln in fh if ln.strip() and not ln.startswith("#")]
    cols = rows[0].split(",")
    for ln in rows[1:]:
        rec = dict(zip(cols, ln.split(",")))
        lam = complex(float(rec["re"]), float(rec["im"]))
        w, h = float(rec["box_w"]), float(rec["box_h"])
        box = (lam.real - w / 2, lam.real + w / 2, lam.imag - h / 2, lam.imag + h / 2)
        hits.append(ResonanceHit(lam, int(rec["multiplicity"]), float(rec["newton_residual"]), box))
    return hits


def _tuple(text, count, name):
    try:
        vals = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise ConfigError(f"option '{name}' must be {count} comma-separated numbers") from None
    if len(vals) != count:
        raise ConfigError(f"option '{name}' must be {count} comma-separated numbers")
    return vals


# commands ---------------------------------------------------------------------------------

def cmd_delta(args, cfg):
    from .dimension import estimate_delta
    from .zeta import zeta_real_root
    group = cfg.group()
    est = estimate_delta(group, args.max_word_len, cfg.budgets["word_count"])
    root = zeta_real_root(group)
    print(f"delta {fmt(est.value)} bracket [{fmt(est.bracket[0])}, {fmt(est.bracket[1])}] "
          f"zeta_root {fmt(root)} L {est.word_length_used}")
    if args.out:
        write_json(args.out, cfg, {"delta": est.value, "bracket": list(est.bracket), "zeta_root": root,
                                   "word_length_used": est.word_length_used, "method": est.method})


def cmd_psmeasure(args, cfg):
    from .dimension import estimate_delta, ps_measure
    group = cfg.group()
    delta = args.delta if args.delta is not None else estimate_delta(group, 12, cfg.budgets["word_count"]).value
    mu = ps_measure(group, delta, args.level, cfg.budgets["word_count"])
    print(f"atoms {len(mu.atoms)} exponent {fmt(mu.exponent)} mean {fmt(mu.mean())}")
    if args.out:
        write_csv(args.out, cfg, ("atom", "weight"), zip(mu.atoms, mu.weights))


def cmd_zeta_eval(args, cfg):
    from .zeta import TransferDeterminant, nodes_for_height, zeta_cycle
    group = cfg.group()
    lam = complex(*_tuple(args.lam, 2, "--lam"))
    if args.method == "cycle":
        val = zeta_cycle(lam, group, cfg.budgets["N_max"])
    else:
        val = TransferDeterminant(group, args.nodes or nodes_for_height(lam.imag)).value(lam)
    print(f"lambda {fmt(lam.real)},{fmt(lam.imag)} Z {fmt(val.value.real)},{fmt(val.value.imag)} "
          f"bound {fmt(val.truncation_bound)} method {val.method}")


def _resonance_search(args, cfg):
    from .zeta import find_resonances
    rect = _tuple(args.rect, 4, "--rect")
    return find_resonances(cfg.group(), rect, args.grid, args.nodes)


def cmd_resonances(args, cfg):
    hits = _resonance_search(args, cfg)
    print(f"resonances {len(hits)} total_multiplicity {sum(h.multiplicity for h in hits)}")
    rows = [(h.lam.real, h.lam.imag, str(h.multiplicity), h.newton_residual, h.box_w, h.box_h) for h in hits]
    write_csv(args.out, cfg, ("re", "im", "multiplicity", "newton_residual", "box_w", "box_h"), rows)


def cmd_census(args, cfg):
    from .dimension import estimate_delta
    from .zeta import counting_census
    group = cfg.group()
    hits = read_resonances_csv(args.resonances) if args.resonances else _resonance_search(args, cfg)
    delta = estimate_delta(group, 12, cfg.budgets["word_count"]).value
    rep = counting_census(hits, delta, args.eps)
    print(f"slope_all {fmt(rep.fitted_exponents[0])} slope_strip {fmt(rep.fitted_exponents[1])}")
    if args.out:
        write_csv(args.out, cfg, ("r", "count", "strip_count"),
                  [(r, str(c), str(s)) for r, c, s in zip(rep.radii, rep.counts, rep.strip_counts)])


def cmd_trace(args, cfg):
    from .schottky import primitive_geodesics
    from .trace import TestFunction, cylinder_resonances, trace_report
    group = cfg.group()
    R_cut = args.r_cut if args.r_cut is not None else cfg.budgets["R_cut"]
    d = args.d if args.d is not None else primitive_geodesics(group, 20.0).lengths.min()
    tf = TestFunction(args.alpha, d)
    if group.rank == 1:
        hits = cylinder_resonances(primitive_geodesics(group, 20.0).lengths.min(), R_cut)
    elif args.resonances:
        hits = read_resonances_csv(args.resonances)
    else:
        raise ConfigError("option '--resonances' is required for groups of rank > 1")
    rep = trace_report(group, tf, R_cut, hits)
    print(f"geometric {fmt(rep.geometric)} spectral {fmt(rep.spectral)} rel_discrepancy "
          f"{fmt(rep.rel_discrepancy)} informative {rep.informative}")
    write_csv(args.out, cfg, ("d", "alpha", "geodesic", "topological", "resonance", "dk", "tail_bound",
                              "rel_discrepancy"),
              [(tf.d, tf.alpha, rep.geodesic_sum, rep.topological_term, rep.resonance_sum, rep.dk_sum,
                rep.tail_bound, rep.rel_discrepancy)])


def cmd_residue(args, cfg):
    from .dimension import estimate_delta, ps_measure
    from .hyperbolic import HPoint
    from .resolvent import estimate_A_X
    group = cfg.group()
    delta = estimate_delta(group, 12, cfg.budgets["word_count"]).value
    mu = ps_measure(group, delta, 10, cfg.budgets["word_count"])
    samples = [HPoint.at(x, h) for x, h in DEFAULT_SAMPLES]
    est = estimate_A_X(group, mu, delta, samples, L=args.max_word_len, budget=cfg.budgets["word_count"])
    k = len(samples)
    pairs = [{"i": i, "j": j, "c_re": est.c_values[i, j], "c_im": 0.0,
              "residual": est.fit_diagnostics["residuals"][i, j]} for i in range(k) for j in range(i, k)]
    print(f"A_X {fmt(est.A_X)} rank1_defect {fmt(est.rank1_defect)} spread {fmt(est.spread)}")
    write_json(args.out, cfg, {"delta": delta, "A_X": est.A_X, "rank1_defect": est.rank1_defect, "pairs": pairs})
    if est.fit_diagnostics["nonconverged"]:
        raise ConvergenceError(f"residue pairs did not converge: {est.fit_diagnostics['nonconverged']}")


def cmd_wave(args, cfg):
    from .dimension import estimate_delta, ps_measure
    from .hyperbolic import HPoint
    from .resolvent import estimate_A_X
    from .wave import InitialData, decay_fit, leading_term, wave_field
    group = cfg.group()
    delta = estimate_delta(group, 12, cfg.budgets["word_count"]).value
    mu = ps_measure(group, delta, 10, cfg.budgets["word_count"])
    src = HPoint.at(*_tuple(args.source, 2, "--source"))
    m = HPoint.at(*_tuple(args.point, 2, "--point"))
    t0, t1, dt = _tuple(args.times, 3, "--times")
    times = np.round(np.arange(t0, t1 + dt / 2, dt), 12)
    data = InitialData(((src, 2.0),), ((src, 1.0),), args.eps)
    u = wave_field(times, m, data, args.v_max, 0, group, budget=cfg.budgets["word_count"])
    residue = estimate_A_X(group, mu, delta, [HPoint.at(x, h) for x, h in DEFAULT_SAMPLES],
                           budget=cfg.budgets["word_count"])
    lead = leading_term(m, data, residue, mu, delta)(times)
    fit = decay_fit(list(zip(times, u)), delta)
    print(f"rate {fmt(fit.rate)} predicted {fmt(fit.predicted_rate)} rel_error {fmt(fit.rel_rate_error)}")
    write_csv(args.out, cfg, ("t", "u_value", "leading_value", "remainder"),
              [(t, a, b, a - b) for t, a, b in zip(times, u, lead)])


COMMANDS = {
    "delta": cmd_delta, "psmeasure": cmd_psmeasure, "zeta-eval": cmd_zeta_eval, "resonances": cmd_resonances,
    "census": cmd_census, "trace": cmd_trace, "residue": cmd_residue, "wave": cmd_wave,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="schottky-lab", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=VERSION)
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, **kw):
        p = sub.add_parser(name, **kw)
        p.add_argument("--config", required=True)
        p.add_argument("--threads", type=int, default=1, help="accepted for reproducibility; runs are serial")
        return p

    p = add("delta")
    p.add_argument("--max-word-len", type=int, default=12)
    p.add_argument("--out")
    p = add("psmeasure")
    p.add_argument("--delta", type=float)
    p.add_argument("--level", type=int, default=10)
    p.add_argument("--out")
    p = add("zeta-eval")
    p.add_argument("--lam", required=True, help="re,im")
    p.add_argument("--method", choices=("cycle", "transfer"), default="transfer")
    p.add_argument("--nodes", type=int)
    for name in ("resonances", "census"):
        p = add(name)
        p.add_argument("--rect", default="-0.4,0.31,0.05,12", help="re_min,re_max,im_min,im_max")
        p.add_argument("--grid", type=float, default=0.05)
        p.add_argument("--nodes", type=int)
        p.add_argument("--out", required=name == "resonances")
    p.add_argument("--resonances", help="reuse a resonances.csv instead of searching")
    p.add_argument("--eps", type=float, default=0.2)
    p = add("trace")
    p.add_argument("--alpha", type=float, default=0.3)
    p.add_argument("--d", type=float)
    p.add_argument("--r-cut", type=float)
    p.add_argument("--resonances")
    p.add_argument("--out", required=True)
    p = add("residue")
    p.add_argument("--max-word-len", type=int, default=12)
    p.add_argument("--out", required=True)
    p = add("wave")
    p.add_argument("--source", default="0,1.5")
    p.add_argument("--point", default="4,1")
    p.add_argument("--times", default="5,15,0.5", help="t_min,t_max,step")
    p.add_argument("--eps", type=float, default=1.0)
    p.add_argument("--v-max", type=float, default=40.0)
    p.add_argument("--out", required=True)
    return ap


TUPLE_OPTIONS = ("--rect", "--lam", "--source", "--point", "--times")


def _join_tuple_options(argv):
    # values such as "-3,1,-20,20" would otherwise be read as option flags
    out, i = [], 0
    while i < len(argv):
        if argv[i] in TUPLE_OPTIONS and i + 1 < len(argv):
            out.append(f"{argv[i]}={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_join_tuple_options(argv))
    try:
        cfg = load_config(args.config)
        COMMANDS[args.command](args, cfg)
    except (ConfigError, SchottkyViolation, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConvergenceError, BudgetError) as exc:
        print(f"convergence failure: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
