"""Command-line interface.

Subcommands:
    sweep    evaluate a model over a (t_M, t_I) grid, write CSV + manifest
    oracle   run a named desk-scale verification case and print the report
    scaling  locate the correlation contour across bath sizes
    presets  list or print the shipped configuration presets

Exit codes: 0 success, 2 configuration error, 3 runtime failure.
SPINBATH_THREADS and SPINBATH_SEED override config values when the
corresponding flags are absent.
"""
from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from .bath import NuclearSpecies, bath_components, gaas_geometry
from .config import (ConfigError, list_presets, load_preset, load_run_config,
                     load_scaling_config)
from .oracles import (SmallBath, classical_vector_mc, gaussian_identity_check,
                      protocol_oracle)
from .protocols import make_sequence
from .semiclassical import SemiclassicalConfig, correlation_semiclassical
from .sweep import run_sweep
from .uniaxial import fit_scaling_exponent, scaling_contour

_EXIT_OK = 0
_EXIT_CONFIG = 2
_EXIT_RUNTIME = 3


def _env_int(name: str):
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return None
    try:
        return int(raw)
    except ValueError:
        raise ConfigError([f"environment variable {name}={raw!r} is not an integer"])


def _cmd_sweep(args) -> int:
    name, config = load_run_config(args.config)
    threads = args.threads if args.threads is not None else _env_int("SPINBATH_THREADS")
    seed = args.seed if args.seed is not None else _env_int("SPINBATH_SEED")
    config = config.with_overrides(threads=threads, seed=seed)
    out_dir = args.out if args.out is not None else config.out_path
    if out_dir is None:
        raise ConfigError(["no output directory: pass --out or set [output] path"])
    out = run_sweep(config, out_dir, name=name)
    print(f"wrote {out.csv_path} ({len(out.rows)} rows) and {out.manifest_path}")
    print(f"wall time {out.wall_time_s:.2f} s, "
          f"degenerate samples {out.degenerate_samples}/{out.total_samples}")
    return _EXIT_OK


def _cmd_scaling(args) -> int:
    name, config = load_scaling_config(args.config)
    points = scaling_contour(config.N_values, config.species,
                             geometry=config.geometry,
                             n_clusters=config.n_clusters,
                             symmetric_dots=config.symmetric_dots)
    print(f"# scaling study {name}: correlation contour C = exp(-1)/2")
    print(f"{'N':>10} {'t_star_s':>24} {'t_M*t_I_s2':>24}")
    for p in points:
        if p.found:
            print(f"{p.N:>10} {p.t_star:>24.17g} {p.product:>24.17g}")
        else:
            print(f"{p.N:>10} {'not-found':>24} {'not-found':>24}")
    found = [p for p in points if p.found]
    if len(found) >= 2:
        print(f"fitted exponent of t_M*t_I vs N: {fit_scaling_exponent(points):.4f}")
    if args.out:
        from pathlib import Path

        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        lines = ["N,t_star_s,product_s2,found"]
        lines += [f"{p.N},{p.t_star:.17g},{p.product:.17g},{int(p.found)}"
                  for p in points]
        path = out_dir / f"{name}.csv"
        path.write_text("\n".join(lines) + "\n")
        print(f"wrote {path}")
    return _EXIT_OK


def _cmd_presets(args) -> int:
    if args.show:
        sys.stdout.write(load_preset(args.show))
        return _EXIT_OK
    for name, description in list_presets():
        print(f"{name:<16} {description}")
    return _EXIT_OK


# --- oracle cases -----------------------------------------------------------

def _case_protocol_gap() -> bool:
    rng = np.random.default_rng(11)
    couplings = tuple(rng.uniform(0.5, 1.5, 6))
    bath = SmallBath(couplings=couplings)
    a_bar = float(np.mean(couplings))
    print("exact protocol vs closed two-term expression, 6 spins, t_I*A = 2")
    print(f"{'t_M*A':>8} {'C_exact':>22} {'C_two_term':>22} {'gap':>12}")
    ok = True
    gaps = []
    for tma in (0.3, 1.0, 3.0, 10.0):
        res = protocol_oracle(bath, tma / a_bar, 2.0 / a_bar)
        gap = abs(res.C_exact - res.C_eq5)
        gaps.append(gap)
        ok &= gap < 1e-10
        print(f"{tma:>8.2f} {res.C_exact:>22.15f} {res.C_eq5:>22.15f} {gap:>12.3e}")
    print("note: the Born-rule normalisation cancels in the outcome average, "
          "so the gap sits at floating-point level for all t_M")
    return ok


def _case_commutation_null() -> bool:
    rng = np.random.default_rng(5)
    bath = SmallBath(couplings=tuple(rng.uniform(0.5, 2.0, 6)),
                     intermediate_axis="z")
    ref = protocol_oracle(bath, 1.3, 0.0).C_exact
    dev = max(abs(protocol_oracle(bath, 1.3, ti).C_exact - ref)
              for ti in (0.7, 2.9, 11.0))
    print("commuting intermediate evolution: max |C(t_I) - C(0)| = "
          f"{dev:.3e} (tolerance 1e-12)")
    return dev < 1e-12


def _case_gaussian_identity() -> bool:
    rng = np.random.default_rng(7)
    ok = True
    print(f"{'dim':>4} {'|mc - closed|':>16} {'stderr':>12} {'z':>8}")
    for dim in (2, 3, 4, 5, 6):
        T = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        T *= 0.4 / max(1e-12, np.max(np.abs(np.linalg.eigvals(T))))
        chk = gaussian_identity_check(T, n_samples=100_000, seed=int(rng.integers(2**32)))
        err = abs(chk.mc_mean - chk.closed_form)
        print(f"{dim:>4} {err:>16.3e} {chk.stderr:>12.3e} {chk.z_score:>8.2f}")
        ok &= chk.z_score <= 3.0
    return ok


def _case_tmatrix_vs_classical() -> bool:
    species = [NuclearSpecies("a", gamma=2 * math.pi * 10.2478e6,
                              total_hyperfine=6.0e10, abundance=0.4, spin=1.5),
               NuclearSpecies("b", gamma=2 * math.pi * 13.0208e6,
                              total_hyperfine=6.2e10, abundance=0.35, spin=1.5),
               NuclearSpecies("c", gamma=2 * math.pi * 7.3150e6,
                              total_hyperfine=5.9e10, abundance=0.25, spin=1.5)]
    geometry = gaas_geometry(N_total=1_000_000)
    comps = tuple(bath_components(species, geometry, n_clusters=1, B_ext=0.04,
                                  profile="uniform"))
    ok = True
    print("window-matrix model vs direct phase simulation "
          "(3 components, delta_B = 0, 1e5 samples)")
    print(f"{'t_I_us':>8} {'seq':>4} {'model':>12} {'oracle':>12} "
          f"{'stderr':>10} {'z':>7}")
    for t_i in (2.0e-6, 2.0e-5):
        for inter in ("SE", "FID"):
            seq = make_sequence("SE", inter, 1e-6, t_i)
            cfg = SemiclassicalConfig(
                components=comps, B_ext=0.04, delta_B_rms=0.0, t_M=1e-6,
                t_I=t_i, sequence=seq, mc_samples=1, seed=1)
            model = correlation_semiclassical(cfg).C
            mc = classical_vector_mc(comps, seq, 1e-6, t_i, 100_000, seed=42,
                                     B_ext=0.04)
            z = abs(model - mc.mean) / mc.stderr
            ok &= z <= 3.0
            print(f"{t_i*1e6:>8.1f} {inter:>4} {model:>12.6f} {mc.mean:>12.6f} "
                  f"{mc.stderr:>10.2e} {z:>7.2f}")
    return ok


_ORACLE_CASES = {
    "protocol-gap": _case_protocol_gap,
    "commutation-null": _case_commutation_null,
    "gaussian-identity": _case_gaussian_identity,
    "tmatrix-vs-classical": _case_tmatrix_vs_classical,
}


def _cmd_oracle(args) -> int:
    names = list(_ORACLE_CASES) if args.case == "all" else [args.case]
    all_ok = True
    for name in names:
        print(f"== oracle case {name} ==")
        ok = _ORACLE_CASES[name]()
        print(f"{name}: {'PASS' if ok else 'FAIL'}")
        all_ok &= ok
    return _EXIT_OK if all_ok else _EXIT_RUNTIME


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinbath",
        description="Correlation protocols for a qubit coupled to a nuclear spin bath")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sweep = sub.add_parser("sweep", help="run a (t_M, t_I) grid sweep")
    p_sweep.add_argument("--config", required=True,
                         help="config file, run manifest, or preset name")
    p_sweep.add_argument("--out", default=None,
                         help="output directory (falls back to [output] path)")
    p_sweep.add_argument("--threads", type=int, default=None)
    p_sweep.add_argument("--seed", type=int, default=None)
    p_sweep.set_defaults(func=_cmd_sweep)

    p_oracle = sub.add_parser("oracle", help="run a verification case")
    p_oracle.add_argument("--case", required=True,
                          choices=[*_ORACLE_CASES, "all"])
    p_oracle.set_defaults(func=_cmd_oracle)

    p_scaling = sub.add_parser("scaling", help="correlation-contour scaling study")
    p_scaling.add_argument("--config", required=True,
                           help="config file or preset name")
    p_scaling.add_argument("--out", default=None, help="optional output directory")
    p_scaling.set_defaults(func=_cmd_scaling)

    p_presets = sub.add_parser("presets", help="list shipped presets")
    p_presets.add_argument("--show", default=None, metavar="NAME",
                           help="print the named preset")
    p_presets.set_defaults(func=_cmd_presets)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        for line in exc.diagnostics:
            print(f"config error: {line}", file=sys.stderr)
        return _EXIT_CONFIG
    except (OSError, RuntimeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
