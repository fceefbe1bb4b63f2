"""Config-driven command line: spectrum / shift-scan / symmetry-test / validate.

The config is a YAML file; every value can be overridden by a flag.
Output is CSV with 12 significant digits and stable formatting, so a
fixed config and package version reproduce byte-identical files.

Exit codes: 0 success, 1 validation failure, 2 config error, 3 numerical
failure.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np
import yaml

from . import analysis, delays, potentials, smatrix, solver
from . import units as U

CONFIG_VERSION = 1

#: Solver step rules per tolerance profile: (max k*h, char_length/h).
PROFILES = {
    "default": (0.05, 50.0),
    "strict": (0.025, 100.0),
}


class ConfigError(ValueError):
    pass


DEFAULT_CONFIG = {
    "version": CONFIG_VERSION,
    "units": {"energy": "eV", "length": "angstrom"},
    "potential": "V1",
    "energy_grid": {"min": 0.1, "max": 10.0, "count": 200},
    "shift_scan": {"energy": 2.0, "dx_min": -4.0, "dx_max": 4.0, "count": 41},
    "tolerance_profile": "default",
    "output": None,
}


def _merge(base: dict, extra: dict) -> dict:
    out = dict(base)
    for key, val in extra.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], val)
        else:
            out[key] = val
    return out


def load_config(path: str | None) -> dict:
    cfg = dict(DEFAULT_CONFIG)
    if path is not None:
        try:
            with open(path) as fh:
                user = yaml.safe_load(fh)
        except (OSError, yaml.YAMLError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if user is None:
            user = {}
        if not isinstance(user, dict):
            raise ConfigError("config root must be a mapping")
        if int(user.get("version", CONFIG_VERSION)) != CONFIG_VERSION:
            raise ConfigError(f"unsupported config version {user.get('version')}")
        cfg = _merge(cfg, user)
    return cfg


def _unit_factors(cfg: dict):
    ucfg = cfg.get("units", {})
    e_unit = str(ucfg.get("energy", "eV")).lower()
    l_unit = str(ucfg.get("length", "angstrom")).lower()
    if e_unit == "ev":
        to_ha = U.ev_to_hartree
    elif e_unit == "hartree":
        to_ha = lambda x: x  # noqa: E731
    else:
        raise ConfigError(f"unknown energy unit {e_unit!r}")
    if l_unit in ("angstrom", "a", "ang"):
        to_bohr = U.angstrom_to_bohr
    elif l_unit == "bohr":
        to_bohr = lambda x: x  # noqa: E731
    else:
        raise ConfigError(f"unknown length unit {l_unit!r}")
    return to_ha, to_bohr


def build_potential(spec, to_ha, to_bohr) -> potentials.Potential:
    """Potential from a config entry: an example name or an inline mapping."""
    if isinstance(spec, str):
        try:
            return potentials.example_potential(spec)
        except potentials.PotentialError as exc:
            raise ConfigError(str(exc)) from exc
    if not isinstance(spec, dict):
        raise ConfigError("potential must be a name (V1..V6) or a mapping")
    body = dict(spec)
    kind = body.pop("kind", None)
    dx = body.pop("shift", 0.0)
    try:
        if kind == "gaussian_sum":
            if "prefactors" in body:
                pot = potentials.gaussian_chain(
                    U.hartree_to_ev(to_ha(float(body["depth"]))),
                    U.bohr_to_angstrom(to_bohr(float(body["width"]))),
                    [float(f) for f in body["prefactors"]])
            else:
                terms = tuple((float(f), to_bohr(float(c))) for f, c in body["terms"])
                pot = potentials.GaussianSum(depth=to_ha(float(body["depth"])),
                                             width=to_bohr(float(body["width"])),
                                             terms=terms)
        elif kind == "resonance":
            pot = potentials.Resonance(width=to_bohr(float(body["width"])))
        elif kind == "sech_well":
            pot = potentials.SechWell(width=to_bohr(float(body["width"])))
        elif kind == "square_barrier":
            pot = potentials.SquareBarrier(height=to_ha(float(body["height"])),
                                           half_width=to_bohr(float(body["half_width"])))
        elif kind == "tabulated":
            pot = potentials.Tabulated(
                x=tuple(to_bohr(float(v)) for v in body["x"]),
                v=tuple(to_ha(float(v)) for v in body["v"]))
        else:
            raise ConfigError(f"unknown potential kind {kind!r}")
    except (KeyError, TypeError, ValueError, potentials.PotentialError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad potential definition: {exc}") from exc
    return potentials.shift(pot, to_bohr(float(dx)))


def _energy_grid(cfg: dict, to_ha) -> np.ndarray:
    g = cfg["energy_grid"]
    try:
        lo, hi, count = float(g["min"]), float(g["max"]), int(g["count"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad energy_grid: {exc}") from exc
    if not (0 < lo < hi) or count < 3:
        raise ConfigError("energy_grid needs 0 < min < max and count >= 3")
    return to_ha(np.linspace(lo, hi, count))


def _settings_for(pot, e_max, cfg) -> solver.SolverSettings:
    profile = str(cfg.get("tolerance_profile", "default"))
    if profile not in PROFILES:
        raise ConfigError(f"unknown tolerance profile {profile!r}")
    return solver.SolverSettings.for_potential(
        pot, e_max * (1.0 + 2.0 * delays.H_REL) + 2.0 * delays.H_MIN,
        h_rule=PROFILES[profile])


def _fmt(x) -> str:
    if isinstance(x, float) and np.isnan(x):
        return "nan"
    return f"{x:.12g}"


def _write_csv(path, comment: str, header: list[str], rows) -> None:
    lines = [comment, ",".join(header)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    text = "\n".join(lines) + "\n"
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def cmd_spectrum(cfg: dict) -> int:
    to_ha, to_bohr = _unit_factors(cfg)
    pot = build_potential(cfg["potential"], to_ha, to_bohr)
    e = _energy_grid(cfg, to_ha)
    spec = delays.compute_delay_spectrum(pot, e, settings=_settings_for(pot, float(e.max()), cfg))
    header = ["E_eV", "alpha", "beta", "gamma", "alpha_p", "beta_p", "gamma_p",
              "tau_part_1_fs", "tau_part_2_fs", "tau_prop_1_fs", "tau_prop_2_fs",
              "tau_avg_fs", "c_criterion"]
    per_ev = 1.0 / U.EV_PER_HARTREE
    cc = spec.c_criterion
    rows = [
        (U.hartree_to_ev(spec.energies[i]),
         spec.alpha[i], spec.beta[i], spec.gamma[i],
         spec.alpha_p[i] * per_ev, spec.beta_p[i] * per_ev, spec.gamma_p[i] * per_ev,
         U.aut_to_fs(spec.tau_part[i, 0]), U.aut_to_fs(spec.tau_part[i, 1]),
         U.aut_to_fs(spec.tau_prop[i, 0]), U.aut_to_fs(spec.tau_prop[i, 1]),
         U.aut_to_fs(spec.tau_avg[i]), cc[i])
        for i in range(len(spec))
    ]
    _write_csv(cfg.get("output"),
               "# scatter1d spectrum: E_eV [eV]; alpha,beta,gamma,c_criterion [rad]; "
               "alpha_p,beta_p,gamma_p [rad/eV]; tau_* [fs]",
               header, rows)
    return 0


def cmd_shift_scan(cfg: dict) -> int:
    to_ha, to_bohr = _unit_factors(cfg)
    pot = build_potential(cfg["potential"], to_ha, to_bohr)
    sc = cfg["shift_scan"]
    try:
        e = float(to_ha(float(sc["energy"])))
        dx = to_bohr(np.linspace(float(sc["dx_min"]), float(sc["dx_max"]), int(sc["count"])))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad shift_scan section: {exc}") from exc
    if dx.size < 2:
        raise ConfigError("shift_scan count must be >= 2")
    scan = analysis.shift_scan(pot, e, dx)
    header = ["dx_A", "gamma", "tau_part_1_fs", "tau_part_2_fs",
              "tau_prop_1_fs", "tau_prop_2_fs"]
    rows = [
        (U.bohr_to_angstrom(scan.dx[i]), scan.gamma_unwrapped[i],
         U.aut_to_fs(scan.tau_part[i, 0]), U.aut_to_fs(scan.tau_part[i, 1]),
         U.aut_to_fs(scan.tau_prop[i, 0]), U.aut_to_fs(scan.tau_prop[i, 1]))
        for i in range(scan.dx.size)
    ]
    _write_csv(cfg.get("output"),
               "# scatter1d shift-scan: dx_A [angstrom]; gamma [rad]; tau_* [fs]; "
               f"E = {_fmt(U.hartree_to_ev(e))} eV",
               header, rows)
    return 0


def cmd_symmetry_test(cfg: dict) -> int:
    to_ha, to_bohr = _unit_factors(cfg)
    pot = build_potential(cfg["potential"], to_ha, to_bohr)
    e = _energy_grid(cfg, to_ha)
    verdict = analysis.symmetry_test(
        pot, e, settings=_settings_for(pot, float(e.max()), cfg),
        spread_threshold=float(cfg.get("symmetry_threshold", 1e-3)))
    header = ["E_eV", "c_criterion"]
    rows = [(U.hartree_to_ev(verdict.energies[i]), verdict.criterion[i])
            for i in range(verdict.energies.size)]
    _write_csv(cfg.get("output"),
               "# scatter1d symmetry-test: E_eV [eV]; c_criterion = gamma - 2 E gamma' [rad]",
               header, rows)
    print(f"verdict: {verdict.verdict}")
    print(f"c_spread_rad: {_fmt(verdict.spread)}")
    print(f"threshold_rad: {_fmt(verdict.threshold)}")
    if verdict.x_cen is not None:
        print(f"x_cen_A: {_fmt(U.bohr_to_angstrom(verdict.x_cen))}")
    print(f"gap_deficit_max: {_fmt(verdict.gap_deficit_max)}")
    return 0


def _validation_checks(cfg: dict):
    """Run the invariant suite; yields (name, value, threshold, passed)."""
    to_ha, to_bohr = _unit_factors(cfg)
    grid_cfg = _merge({"min": 0.1, "max": 10.0, "count": 200}, cfg.get("energy_grid", {}))
    e = to_ha(np.linspace(float(grid_cfg["min"]), float(grid_cfg["max"]),
                          int(grid_cfg["count"])))
    names = cfg.get("validate_potentials", list(potentials.EXAMPLE_NAMES))
    fs = U.aut_to_fs(1.0)

    specs = {}
    for name in names:
        pot = build_potential(name, to_ha, to_bohr)
        specs[name] = (pot, delays.compute_delay_spectrum(
            pot, e, settings=_settings_for(pot, float(e.max()), cfg)))

    def spectra():
        return specs.items()

    worst = 0.0
    for name, (pot, sp) in spectra():
        batch = solver.solve_batch(pot, e, _settings_for(pot, float(e.max()), cfg))
        worst = max(worst, batch.max_residual())
    yield "flux_reciprocity_phase", worst, 1e-8, worst < 1e-8

    worst_u = worst_s = 0.0
    for name, (pot, sp) in spectra():
        for i in range(len(sp)):
            s = smatrix.SMatrix(E=sp.energies[i], basis="directional", m=sp.s_mats[i])
            worst_u = max(worst_u, s.unitarity_residual)
            worst_s = max(worst_s, s.symmetry_residual)
    yield "unitarity", worst_u, 1e-8, worst_u < 1e-8
    yield "symmetry", worst_s, 1e-8, worst_s < 1e-8

    worst = max(float(np.max(np.abs(np.sum(sp.tau_part, axis=1) - np.sum(sp.tau_prop, axis=1))))
                for _, (_, sp) in spectra())
    yield "sum_rule_partial_vs_proper", worst, 1e-8, worst < 1e-8
    worst = max(float(np.max(np.abs(np.sum(sp.tau_part, axis=1) - 2 * sp.beta_p)
                             / np.maximum(np.abs(2 * sp.beta_p), 1.0)))
                for _, (_, sp) in spectra())
    yield "sum_rule_trace_vs_beta_p", worst, 1e-6, worst < 1e-6

    slack = 1e-6 / fs
    worst = 0.0
    for name, (pot, sp) in spectra():
        srt = sp.tau_prop_sorted
        worst = max(worst,
                    float(np.max(sp.tau_part - srt[:, [0]])),
                    float(np.max(srt[:, [1]] - sp.tau_part)))
    yield "envelope", worst * fs, 1e-6, worst < slack

    if "V1" in specs:
        sp = specs["V1"][1]
        worst = float(np.max(np.abs(sp.tau_part - sp.tau_prop))) * fs
        yield "symmetric_collapse", worst, 1e-4, worst < 1e-4
    for name in ("V5", "V6"):
        if name in specs:
            sp = specs[name][1]
            allfour = np.concatenate([sp.tau_part, sp.tau_prop], axis=1)
            worst = float(np.max(allfour.max(axis=1) - allfour.min(axis=1))) * fs
            yield f"reflectionless_collapse_{name}", worst, 1e-4, worst < 1e-4

    worst = max(float(np.max(np.abs(sp.tau_part - sp.tau_part_fd)
                             / np.maximum(np.max(np.abs(sp.tau_prop), axis=1), 1.0)[:, None]))
                for _, (_, sp) in spectra())
    yield "hellmann_feynman_vs_fd", worst, 1e-6, worst < 1e-6

    worst = 0.0
    for name, (pot, sp) in spectra():
        mask = np.abs(np.sin(sp.alpha)) > 1e-2
        if not mask.any():
            continue
        scale = np.maximum(np.max(np.abs(sp.tau_prop), axis=1), 1.0)[:, None]
        worst = max(worst, float(np.max((np.abs(sp.closed_form_tau_part() - sp.tau_part)
                                         / scale)[mask])))
    yield "closed_form_vs_matrix", worst, 1e-6, worst < 1e-6

    worst = 0.0
    for name, (pot, sp) in spectra():
        for i in range(len(sp)):
            sv = sp.s_mats[i][::-1]  # row swap: the channel-mixing variant
            tr_v = float(np.trace(-1j * sv.conj().T @ sp.s_prime[i][::-1]).real)
            tr = float(np.trace(-1j * sp.s_mats[i].conj().T @ sp.s_prime[i]).real)
            worst = max(worst, abs(tr_v - tr))
    yield "variant_trace_agreement", worst, 1e-8, worst < 1e-8

    e_shift = U.ev_to_hartree(2.0)
    dxs = U.angstrom_to_bohr(np.linspace(-3.0, 3.0, 7))
    worst = 0.0
    for name in ("V1", "V2"):
        if name not in specs:
            continue
        scan = analysis.shift_scan(specs[name][0], float(e_shift), dxs)
        worst = max(worst, float(np.max(np.abs(scan.shift_law_residual))))
    yield "shift_law", worst, 1e-6, worst < 1e-6

    e_cross = e[:: max(1, e.size // 8)]
    worst = 0.0
    for name, (pot, sp) in spectra():
        st = _settings_for(pot, float(e.max()), cfg)
        par = solver.solve_parity_batch(pot, e_cross, st)
        for j, ee in enumerate(e_cross):
            i = int(np.argmin(np.abs(e - ee)))
            s_dir = smatrix.SMatrix(E=ee, basis="directional", m=sp.s_mats[i])
            worst = max(worst, float(np.max(np.abs(
                smatrix.to_parity_basis(s_dir).m - par[j]))))
    yield "cross_solver_parity", worst, 1e-6, worst < 1e-6

    worst = 0.0
    for name, (pot, sp) in spectra():
        if len(sp) > 1:
            worst = max(worst,
                        float(np.max(np.abs(np.diff(sp.beta)))),
                        float(np.max(np.abs(np.diff(sp.gamma)))))
    yield "grid_phase_margin", worst, 0.5 * np.pi, worst < 0.5 * np.pi


def cmd_validate(cfg: dict) -> int:
    results = []
    for name, value, threshold, passed in _validation_checks(cfg):
        results.append({"check": name, "value": float(value),
                        "threshold": float(threshold), "passed": bool(passed)})
        print(f"{'PASS' if passed else 'FAIL'}  {name:32s} value={value:.3e} "
              f"threshold={threshold:.1e}")
    all_passed = all(r["passed"] for r in results)
    report = {"all_passed": all_passed, "checks": results}
    out = cfg.get("output")
    if out not in (None, "-"):
        with open(out, "w") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
    print(f"summary: {'all checks passed' if all_passed else 'FAILURES PRESENT'}")
    return 0 if all_passed else 1


def _apply_overrides(cfg: dict, args: argparse.Namespace) -> dict:
    if args.potential is not None:
        if args.potential.upper() in potentials.EXAMPLE_NAMES:
            cfg["potential"] = args.potential.upper()
        else:
            try:
                with open(args.potential) as fh:
                    cfg["potential"] = yaml.safe_load(fh)
            except (OSError, yaml.YAMLError) as exc:
                raise ConfigError(f"cannot read potential file: {exc}") from exc
    grid = dict(cfg.get("energy_grid", {}))
    if args.emin is not None:
        grid["min"] = args.emin
    if args.emax is not None:
        grid["max"] = args.emax
    if args.esteps is not None:
        grid["count"] = args.esteps
    cfg["energy_grid"] = grid
    scan = dict(cfg.get("shift_scan", {}))
    if args.energy is not None:
        scan["energy"] = args.energy
    if args.dxmin is not None:
        scan["dx_min"] = args.dxmin
    if args.dxmax is not None:
        scan["dx_max"] = args.dxmax
    if args.dxsteps is not None:
        scan["count"] = args.dxsteps
    cfg["shift_scan"] = scan
    if args.tolerance_profile is not None:
        cfg["tolerance_profile"] = args.tolerance_profile
    if args.output is not None:
        cfg["output"] = args.output
    return cfg


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scatter1d",
        description="S-matrix parameters and time delays for 1D short-range potentials")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (("spectrum", cmd_spectrum), ("shift-scan", cmd_shift_scan),
                     ("symmetry-test", cmd_symmetry_test), ("validate", cmd_validate)):
        p = sub.add_parser(name)
        p.set_defaults(func=fn)
        p.add_argument("--config", default=None, help="YAML config file")
        p.add_argument("--output", default=None, help="output path (default stdout)")
        p.add_argument("--potential", default=None,
                       help="V1..V6 or a YAML file with a potential mapping")
        p.add_argument("--emin", type=float, default=None)
        p.add_argument("--emax", type=float, default=None)
        p.add_argument("--esteps", type=int, default=None)
        p.add_argument("--energy", type=float, default=None,
                       help="fixed energy for shift-scan")
        p.add_argument("--dxmin", type=float, default=None)
        p.add_argument("--dxmax", type=float, default=None)
        p.add_argument("--dxsteps", type=int, default=None)
        p.add_argument("--tolerance-profile", choices=sorted(PROFILES),
                       default=None, dest="tolerance_profile")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _apply_overrides(load_config(args.config), args)
        return args.func(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (solver.SolverError, delays.DerivativeError, smatrix.SMatrixError,
            potentials.NotShortRangeError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
