"""Batch front end: parse a problem config, dispatch solves, persist fields
and reports.

Config files are INI-style key-value text; vortex points are repeated
entries in the [vortices] section (`vortex1 = x y multiplicity` for the
first component, `vortex2 = ...` for the second; extra points take any
suffix, e.g. `vortex1_b`).  Field dumps are written both as a commented CSV
(for plotting) and as a raw little-endian binary twin (for bit-exact round
trips).
"""

from __future__ import annotations

import argparse
import configparser
import dataclasses
import struct
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .background import VortexSet, periodic_background
from .coupling import CouplingParams, bradlow_lambda_min
from .fluxes import (
    compute_fluxes,
    lambda_sweep,
    quantized_flux_sun,
    quantized_flux_u1,
    vacuum_deviation,
)
from .grids import GridSpec, PlanarBox, ScalarField, TorusDomain, node_coords
from .mountain import PathCollapseError, mountain_pass
from .periodic import InfeasibleError, PeriodicProblem, minimize_constrained, verify_solution
from .planar import PlanarProblem, PlanarSystem, solve_planar
from .results import SolveResult

_MAGIC = b"CSVXBIN1"


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    geometry: str  # periodic | planar
    params: CouplingParams
    vortices: VortexSet
    domain: TorusDomain | PlanarBox
    grid: GridSpec
    mu: float
    tol: float
    max_iter: int
    lambdas: tuple[float, ...]
    out_dir: Path
    seed: int


def _get(cp, section, key, cast, default=None):
    if not cp.has_option(section, key):
        if default is not None:
            return default
        raise ConfigError(f"missing [{section}] {key}")
    raw = cp.get(section, key)
    try:
        return cast(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value at [{section}] {key}: {raw!r}") from exc


def _parse_vortices(cp) -> VortexSet:
    pts1, pts2 = [], []
    if cp.has_section("vortices"):
        for key, raw in cp.items("vortices"):
            if key.startswith("vortex1"):
                bucket = pts1
            elif key.startswith("vortex2"):
                bucket = pts2
            else:
                raise ConfigError(f"unknown key at [vortices] {key}")
            parts = raw.split()
            if len(parts) != 3:
                raise ConfigError(
                    f"bad value at [vortices] {key}: expected 'x y multiplicity'"
                )
            try:
                bucket.append((float(parts[0]), float(parts[1]), int(parts[2])))
            except ValueError as exc:
                raise ConfigError(f"bad value at [vortices] {key}: {raw!r}") from exc
    return VortexSet(points1=tuple(pts1), points2=tuple(pts2))


def parse_config(path: Path, grid_override=None, lam_override=None, out_dir=None, seed=0) -> RunConfig:
    cp = configparser.ConfigParser()
    cp.optionxform = str
    read = cp.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    geometry = _get(cp, "geometry", "type", str)
    if geometry not in ("periodic", "planar"):
        raise ConfigError(f"bad value at [geometry] type: {geometry!r}")
    n = _get(cp, "params", "N", int)
    kappa = _get(cp, "params", "kappa", float)
    lam = lam_override if lam_override is not None else _get(cp, "params", "lambda", float)
    try:
        params = CouplingParams(n, kappa, lam)
    except ValueError as exc:
        raise ConfigError(f"bad [params]: {exc}") from exc
    vortices = _parse_vortices(cp)
    if geometry == "periodic":
        L1 = _get(cp, "geometry", "L1", float)
        L2 = _get(cp, "geometry", "L2", float)
        domain: TorusDomain | PlanarBox = TorusDomain(L1, L2)
    else:
        R = _get(cp, "geometry", "R", float)
        domain = PlanarBox(R)
    if grid_override is not None:
        m1, m2 = grid_override
    else:
        m1 = _get(cp, "grid", "M1", int, default=128) if cp.has_section("grid") else 128
        m2 = _get(cp, "grid", "M2", int, default=128) if cp.has_section("grid") else 128
    try:
        grid = GridSpec(m1, m2)
    except ValueError as exc:
        raise ConfigError(f"bad [grid]: {exc}") from exc
    mu = _get(cp, "solver", "mu", float, default=10.0) if cp.has_section("solver") else 10.0
    tol = _get(cp, "solver", "tol", float, default=1e-8) if cp.has_section("solver") else 1e-8
    max_iter = (
        _get(cp, "solver", "max_iter", int, default=10_000)
        if cp.has_section("solver")
        else 10_000
    )
    lambdas: tuple[float, ...] = ()
    if cp.has_section("sweep") and cp.has_option("sweep", "lambdas"):
        lambdas = tuple(float(x) for x in cp.get("sweep", "lambdas").split())
    return RunConfig(
        geometry=geometry,
        params=params,
        vortices=vortices,
        domain=domain,
        grid=grid,
        mu=mu,
        tol=tol,
        max_iter=max_iter,
        lambdas=lambdas,
        out_dir=Path(out_dir) if out_dir is not None else Path("out"),
        seed=seed,
    )


# ----------------------------------------------------------------------
# field dumps
# ----------------------------------------------------------------------

def dump_fields(path_base: Path, result: SolveResult, cfg: RunConfig):
    """Write fields as commented CSV plus a raw binary twin."""
    u1 = result.u1.values
    u2 = result.u2.values
    v1 = result.v1.values
    v2 = result.v2.values
    m1, m2 = u1.shape
    X, Y = node_coords(cfg.domain, u1.shape)
    if cfg.geometry == "periodic":
        extents = (cfg.domain.L1, cfg.domain.L2)
    else:
        extents = (cfg.domain.half_width, cfg.domain.half_width)
    csv_path = path_base.with_suffix(".csv")
    with open(csv_path, "w") as fh:
        fh.write(f"# geometry: {cfg.geometry}\n")
        fh.write(f"# grid: {m1} {m2}\n")
        fh.write(f"# extents: {extents[0]:.17g} {extents[1]:.17g}\n")
        fh.write("# columns: x y u1 u2 v1 v2\n")
        for i in range(m1):
            for j in range(m2):
                fh.write(
                    f"{X[i, j]:.17g},{Y[i, j]:.17g},{u1[i, j]:.17g},"
                    f"{u2[i, j]:.17g},{v1[i, j]:.17g},{v2[i, j]:.17g}\n"
                )
    bin_path = path_base.with_suffix(".bin")
    with open(bin_path, "wb") as fh:
        fh.write(_MAGIC)
        geom_code = 0 if cfg.geometry == "periodic" else 1
        fh.write(struct.pack("<qqq", geom_code, m1, m2))
        fh.write(struct.pack("<dd", *extents))
        fh.write(struct.pack("<q", 4))
        for arr in (u1, u2, v1, v2):
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def load_fields(path: Path):
    """Read a binary field dump back, bit-exactly."""
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != _MAGIC:
            raise ValueError(f"{path}: not a field dump")
        geom_code, m1, m2 = struct.unpack("<qqq", fh.read(24))
        e1, e2 = struct.unpack("<dd", fh.read(16))
        (nf,) = struct.unpack("<q", fh.read(8))
        arrays = []
        for _ in range(nf):
            buf = fh.read(8 * m1 * m2)
            arrays.append(np.frombuffer(buf, dtype="<f8").reshape(m1, m2).copy())
    geometry = "periodic" if geom_code == 0 else "planar"
    return {
        "geometry": geometry,
        "extents": (e1, e2),
        "u1": arrays[0],
        "u2": arrays[1],
        "v1": arrays[2],
        "v2": arrays[3],
    }


def _write_report(path: Path, lines: dict):
    with open(path, "w") as fh:
        for key, value in lines.items():
            if isinstance(value, float):
                fh.write(f"{key} = {value:.17g}\n")
            else:
                fh.write(f"{key} = {value}\n")


def _base_report(cfg: RunConfig) -> dict:
    return {
        "geometry": cfg.geometry,
        "N": cfg.params.N,
        "kappa": cfg.params.kappa,
        "lambda": cfg.params.lam,
        "n1": cfg.vortices.n1,
        "n2": cfg.vortices.n2,
        "grid": f"{cfg.grid.M1}x{cfg.grid.M2}",
    }


def _flux_lines(rep) -> dict:
    return {
        "flux_u1": rep.flux_u1,
        "flux_sun": rep.flux_sun,
        "charge_u1": rep.charge_u1,
        "charge_sun": rep.charge_sun,
        "bps_energy": rep.energy,
        "flux_trusted": rep.trusted,
    }


# ----------------------------------------------------------------------
# modes
# ----------------------------------------------------------------------

def _solve_once(cfg: RunConfig) -> SolveResult:
    if cfg.geometry == "periodic":
        prob = PeriodicProblem(
            cfg.params, cfg.vortices, cfg.domain, cfg.grid, tol=cfg.tol, max_iter=cfg.max_iter
        )
        return minimize_constrained(prob)
    prob = PlanarProblem(
        cfg.params,
        cfg.vortices,
        cfg.domain.half_width,
        cfg.grid,
        mu=cfg.mu,
        tol=cfg.tol,
        max_iter=cfg.max_iter,
    )
    return solve_planar(prob)


def _mode_solve(cfg: RunConfig) -> int:
    report = _base_report(cfg)
    if cfg.geometry == "periodic":
        bound = bradlow_lambda_min(cfg.params, cfg.vortices.n1, cfg.vortices.n2, cfg.domain.area)
        report["bradlow_bound"] = bound
    try:
        result = _solve_once(cfg)
    except InfeasibleError as exc:
        report["status"] = "infeasible"
        report["error"] = str(exc)
        _write_report(cfg.out_dir / "report.txt", report)
        print(f"infeasible: {exc}", file=sys.stderr)
        return 1
    dump_fields(cfg.out_dir / "fields", result, cfg)
    flux = compute_fluxes(result, cfg.params, cfg.vortices, cfg.domain)
    report.update(
        status="converged" if result.converged else "unconverged",
        el_residual=result.el_residual,
        iterations=result.iterations,
        functional_value=result.energy_value,
        **_flux_lines(flux),
        flux_u1_quantized=quantized_flux_u1(cfg.params, cfg.vortices.n1, cfg.vortices.n2),
        flux_sun_quantized=quantized_flux_sun(cfg.params, cfg.vortices.n1, cfg.vortices.n2),
    )
    if cfg.geometry == "periodic":
        bg = periodic_background(cfg.vortices, cfg.domain, cfg.grid)
        diag = verify_solution(result, bg, cfg.params, cfg.vortices, cfg.domain)
        report.update(
            verify_all_passed=diag.all_passed,
            max_u1=diag.max_u1,
            max_u2=diag.max_u2,
            identity_rel_1=diag.identity_rel_1,
            identity_rel_2=diag.identity_rel_2,
            margin1=diag.margin1,
            margin2=diag.margin2,
        )
    _write_report(cfg.out_dir / "report.txt", report)
    if not result.converged:
        print("solver did not converge; partial artifacts retained", file=sys.stderr)
        return 1
    return 0


def _mode_second(cfg: RunConfig) -> int:
    if cfg.geometry != "periodic":
        raise ConfigError("mode 'second' requires periodic geometry")
    report = _base_report(cfg)
    prob = PeriodicProblem(
        cfg.params, cfg.vortices, cfg.domain, cfg.grid, tol=cfg.tol, max_iter=cfg.max_iter
    )
    try:
        first = minimize_constrained(prob)
    except InfeasibleError as exc:
        report["status"] = "infeasible"
        report["error"] = str(exc)
        _write_report(cfg.out_dir / "report.txt", report)
        print(f"infeasible: {exc}", file=sys.stderr)
        return 1
    dump_fields(cfg.out_dir / "fields_min", first, cfg)
    try:
        second = mountain_pass(first, prob)
    except PathCollapseError as exc:
        report["status"] = "degenerate_minimum"
        report["error"] = str(exc)
        _write_report(cfg.out_dir / "report.txt", report)
        print(f"no second solution found: {exc}", file=sys.stderr)
        return 1
    dump_fields(cfg.out_dir / "fields_second", second, cfg)
    flux1 = compute_fluxes(first, cfg.params, cfg.vortices, cfg.domain)
    flux2 = compute_fluxes(second, cfg.params, cfg.vortices, cfg.domain)
    report.update(
        status="converged" if (first.converged and second.converged) else "unconverged",
        first_el_residual=first.el_residual,
        second_el_residual=second.el_residual,
        first_functional=first.energy_value,
        second_functional=second.energy_value,
        distance_l2=second.diagnostics["distance_from_minimizer"],
        first_flux_u1=flux1.flux_u1,
        second_flux_u1=flux2.flux_u1,
        first_bps_energy=flux1.energy,
        second_bps_energy=flux2.energy,
    )
    _write_report(cfg.out_dir / "report.txt", report)
    return 0 if (first.converged and second.converged) else 1


def _mode_sweep(cfg: RunConfig) -> int:
    if cfg.geometry != "periodic":
        raise ConfigError("mode 'sweep' requires periodic geometry")
    if not cfg.lambdas:
        raise ConfigError("missing [sweep] lambdas")
    prob = PeriodicProblem(
        cfg.params, cfg.vortices, cfg.domain, cfg.grid, tol=cfg.tol, max_iter=cfg.max_iter
    )
    rep = lambda_sweep(prob, cfg.lambdas)
    with open(cfg.out_dir / "sweep.csv", "w") as fh:
        fh.write("lambda,status,dev1,dev2,flux_u1,flux_sun,bps_energy,iterations\n")
        for e in rep.entries:
            def fmt(x):
                return "" if x is None else f"{x:.17g}"
            fh.write(
                f"{e.lam:.17g},{e.status},{fmt(e.dev1)},{fmt(e.dev2)},"
                f"{fmt(e.flux_u1)},{fmt(e.flux_sun)},{fmt(e.energy)},{e.iterations}\n"
            )
    report = _base_report(cfg)
    report.update(
        status="done",
        members=len(rep.entries),
        converged=sum(1 for e in rep.entries if e.status == "converged"),
        monotone_vacuum_approach=rep.monotone_decreasing,
    )
    _write_report(cfg.out_dir / "report.txt", report)
    return 0


def _mode_verify(cfg: RunConfig) -> int:
    dump = load_fields(cfg.out_dir / "fields.bin")
    if dump["geometry"] != cfg.geometry:
        raise ConfigError("dump geometry does not match config")
    report = _base_report(cfg)
    if cfg.geometry == "periodic":
        result = SolveResult(
            v1=ScalarField(dump["v1"], cfg.domain),
            v2=ScalarField(dump["v2"], cfg.domain),
            u1=ScalarField(dump["u1"], cfg.domain),
            u2=ScalarField(dump["u2"], cfg.domain),
            el_residual=np.nan,
            energy_value=np.nan,
            iterations=0,
            converged=True,
        )
        bg = periodic_background(cfg.vortices, cfg.domain, cfg.grid)
        diag = verify_solution(result, bg, cfg.params, cfg.vortices, cfg.domain)
        report.update(
            status="verified" if diag.all_passed else "failed",
            verify_all_passed=diag.all_passed,
            max_u1=diag.max_u1,
            max_u2=diag.max_u2,
            identity_rel_1=diag.identity_rel_1,
            identity_rel_2=diag.identity_rel_2,
            el_residual=diag.el_residual,
            margin1=diag.margin1,
            margin2=diag.margin2,
        )
        ok = diag.all_passed
    else:
        prob = PlanarProblem(
            cfg.params, cfg.vortices, cfg.domain.half_width, cfg.grid, mu=cfg.mu, tol=cfg.tol
        )
        system = PlanarSystem(prob)
        el = system.el_residual(dump["v1"], dump["v2"])
        emax = float(np.max(np.exp(dump["u1"][1:-1, 1:-1])))
        ok = el < max(cfg.tol, 1e-6) and emax < 1.0
        report.update(status="verified" if ok else "failed", el_residual=el, max_exp_u1=emax)
    _write_report(cfg.out_dir / "report.txt", report)
    return 0 if ok else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="csvortex",
        description="Solve and verify coupled Chern-Simons-Higgs vortex systems.",
    )
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode in ("solve", "second", "sweep", "verify"):
        sp = sub.add_parser(mode)
        sp.add_argument("--config", required=True, type=Path)
        sp.add_argument("--out", type=Path, default=Path("out"))
        sp.add_argument("--grid", type=str, default=None, help="override, e.g. 128x128")
        sp.add_argument("--lambda", dest="lam", type=float, default=None)
        sp.add_argument("--seed", type=int, default=0, help="randomized tests only")
    args = parser.parse_args(argv)

    try:
        grid_override = None
        if args.grid is not None:
            try:
                m1, m2 = (int(x) for x in args.grid.lower().split("x"))
            except ValueError:
                raise ConfigError(f"bad --grid value {args.grid!r}")
            grid_override = (m1, m2)
        cfg = parse_config(
            args.config,
            grid_override=grid_override,
            lam_override=args.lam,
            out_dir=args.out,
            seed=args.seed,
        )
        cfg.out_dir.mkdir(parents=True, exist_ok=True)
        handler = {
            "solve": _mode_solve,
            "second": _mode_second,
            "sweep": _mode_sweep,
            "verify": _mode_verify,
        }[args.mode]
        return handler(cfg)
    except ConfigError as exc:
        print(f"config error ({args.config}): {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
