"""Scenario configuration, pipeline orchestration and result files."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import platform
import re
import tempfile
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
import scipy

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .dof import (
    MIN_M_FACTOR,
    Scenario,
    build_ensemble,
    effective_dof,
    gram_spectrum,
    theoretical_dof,
)
from .exceptions import ConfigError, HolodofError, InvalidArgumentError
from .spectral import Aperture
from .synthesis import BASELINE_NAMESPACE, iid_rayleigh_ensemble

__all__ = [
    "ScenarioConfig",
    "RunReport",
    "parse_config",
    "run_scenario",
    "emit_results",
    "lattice_csv",
    "read_eigenvalues_csv",
    "scenario_path",
    "SCENARIOS",
]

SCENARIO_DIR = Path(__file__).with_name("scenarios")
SCENARIOS = ("fig2", "fig3", "fig3-small", "fig4", "fig4-small")

_KEYS = {
    "name", "dim", "Lx", "Ly", "Lz", "lambda", "delta", "M_factor", "seed",
    "half_spaces", "baseline", "tau", "rho",
}
_REQUIRED = ("dim", "Lx", "lambda", "seed")


def scenario_path(name):
    """Path of a shipped scenario file, e.g. ``scenario_path("fig2")``."""
    if name not in SCENARIOS:
        raise KeyError(f"unknown scenario {name!r}; shipped: {', '.join(SCENARIOS)}")
    return SCENARIO_DIR / f"{name}.toml"


@dataclass(frozen=True)
class ScenarioConfig:
    """Validated scenario.  Lengths ``Lx, Ly, Lz`` and ``delta`` are in wavelengths."""

    dim: int
    Lx: float
    wavelength: float
    seed: int
    Ly: float = 0.0
    Lz: float = 0.0
    delta: float = 0.25
    M_factor: float = 10
    half_spaces: int = 2
    baseline: bool = False
    tau: float = 0.95
    rho: float = 1e-2
    name: str = ""

    @property
    def aperture(self):
        return Aperture.in_wavelengths(self.Lx, self.Ly, self.Lz, self.wavelength)

    def scenario(self):
        return Scenario(self.aperture, self.delta * self.wavelength, self.half_spaces)

    def M_for(self, N):
        return int(round(self.M_factor * N))

    def echo(self):
        """Config as TOML-compatible key/value pairs (re-parseable)."""
        out = {"name": self.name, "dim": self.dim, "Lx": self.Lx}
        if self.dim >= 2:
            out["Ly"] = self.Ly
        if self.dim == 3:
            out["Lz"] = self.Lz
        out.update({
            "lambda": self.wavelength, "delta": self.delta, "M_factor": self.M_factor,
            "seed": self.seed, "half_spaces": self.half_spaces, "baseline": self.baseline,
            "tau": self.tau, "rho": self.rho,
        })
        if not self.name:
            del out["name"]
        return out

    def to_toml(self):
        lines = []
        for k, v in self.echo().items():
            if isinstance(v, bool):
                lines.append(f"{k} = {'true' if v else 'false'}")
            elif isinstance(v, str):
                lines.append(f"{k} = {json.dumps(v)}")
            else:
                lines.append(f"{k} = {v!r}")
        return "\n".join(lines) + "\n"


def _line_of(text, key):
    pat = re.compile(r"^\s*" + re.escape(key) + r"\s*=")
    for i, line in enumerate(text.splitlines(), start=1):
        if pat.match(line):
            return i
    return None


def _read_source(source):
    if isinstance(source, Path):
        return source.read_text(encoding="utf-8"), str(source)
    text = str(source)
    if "=" not in text and "\n" not in text.strip():
        path = Path(text)
        try:
            return path.read_text(encoding="utf-8"), str(path)
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from exc
    return text, "<inline>"


def parse_config(source, seed=None):
    """Parse and validate a TOML scenario.

    ``source`` is a :class:`~pathlib.Path`, a path string, or inline TOML
    text.  ``seed`` overrides the file's ``seed`` when given.

    Raises
    ------
    ConfigError
        On syntax errors, unknown keys, missing keys or out-of-range values;
        the message names the field and line where known.
    """
    text, origin = _read_source(source)
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise ConfigError(f"{origin}: malformed TOML: {exc}",
                          line=int(m.group(1)) if m else None) from exc
    if seed is not None:
        raw["seed"] = seed

    def fail(msg, key):
        raise ConfigError(f"{origin}: {msg}", field=key, line=_line_of(text, key))

    for key in raw:
        if key not in _KEYS:
            fail(f"unknown key {key!r} (allowed: {', '.join(sorted(_KEYS))})", key)
    for key in _REQUIRED:
        if key not in raw:
            raise ConfigError(f"{origin}: missing required key", field=key)

    def number(key, default=None, integer=False):
        if key not in raw:
            return default
        v = raw[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            fail(f"{key} must be a number, got {v!r}", key)
        if integer and not isinstance(v, int):
            fail(f"{key} must be an integer, got {v!r}", key)
        if not math.isfinite(v):
            fail(f"{key} must be finite", key)
        return v

    dim = number("dim", integer=True)
    if dim not in (1, 2, 3):
        fail(f"dim must be 1, 2 or 3, got {dim}", "dim")
    Lx = number("Lx")
    Ly = number("Ly", 0.0)
    Lz = number("Lz", 0.0)
    lam = number("lambda")
    delta = number("delta", 0.25)
    M_factor = number("M_factor", 10)
    s = number("seed", integer=True)
    half_spaces = number("half_spaces", 2, integer=True)
    tau = number("tau", 0.95)
    rho = number("rho", 1e-2)
    baseline = raw.get("baseline", False)
    name = raw.get("name", "")

    if lam <= 0:
        fail(f"lambda must be positive, got {lam}", "lambda")
    if Lx <= 0:
        fail(f"Lx must be positive, got {Lx}", "Lx")
    if dim == 1:
        for key in ("Ly", "Lz"):
            if key in raw:
                fail(f"{key} is not allowed for dim = 1", key)
    else:
        if "Ly" not in raw:
            raise ConfigError(f"{origin}: dim = {dim} requires Ly", field="Ly")
        if Ly <= 0:
            fail(f"Ly must be positive, got {Ly}", "Ly")
    if dim == 2 and "Lz" in raw:
        fail("Lz is not allowed for dim = 2", "Lz")
    if dim == 3:
        if "Lz" not in raw:
            raise ConfigError(f"{origin}: dim = 3 requires Lz", field="Lz")
        if Lz <= 0:
            fail(f"Lz must be positive, got {Lz}", "Lz")
        if not Lz < min(Lx, Ly):
            fail(f"volumetric apertures need Lz < min(Lx, Ly); got Lz={Lz}, "
                 f"min(Lx, Ly)={min(Lx, Ly)}", "Lz")
    if delta <= 0:
        fail(f"delta must be positive, got {delta}", "delta")
    if M_factor < MIN_M_FACTOR:
        fail(f"M_factor={M_factor} is too small: the ensemble needs M >= {MIN_M_FACTOR}N "
             "realizations for a usable sample Gram matrix", "M_factor")
    if not 0 <= s < 2**64:
        fail(f"seed must be an unsigned 64-bit integer, got {s}", "seed")
    if half_spaces not in (1, 2):
        fail(f"half_spaces must be 1 or 2, got {half_spaces}", "half_spaces")
    if not isinstance(baseline, bool):
        fail(f"baseline must be true or false, got {baseline!r}", "baseline")
    if not 0 < tau < 1:
        fail(f"tau must lie in (0, 1), got {tau}", "tau")
    if not 0 < rho < 1:
        fail(f"rho must lie in (0, 1), got {rho}", "rho")
    if not isinstance(name, str):
        fail("name must be a string", "name")

    return ScenarioConfig(
        dim=dim, Lx=float(Lx), Ly=float(Ly), Lz=float(Lz), wavelength=float(lam),
        seed=int(s), delta=float(delta), M_factor=M_factor, half_spaces=half_spaces,
        baseline=baseline, tau=float(tau), rho=float(rho), name=name,
    )


@dataclass
class RunReport:
    config: dict
    N: int
    M: int
    grid_counts: list
    lattice: dict
    eta_theory: float
    eta_effective: dict
    eigenvalues: list
    trace: float
    baseline: Optional[dict] = None
    timing: dict = field(default_factory=dict)
    versions: dict = field(default_factory=dict)

    def to_json(self, include_timing=True):
        d = asdict(self)
        if not include_timing:
            d.pop("timing")
        return json.dumps(d, indent=2, sort_keys=True) + "\n"


def _versions():
    from . import __version__

    return {"holodof": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version()}


def run_scenario(config, outdir=None, force=False, workers=1):
    """Lattice, synthesis, Gram spectrum and DoF read-off for one scenario.

    When ``outdir`` is given the results are written with
    :func:`emit_results`.  Module errors are re-raised with the scenario name
    prepended; files written by this call are removed on failure.
    """
    label = config.name or f"dim={config.dim}"
    t0 = time.perf_counter()
    try:
        scen = config.scenario()
        lattice = scen.lattice
        t1 = time.perf_counter()
        N = scen.N
        M = config.M_for(N)
        ens = build_ensemble(scen, M, config.seed, workers=workers)
        spec = gram_spectrum(ens)
        del ens
        eff = effective_dof(spec, config.tau, config.rho)
        t2 = time.perf_counter()
        baseline = None
        if config.baseline:
            Hb = iid_rayleigh_ensemble(N, M, config.seed, BASELINE_NAMESPACE, workers)
            bspec = gram_spectrum(Hb)
            del Hb
            beff = effective_dof(bspec, config.tau, config.rho)
            baseline = {"eigenvalues": bspec.eigenvalues.tolist(), "trace": bspec.trace,
                        "eta_effective": beff.as_dict()}
    except HolodofError as exc:
        exc.args = (f"scenario {label}: {exc.args[0]}",) + exc.args[1:]
        raise
    t3 = time.perf_counter()

    report = RunReport(
        config=config.echo(),
        N=N,
        M=M,
        grid_counts=list(scen.grid.counts),
        lattice={"modes": len(lattice), "variance_sum": lattice.total_variance(config.half_spaces),
                 "degenerate_modes": int(sum(md.degenerate for md in lattice.modes))},
        eta_theory=theoretical_dof(scen.aperture, half_spaces=config.half_spaces),
        eta_effective=eff.as_dict(),
        eigenvalues=spec.eigenvalues.tolist(),
        trace=spec.trace,
        baseline=baseline,
        timing={"lattice_s": t1 - t0, "ensemble_and_spectrum_s": t2 - t1,
                "baseline_s": t3 - t2, "total_s": t3 - t0},
        versions=_versions(),
    )
    if outdir is not None:
        emit_results(report, outdir, force=force)
    return report


def _fmt(x):
    return f"{x:.16e}"


def eigenvalues_csv(values):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["index", "eigenvalue"])
    for i, v in enumerate(values, start=1):
        w.writerow([i, _fmt(v)])
    return buf.getvalue()


def read_eigenvalues_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if rows[0] != ["index", "eigenvalue"]:
        raise ValueError(f"{path}: unexpected header {rows[0]}")
    return np.array([float(r[1]) for r in rows[1:]])


def lattice_csv(lattice):
    """Mode table ``ell,m,gamma,var_plus,var_minus`` as CSV text."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["ell", "m", "gamma", "var_plus", "var_minus"])
    for md in lattice.modes:
        w.writerow([md.ell, md.m, _fmt(md.gamma_lm), _fmt(md.var_plus), _fmt(md.var_minus)])
    return buf.getvalue()


def _atomic_write(path, text):
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit_results(report, outdir, force=False):
    """Write ``eigenvalues.csv``, ``report.json`` and, with a baseline,
    ``baseline_eigenvalues.csv`` into ``outdir``.

    Existing files are left alone unless ``force``; each file is written to a
    temporary name and renamed into place.  Returns the written paths.
    """
    outdir = Path(outdir)
    try:
        outdir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {outdir}: {exc.strerror}") from exc
    files = {outdir / "eigenvalues.csv": eigenvalues_csv(report.eigenvalues),
             outdir / "report.json": report.to_json()}
    if report.baseline is not None:
        files[outdir / "baseline_eigenvalues.csv"] = eigenvalues_csv(report.baseline["eigenvalues"])
    if not force:
        existing = [str(p) for p in files if p.exists()]
        if existing:
            raise FileExistsError(f"refusing to overwrite {', '.join(existing)} (use --force)")
    written = []
    try:
        for path, text in files.items():
            _atomic_write(path, text)
            written.append(path)
    except OSError as exc:
        for p in written:
            p.unlink(missing_ok=True)
        raise OSError(f"failed writing results to {outdir}: {exc}") from exc
    return written
