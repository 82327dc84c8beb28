"""
Adding thickness: the volumetric array
======================================

Stacking planes of a 4 x 4 wavelength square over one wavelength of depth
lets the array separate waves arriving from above and from below.  Each
mode now carries two independent amplitudes, so the DoF doubles, and the
depth itself does not matter.  Keeping only one half-space gives back the
planar count.
"""

import warnings

from holodof import (
    Aperture,
    Scenario,
    build_ensemble,
    effective_dof,
    gram_spectrum,
    parse_config,
    scenario_path,
    theoretical_dof,
)
from holodof.dof import EnsembleSizeWarning

cfg = parse_config(scenario_path("fig4-small"))
ap3 = cfg.aperture
ap2 = Aperture(ap3.Lx, ap3.Ly, 0.0, ap3.wavelength)

print(f"eta 3D = {theoretical_dof(ap3):.2f}, eta 2D = {theoretical_dof(ap2):.2f}")
for depth in (0.5, 1.0, 2.0):
    a = Aperture.in_wavelengths(4, 4, depth, wavelength=ap3.wavelength)
    print(f"  depth {depth} lambda: eta 3D = {theoretical_dof(a):.2f}")

results = {}
for label, ap, hs in (("2D", ap2, 2), ("3D", ap3, 2), ("3D one half-space", ap3, 1)):
    scen = Scenario(ap, cfg.delta * cfg.wavelength, half_spaces=hs)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", EnsembleSizeWarning)
        spec = gram_spectrum(build_ensemble(scen, cfg.M_for(scen.N), cfg.seed))
    results[label] = effective_dof(spec, cfg.tau, cfg.rho)
    print(f"{label:>18}: N = {scen.N:4d}, effective DoF {results[label].as_dict()}")

r = results["3D"].trace_fraction / results["2D"].trace_fraction
print(f"3D / 2D = {r:.3f}")
