"""Deterministic synthetic ABO3 dataset.

Stands in for the published perovskite formation-energy data, which cannot
be redistributed.  Compositions are drawn from charge-compatible A/B pairs,
cells are distorted cubic perovskites sized from ionic radii, and the target
is a smooth nonlinear function of physically motivated descriptors plus
Gaussian noise.  The descriptors are all recoverable from the featurized graph.
"""

from __future__ import annotations

import math

import numpy as np

from ..core import CrystalStructure, Lattice, Site, canonical_perovskite, lookup_element_properties
from ..ewald import EwaldConfig, ewald_site_energies

# (A candidates, B candidates) per A-site charge +1, +2, +3
PAIRINGS = (
    (("Na", "K", "Rb", "Cs", "Ag"), ("Nb", "Ta", "V")),
    (("Ca", "Sr", "Ba", "Pb", "Cd"), ("Ti", "Zr", "Hf", "Sn", "Mn", "Mo", "W", "Ge", "Pt")),
    (("La", "Pr", "Nd", "Sm", "Gd", "Y", "Bi"), ("Al", "Ga", "Sc", "In", "Cr", "Fe", "Co", "Ni", "Rh", "Ru", "Ir")),
)
PAIRING_WEIGHTS = (0.2, 0.4, 0.4)
NOISE_EV = 0.05
_R_OXYGEN = lookup_element_properties("O").anionic_radius


def tolerance_factor(r_a: float, r_b: float, r_o: float = _R_OXYGEN) -> float:
    return (r_a + r_o) / (math.sqrt(2.0) * (r_b + r_o))


def synthetic_target(structure: CrystalStructure, ewald: np.ndarray) -> float:
    """Noise-free formation energy (eV/atom) of a canonical (A, B, O, O, O) cell."""
    a = lookup_element_properties(structure.sites[0].element)
    b = lookup_element_properties(structure.sites[1].element)
    t = tolerance_factor(a.cationic_radius, b.cationic_radius)
    ionic_contrast = 3.44 - b.electronegativity
    madelung_per_atom = float(np.sum(ewald)) / len(ewald)
    return (
        -2.0
        + 0.30 * (a.first_ionization - 5.5)
        - 0.60 * (ionic_contrast - 1.6)
        + 6.0 * (t - 0.95) ** 2
        + 0.35 * math.tanh(2.0 * (a.electronegativity - 1.2))
        + 0.03 * (madelung_per_atom + 35.0)
    )


def _random_cell(rng: np.random.Generator, a_el: str, b_el: str) -> CrystalStructure:
    r_b = lookup_element_properties(b_el).cationic_radius
    a0 = 0.97 * 2.0 * (r_b + _R_OXYGEN) * (1.0 + rng.uniform(-0.015, 0.015))
    c_over_a = 1.0 + rng.uniform(0.0, 0.03)
    lattice = Lattice(np.diag([a0, a0, a0 * c_over_a]))
    frac = np.array([
        [0.0, 0.0, 0.0],
        [0.5, 0.5, 0.5 + rng.uniform(-0.03, 0.03)],
        [0.5, 0.5, 0.0],
        [0.5, 0.0, 0.5],
        [0.0, 0.5, 0.5],
    ])
    frac[2:] += rng.uniform(-0.02, 0.02, size=(3, 3))
    frac = np.mod(frac, 1.0)
    species = [a_el, b_el, "O", "O", "O"]
    order = rng.permutation(5)
    sites = [Site(species[i], tuple(frac[i])) for i in order]
    return CrystalStructure(lattice, tuple(sites))


def generate_structures(n: int = 246, seed: int = 1, noise: float = NOISE_EV,
                        ewald: EwaldConfig | None = None) -> list[CrystalStructure]:
    """``n`` labelled perovskite structures, reproducible from ``seed``."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        group = rng.choice(len(PAIRINGS), p=PAIRING_WEIGHTS)
        a_pool, b_pool = PAIRINGS[group]
        a_el = a_pool[rng.integers(len(a_pool))]
        b_el = b_pool[rng.integers(len(b_pool))]
        cell = _random_cell(rng, a_el, b_el)
        canon = canonical_perovskite(cell)
        energy = synthetic_target(canon, ewald_site_energies(canon, ewald))
        energy += noise * rng.standard_normal()
        out.append(CrystalStructure(cell.lattice, cell.sites, round(float(energy), 10)))
    return out


def single_feature_table(n: int = 300, n_features: int = 10, feature: int = 3, seed: int = 0,
                         noise: float = 0.01) -> tuple[np.ndarray, np.ndarray]:
    """Uniform random columns; the target depends on column ``feature`` only.

    A check for tree importances: the generating column should collect
    almost all of the split gain.
    """
    rng = np.random.default_rng(seed)
    x = rng.uniform(-2.0, 2.0, size=(n, n_features))
    y = np.sin(1.5 * x[:, feature]) + 0.5 * x[:, feature] + noise * rng.standard_normal(n)
    return x, y
