"""Ewald summation for periodic point charges, resolved per site.

Energies are split into real-space, reciprocal-space and self terms.  Pair
terms are shared half-and-half between the two sites, so the per-site values
add up to the total lattice energy.  Charges are in units of e, lengths in
Angstrom and energies in eV.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from .core import CrystalStructure, Lattice
from .errors import ChargeNotNeutral, ConvergenceFailure, DegenerateGeometry

COULOMB_EV_ANGSTROM = 14.399645  # e^2 / (4 pi eps0)

_GROWTH = 1.25


@dataclass(frozen=True)
class EwaldConfig:
    relative_accuracy: float = 1e-5
    splitting_parameter: float | str = "auto"
    max_growth_steps: int = 12

    def __post_init__(self):
        if not 0.0 < self.relative_accuracy < 1.0:
            raise ValueError("relative_accuracy must lie in (0, 1)")
        sp = self.splitting_parameter
        if sp != "auto" and not (isinstance(sp, (int, float)) and sp > 0):
            raise ValueError("splitting_parameter must be 'auto' or a positive number")


@dataclass(frozen=True)
class EwaldResult:
    site_energies: np.ndarray
    real: np.ndarray
    reciprocal: np.ndarray
    self_energy: np.ndarray
    alpha: float
    real_cutoff: float
    recip_cutoff: float

    @property
    def total_energy(self) -> float:
        return float(np.sum(self.site_energies))


def auto_splitting(n_sites: int, volume: float) -> float:
    """Default splitting parameter sqrt(pi) * (N / V^2)^(1/6), in 1/Angstrom."""
    return math.sqrt(math.pi) * (n_sites / volume**2) ** (1.0 / 6.0)


def _alpha(cfg: EwaldConfig, n_sites: int, volume: float) -> float:
    if cfg.splitting_parameter == "auto":
        return auto_splitting(n_sites, volume)
    return float(cfg.splitting_parameter)


def _translations(lattice: Lattice, cutoff: float) -> np.ndarray:
    # enough cells along each axis to cover a sphere of radius cutoff + cell diameter
    spacing = 1.0 / np.linalg.norm(lattice.reciprocal, axis=1)
    diameter = np.linalg.norm(lattice.matrix.sum(axis=0))
    reach = np.ceil((cutoff + diameter) / spacing).astype(int)
    axes = [np.arange(-r, r + 1) for r in reach]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
    return grid @ lattice.matrix


def _real_space(cart, q, lattice, alpha, cutoff) -> np.ndarray:
    shifts = _translations(lattice, cutoff)
    out = np.zeros(len(q))
    for i in range(len(q)):
        d = cart[None, :, :] + shifts[:, None, :] - cart[i]
        r = np.sqrt(np.einsum("mjk,mjk->mj", d, d))
        zero = r < 1e-8
        if np.count_nonzero(zero) > 1:
            raise DegenerateGeometry(f"site {i} overlaps another site or its image")
        keep = (r <= cutoff) & ~zero
        rr = np.where(keep, r, 1.0)
        pair = np.where(keep, erfc(alpha * rr) / rr, 0.0)
        out[i] = 0.5 * q[i] * np.sum(pair * q[None, :])
    return out


def _kvectors(lattice: Lattice, kcut: float) -> np.ndarray:
    recip = 2.0 * math.pi * lattice.reciprocal
    reach = np.ceil(kcut * np.linalg.norm(lattice.matrix, axis=1) / (2.0 * math.pi)).astype(int)
    axes = [np.arange(-r, r + 1) for r in reach]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
    grid = grid[np.any(grid != 0, axis=1)]
    k = grid @ recip
    k2 = np.einsum("ij,ij->i", k, k)
    return k[k2 <= kcut * kcut]


def _reciprocal(cart, q, lattice, alpha, kcut) -> np.ndarray:
    k = _kvectors(lattice, kcut)
    if len(k) == 0:
        return np.zeros(len(q))
    k2 = np.einsum("ij,ij->i", k, k)
    weight = (2.0 * math.pi / lattice.volume) * np.exp(-k2 / (4.0 * alpha**2)) / k2
    phase = np.exp(1j * (cart @ k.T))  # (n, K)
    structure_factor = phase.T @ q  # (K,)
    per_site = q * (np.real(phase * np.conj(structure_factor)[None, :]) @ weight)
    return per_site


def _evaluate(cart, q, lattice, alpha, rcut, kcut):
    real = _real_space(cart, q, lattice, alpha, rcut)
    recip = _reciprocal(cart, q, lattice, alpha, kcut)
    self_term = -alpha / math.sqrt(math.pi) * q**2
    return real, recip, self_term


def ewald_summation(structure: CrystalStructure, cfg: EwaldConfig | None = None) -> EwaldResult:
    """Per-site Ewald energies with cutoffs grown until converged.

    Cutoffs start at the usual Gaussian estimates, ``sqrt(-ln acc) / alpha`` in
    real space and ``2 alpha sqrt(-ln acc)`` in reciprocal space, and are then
    enlarged by 25% at a time until no site energy moves by more than
    ``relative_accuracy`` times the energy scale of the cell.
    """
    cfg = cfg or EwaldConfig()
    q = structure.charges
    if abs(q.sum()) > 1e-8:
        raise ChargeNotNeutral(f"total charge {q.sum():+g} is not zero")
    n = len(q)
    if not np.any(q):
        zeros = np.zeros(n)
        return EwaldResult(zeros, zeros, zeros, zeros, 0.0, 0.0, 0.0)

    lattice = structure.lattice
    cart = structure.cart_coords
    alpha = _alpha(cfg, n, lattice.volume)
    tail = math.sqrt(-math.log(cfg.relative_accuracy))
    rcut = tail / alpha
    kcut = 2.0 * alpha * tail

    prev = np.sum(_evaluate(cart, q, lattice, alpha, rcut, kcut), axis=0)
    for _ in range(cfg.max_growth_steps):
        rcut *= _GROWTH
        kcut *= _GROWTH
        parts = _evaluate(cart, q, lattice, alpha, rcut, kcut)
        cur = np.sum(parts, axis=0)
        scale = max(abs(cur.sum()), np.abs(cur).max(), 1e-300)
        if np.max(np.abs(cur - prev)) <= cfg.relative_accuracy * scale:
            real, recip, self_term = (p * COULOMB_EV_ANGSTROM for p in parts)
            return EwaldResult(cur * COULOMB_EV_ANGSTROM, real, recip, self_term,
                               alpha, rcut, kcut)
        prev = cur
    raise ConvergenceFailure(
        f"Ewald sum not converged to {cfg.relative_accuracy:g} after "
        f"{cfg.max_growth_steps} cutoff enlargements"
    )


def ewald_site_energies(structure: CrystalStructure, cfg: EwaldConfig | None = None) -> np.ndarray:
    """Per-site Ewald energies in eV; they sum to the total lattice energy."""
    return ewald_summation(structure, cfg).site_energies


def ewald_total_energy(structure: CrystalStructure, cfg: EwaldConfig | None = None) -> float:
    """Total Ewald energy from |S(k)|^2 and a full double sum.

    Uses the cutoffs and splitting of :func:`ewald_summation` but evaluates
    the lattice energy without any per-site split, so it can be compared
    against the sum of the site energies.
    """
    res = ewald_summation(structure, cfg)
    q = structure.charges
    if not np.any(q):
        return 0.0
    lattice = structure.lattice
    cart = structure.cart_coords
    alpha, rcut, kcut = res.alpha, res.real_cutoff, res.recip_cutoff

    shifts = _translations(lattice, rcut)
    real = 0.0
    for i in range(len(q)):
        for j in range(len(q)):
            d = cart[j] + shifts - cart[i]
            r = np.linalg.norm(d, axis=1)
            r = r[(r <= rcut) & (r > 1e-8)]
            real += q[i] * q[j] * np.sum(erfc(alpha * r) / r)
    real *= 0.5

    k = _kvectors(lattice, kcut)
    k2 = np.einsum("ij,ij->i", k, k)
    s = np.exp(1j * (k @ cart.T)) @ q
    recip = (2.0 * math.pi / lattice.volume) * np.sum(np.exp(-k2 / (4 * alpha**2)) / k2 * np.abs(s) ** 2)
    self_term = -alpha / math.sqrt(math.pi) * np.sum(q**2)
    return float((real + recip + self_term) * COULOMB_EV_ANGSTROM)


def madelung_constant(structure: CrystalStructure, formula_units: int, nearest_neighbor: float,
                      cfg: EwaldConfig | None = None) -> float:
    """Signed Madelung constant per formula unit, referred to ``nearest_neighbor``."""
    energy = ewald_site_energies(structure, cfg).sum()
    return float(energy / formula_units * nearest_neighbor / COULOMB_EV_ANGSTROM)
