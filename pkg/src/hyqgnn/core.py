"""Domain types, bundled element properties and periodic geometry helpers."""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ChargeNotNeutral, InvalidComposition, SchemaError, UnknownElement

# All 27 neighbour-cell offsets in {-1, 0, 1}^3.
_IMAGE_OFFSETS = np.array(list(itertools.product((-1, 0, 1), repeat=3)), dtype=float)

SITE_LABELS = ("A", "B", "O1", "O2", "O3")


@dataclass(frozen=True)
class Lattice:
    """Row-vector lattice: ``matrix[i]`` is lattice vector a_i in Angstrom."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.shape != (3, 3):
            raise ValueError(f"lattice must be 3x3, got shape {m.shape}")
        if not np.linalg.det(m) > 0:
            raise ValueError("lattice must be right-handed with positive volume")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def cubic(cls, a: float) -> "Lattice":
        return cls(np.eye(3) * a)

    @property
    def volume(self) -> float:
        return float(np.linalg.det(self.matrix))

    @property
    def reciprocal(self) -> np.ndarray:
        """Reciprocal vectors as rows, without the 2*pi factor."""
        return np.linalg.inv(self.matrix).T

    def to_cartesian(self, frac) -> np.ndarray:
        return np.asarray(frac, dtype=float) @ self.matrix

    def scaled(self, factor: float) -> "Lattice":
        return Lattice(self.matrix * factor)


@dataclass(frozen=True)
class Site:
    element: str
    frac: tuple
    oxidation_state: int | None = None

    def __post_init__(self):
        frac = tuple(float(x) for x in self.frac)
        if len(frac) != 3:
            raise ValueError("fractional coordinates must have 3 components")
        if not all(0.0 <= x < 1.0 for x in frac):
            raise ValueError(f"fractional coordinates must lie in [0, 1): {frac}")
        object.__setattr__(self, "frac", frac)


@dataclass(frozen=True)
class CrystalStructure:
    lattice: Lattice
    sites: tuple
    target_energy: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "sites", tuple(self.sites))

    @property
    def species(self) -> list[str]:
        return [s.element for s in self.sites]

    @property
    def frac_coords(self) -> np.ndarray:
        return np.array([s.frac for s in self.sites], dtype=float)

    @property
    def cart_coords(self) -> np.ndarray:
        return self.lattice.to_cartesian(self.frac_coords)

    @property
    def charges(self) -> np.ndarray:
        if any(s.oxidation_state is None for s in self.sites):
            raise ChargeNotNeutral("oxidation states have not been assigned")
        return np.array([s.oxidation_state for s in self.sites], dtype=float)

    def with_charges(self, charges: Sequence[int]) -> "CrystalStructure":
        if len(charges) != len(self.sites):
            raise ValueError("one charge per site required")
        sites = [replace(s, oxidation_state=int(q)) for s, q in zip(self.sites, charges)]
        return replace(self, sites=tuple(sites))

    def scaled(self, factor: float) -> "CrystalStructure":
        """Uniformly scale the cell; fractional coordinates are unchanged."""
        return replace(self, lattice=self.lattice.scaled(factor))


@dataclass(frozen=True)
class ElementProperties:
    symbol: str
    atomic_number: int
    electronegativity: float
    electron_affinity: float
    first_ionization: float
    cationic_radius: float
    anionic_radius: float
    oxidation_states: tuple = field(default=())

    def as_node_row(self) -> list[float]:
        """The six tabulated node descriptors, in node-feature order (Ewald excluded)."""
        return [
            float(self.atomic_number),
            self.electronegativity,
            self.electron_affinity,
            self.first_ionization,
            self.cationic_radius,
            self.anionic_radius,
        ]


@lru_cache(maxsize=None)
def _element_table() -> dict:
    text = resources.files("hyqgnn").joinpath("data/elements.json").read_text()
    return json.loads(text)["elements"]


def _num(value) -> float:
    return math.nan if value is None else float(value)


@lru_cache(maxsize=None)
def lookup_element_properties(symbol: str) -> ElementProperties:
    """Return the bundled table row for ``symbol``.

    Raises
    ------
    UnknownElement
        If the symbol is not in the table (H through Bi).
    """
    row = _element_table().get(symbol)
    if row is None:
        raise UnknownElement(symbol)
    return ElementProperties(
        symbol=symbol,
        atomic_number=int(row["atomic_number"]),
        electronegativity=_num(row["electronegativity"]),
        electron_affinity=_num(row["electron_affinity"]),
        first_ionization=_num(row["first_ionization"]),
        cationic_radius=float(row["cationic_radius"]),
        anionic_radius=float(row["anionic_radius"]),
        oxidation_states=tuple(row["oxidation_states"]),
    )


def known_elements() -> list[str]:
    return list(_element_table())


def min_image_distance(lattice: Lattice, a, b) -> float:
    """Shortest Cartesian distance between fractional points ``a`` and ``b``
    over the 27 nearest periodic images."""
    delta = np.asarray(b, dtype=float) - np.asarray(a, dtype=float)
    delta = delta - np.round(delta)
    images = (delta + _IMAGE_OFFSETS) @ lattice.matrix
    return float(np.sqrt(np.min(np.einsum("ij,ij->i", images, images))))


def distance_matrix(structure: CrystalStructure) -> np.ndarray:
    n = len(structure.sites)
    frac = structure.frac_coords
    d = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            d[i, j] = d[j, i] = min_image_distance(structure.lattice, frac[i], frac[j])
    return d


# -- perovskite handling -----------------------------------------------------

def _split_abo3(structure: CrystalStructure) -> tuple[int, int, list[int]]:
    species = structure.species
    if len(species) != 5:
        raise InvalidComposition(f"ABO3 needs 5 sites, got {len(species)}")
    oxygens = [i for i, el in enumerate(species) if el == "O"]
    cations = [i for i, el in enumerate(species) if el != "O"]
    if len(oxygens) != 3 or len(cations) != 2:
        raise InvalidComposition(f"not an ABO3 composition: {''.join(species)}")
    for i in cations:
        lookup_element_properties(species[i])
    # B sits in the oxygen octahedron, so it is the cation closer to the oxygens.
    frac = structure.frac_coords
    reach = [
        sum(min_image_distance(structure.lattice, frac[c], frac[o]) for o in oxygens)
        for c in cations
    ]
    a_idx, b_idx = cations
    if reach[1] > reach[0] + 1e-9:
        a_idx, b_idx = b_idx, a_idx
    return a_idx, b_idx, oxygens


def perovskite_charges(a_element: str, b_element: str) -> tuple[int, int]:
    """Charge model for ABO3: O is -2, B takes its first table state in
    {+3, +4, +5} and A balances to neutrality within {+1, +2, +3}."""
    b_props = lookup_element_properties(b_element)
    lookup_element_properties(a_element)
    b_charge = next((q for q in b_props.oxidation_states if q in (3, 4, 5)), None)
    if b_charge is None:
        raise InvalidComposition(f"{b_element} has no +3/+4/+5 state for the B site")
    a_charge = 6 - b_charge
    if a_charge not in (1, 2, 3):
        raise InvalidComposition(f"A-site charge {a_charge} for {a_element} is not allowed")
    return a_charge, b_charge


def canonical_perovskite(structure: CrystalStructure) -> CrystalStructure:
    """Reorder sites to (A, B, O, O, O) and assign oxidation states.

    Charges already present on every site are kept if they sum to zero.
    """
    a_idx, b_idx, oxygens = _split_abo3(structure)
    order = [a_idx, b_idx, *oxygens]
    sites = [structure.sites[i] for i in order]
    if all(s.oxidation_state is not None for s in sites):
        if sum(s.oxidation_state for s in sites) != 0:
            raise ChargeNotNeutral("assigned oxidation states do not sum to zero")
        return replace(structure, sites=tuple(sites))
    qa, qb = perovskite_charges(sites[0].element, sites[1].element)
    charges = [qa, qb, -2, -2, -2]
    sites = [replace(s, oxidation_state=q) for s, q in zip(sites, charges)]
    return replace(structure, sites=tuple(sites))


# -- JSON interchange --------------------------------------------------------

def structure_from_dict(doc: dict, index: int | None = None) -> CrystalStructure:
    where = "" if index is None else f" (record {index})"
    try:
        lattice = Lattice(np.array(doc["lattice"], dtype=float))
        sites = []
        for s in doc["sites"]:
            frac = np.mod(np.array(s["frac"], dtype=float), 1.0)
            frac[frac >= 1.0] = 0.0
            sites.append(Site(str(s["element"]), tuple(frac), s.get("oxidation_state")))
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"invalid structure document{where}: {exc}") from exc
    target = doc.get("target_ev")
    return CrystalStructure(lattice, tuple(sites), None if target is None else float(target))


def structure_to_dict(structure: CrystalStructure) -> dict:
    doc = {
        "lattice": structure.lattice.matrix.tolist(),
        "sites": [],
    }
    for site in structure.sites:
        entry = {"element": site.element, "frac": list(site.frac)}
        if site.oxidation_state is not None:
            entry["oxidation_state"] = site.oxidation_state
        doc["sites"].append(entry)
    if structure.target_energy is not None:
        doc["target_ev"] = structure.target_energy
    return doc


def load_structures(path) -> list[CrystalStructure]:
    text = Path(path).read_text()
    if not text.strip():
        return []
    docs = json.loads(text)
    if isinstance(docs, dict):
        docs = [docs]
    return [structure_from_dict(d, i) for i, d in enumerate(docs)]


def save_structures(structures: Iterable[CrystalStructure], path) -> None:
    docs = [structure_to_dict(s) for s in structures]
    Path(path).write_text(json.dumps(docs, indent=1) + "\n")


@lru_cache(maxsize=None)
def _reference_docs() -> dict:
    text = resources.files("hyqgnn").joinpath("data/reference_structures.json").read_text()
    return json.loads(text)


def reference_structures() -> dict[str, CrystalStructure]:
    """Bundled ionic test crystals (with charges) used to validate Ewald sums."""
    return {name: structure_from_dict(doc) for name, doc in _reference_docs().items()}


def reference_metadata(name: str) -> dict:
    """``formula_units``, ``nearest_neighbor`` (Angstrom) and literature ``madelung``."""
    doc = _reference_docs()[name]
    return {k: doc[k] for k in ("formula_units", "nearest_neighbor", "madelung")}
