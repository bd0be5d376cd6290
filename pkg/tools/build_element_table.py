"""Regenerate src/hyqgnn/data/elements.json and cross-check it.

Primary source: the periodic table JSON shipped inside the pymatgen wheel.
Cross-check: the SQLite database shipped inside the mendeleev wheel.
Neither package is needed at runtime; pass the extracted data files::

    python tools/build_element_table.py PERIODIC_TABLE_JSON_GZ MENDELEEV_DB
"""
import gzip
import json
import math
import sqlite3
import sys
from pathlib import Path

OUT = Path(__file__).resolve().parents[1] / "src" / "hyqgnn" / "data" / "elements.json"
MAX_Z = 83  # H .. Bi
ROMAN = ["II", "III", "IV", "V", "VI", "VII", "VIII", "IX", "X", "XI", "XII"]


def _radius(shannon, charges):
    """Crystal radius at the first charge in ``charges`` with data, CN VI preferred."""
    for charge in charges:
        table = shannon.get(str(charge))
        if not table:
            continue
        if "VI" in table:
            cn = "VI"
        else:
            # nearest available coordination to VI
            cn = min(table, key=lambda c: abs(ROMAN.index(c) - 4) if c in ROMAN else 99)
        spins = table[cn]
        entry = spins.get("") or spins.get("High Spin") or next(iter(spins.values()))
        return entry["crystal_radius"], charge, cn
    return 0.0, None, None


def build(pmg_path):
    data = json.load(gzip.open(pmg_path))
    rows = {}
    for sym, d in data.items():
        z = d.get("Atomic no") if isinstance(d, dict) else None
        if z is None or z > MAX_Z or sym in ("D", "T"):
            continue
        common = list(d.get("Common oxidation states") or [])
        icsd = [s for s in d.get("ICSD oxidation states") or [] if s not in common]
        states = common + icsd
        shannon = d.get("Shannon radii") or {}
        cat, cat_q, cat_cn = _radius(shannon, [s for s in states if s > 0])
        an, an_q, an_cn = _radius(shannon, [s for s in states if s < 0])
        x = d.get("X")
        ea = d.get("Electron affinity")
        rows[sym] = {
            "atomic_number": z,
            "electronegativity": None if x is None or (isinstance(x, float) and math.isnan(x)) else x,
            "electron_affinity": None if ea is None else round(float(ea), 6),
            "first_ionization": round(float(d["Ionization energies"][0]), 6),
            "cationic_radius": cat,
            "anionic_radius": an,
            "oxidation_states": states,
            "radius_source": {"cation": [cat_q, cat_cn], "anion": [an_q, an_cn]},
        }
    return dict(sorted(rows.items(), key=lambda kv: kv[1]["atomic_number"]))


def cross_check(rows, db_path):
    con = sqlite3.connect(db_path)
    bad = []
    for sym, r in rows.items():
        z = r["atomic_number"]
        en, ea = con.execute(
            "select en_pauling, electron_affinity from elements where atomic_number=?", (z,)
        ).fetchone()
        ie = con.execute(
            "select ionization_energy from ionizationenergies where atomic_number=? and ion_charge=0", (z,)
        ).fetchone()
        checks = [("electronegativity", r["electronegativity"], en, 0.02),
                  ("electron_affinity", r["electron_affinity"], ea, 0.05),
                  ("first_ionization", r["first_ionization"], ie[0] if ie else None, 0.01)]
        for kind in ("cation", "anion"):
            q, cn = r["radius_source"][kind]
            if q is None:
                continue
            hit = con.execute(
                "select crystal_radius from ionicradii where atomic_number=? and charge=? and coordination=?",
                (z, q, cn),
            ).fetchall()
            ref = hit[0][0] / 100.0 if hit else None
            checks.append((f"{kind}ic_radius", r[f"{kind}ic_radius"], ref, 0.011))
        for name, ours, ref, tol in checks:
            if ours is None or ref is None:
                if ours != ref and not (ours is None and ref is None):
                    bad.append((sym, name, ours, ref))
                continue
            if abs(ours - ref) > tol:
                bad.append((sym, name, ours, ref))
    return bad


def main():
    rows = build(sys.argv[1])
    bad = cross_check(rows, sys.argv[2])
    for b in bad:
        print("MISMATCH %-3s %-18s ours=%s ref=%s" % b)
    payload = {"version": "1", "radius_convention": "Shannon crystal radius, CN VI preferred",
               "elements": rows}
    OUT.write_text(json.dumps(payload, indent=1) + "\n")
    print(f"wrote {len(rows)} elements to {OUT}")


if __name__ == "__main__":
    main()
