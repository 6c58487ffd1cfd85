"""Published reference numbers for the 17-compound solvation set.

Each entry is (experimental dG, alternating-BVP dG, ADI dG) in kcal/mol. Keys
are lower-case names with spaces replaced by underscores, so a PQR file named
``<key>.pqr`` is matched to its row automatically.
"""

from __future__ import annotations

import re
from pathlib import Path

COMPOUNDS = {
    "glycerol_triacetate": (-8.84, -10.42, -9.90),
    "benzyl_bromide": (-2.38, -3.47, -3.98),
    "benzyl_chloride": (-1.93, -3.65, -4.13),
    "m-bis(trifluoromethyl)benzene": (1.07, -0.98, -0.94),
    "n,n-dimethyl-p-methoxybenzamide": (-11.01, -7.26, -7.27),
    "n,n-4-trimethylbenzamide": (-9.76, -5.81, -6.01),
    "bis-2-chloroethyl_ether": (-4.23, -2.68, -2.67),
    "1,1-diacetoxyethane": (-4.97, -6.63, -6.55),
    "1,1-diethoxyethane": (-3.28, -2.93, -2.84),
    "1,4-dioxane": (-5.05, -4.58, -4.48),
    "diethyl_propanedioate": (-6.00, -6.14, -6.13),
    "dimethoxymethane": (-2.93, -3.53, -3.53),
    "ethylene_glycol_diacetate": (-6.34, -7.04, -6.82),
    "1,2-diethoxyethane": (-3.54, -2.64, -2.56),
    "diethyl_sulfide": (-1.43, -1.06, -1.50),
    "phenyl_formate": (-4.08, -6.51, -6.77),
    "imidazole": (-9.81, -9.68, -9.52),
}

# summary statistics printed alongside the table
PUBLISHED_RMSE = {"bvp": 1.7774, "adi": 1.7985}
PUBLISHED_MAE = {"bvp": 1.3777, "adi": 1.3979}


def normalize(name: str) -> str:
    return re.sub(r"[\s_]+", "_", name.strip().lower())


def lookup(path_or_name: str | Path):
    """Reference row for a compound name or a PQR path named after it, else None."""
    key = normalize(Path(path_or_name).stem if str(path_or_name).endswith(".pqr") else str(path_or_name))
    return COMPOUNDS.get(key)


def experimental() -> dict:
    return {k: v[0] for k, v in COMPOUNDS.items()}
