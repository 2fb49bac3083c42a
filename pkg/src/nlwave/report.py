"""Versioned JSON reports and delimited table exports.

Reports are plain dictionaries rendered deterministically (sorted keys,
fixed separators) so identical runs produce byte-identical files.
Timings live in a separate section that is dropped when the
reproducibility flag is set.  Every numeric claim carries the tolerance
it was checked against.
"""
from __future__ import annotations

import csv
import json

import numpy as np

SCHEMA_VERSION = 1

__all__ = [
    "SCHEMA_VERSION",
    "new_report",
    "add_claim",
    "write_json",
    "write_eigenvalue_csv",
    "write_columns",
]


def new_report(kind: str, model: str, config: dict) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": kind,
        "model": model,
        "config": config,
        "claims": [],
        "sections": {},
        "timings": {},
    }


def add_claim(doc: dict, name: str, value, tolerance, passed: bool,
              note: str = "") -> None:
    """Record a checked numeric claim with the tolerance it was held to."""
    entry = {"name": name, "value": _jsonable(value),
             "tolerance": _jsonable(tolerance), "passed": bool(passed)}
    if note:
        entry["note"] = note
    doc["claims"].append(entry)


def _jsonable(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, complex):
        return {"re": x.real, "im": x.imag}
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def write_json(path, doc: dict, reproducible: bool = False) -> None:
    doc = dict(doc)
    if reproducible:
        doc.pop("timings", None)
    with open(path, "w") as fh:
        json.dump(_jsonable(doc), fh, sort_keys=True,
                  separators=(",", ": "), indent=1)
        fh.write("\n")


def write_eigenvalue_csv(path, eigenvalues, outer_mass,
                         delocalized_threshold: float,
                         decay_rates=None) -> None:
    """Eigenvalue table: Re, Im, localization flag, decay-rate fit."""
    lam = np.asarray(eigenvalues)
    order = np.argsort(-lam.real)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["re", "im", "delocalized", "decay_rate"])
        for k in order:
            rate = "" if decay_rates is None else f"{decay_rates[k]:.6g}"
            w.writerow([f"{lam[k].real:.12g}", f"{lam[k].imag:.12g}",
                        int(outer_mass[k] > delocalized_threshold), rate])


def write_columns(path, header: str, *columns) -> None:
    """Two-or-more column numeric text with a comment header."""
    np.savetxt(path, np.column_stack(columns), header=header)
