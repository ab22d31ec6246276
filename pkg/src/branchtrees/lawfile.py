"""Law file loading.

A law file is a JSON document with exactly two top-level keys::

    {
      "p0": 0.25,
      "atoms": [
        {"prob": 0.75, "ages": [1, 1]}
      ]
    }

``p0`` is the childlessness probability, each atom pairs a probability
``prob`` with a nondecreasing list of positive integer bearing ``ages``.
The masses must sum to 1.  Unknown keys are rejected so typos do not
silently drop mass.  Parse errors carry the line (from the JSON decoder)
or the offending field path.
"""

from __future__ import annotations

import json
from pathlib import Path

from .errors import InputError, LawParseError
from .laws import BUILTIN_LAWS, ReproductionLaw, validate_law

BUILTIN_PREFIX = "builtin:"


def parse_law(text: str, source: str = "<string>") -> ReproductionLaw:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise LawParseError(exc.msg, line=exc.lineno, source=source) from None

    if not isinstance(doc, dict):
        raise LawParseError("top level must be an object", source=source)
    unknown = set(doc) - {"p0", "atoms"}
    if unknown:
        raise LawParseError(
            "unknown key(s)", field=",".join(sorted(unknown)), source=source
        )

    p0 = doc.get("p0", 0.0)
    if not isinstance(p0, (int, float)) or isinstance(p0, bool):
        raise LawParseError("p0 must be a number", field="p0", source=source)

    raw_atoms = doc.get("atoms", [])
    if not isinstance(raw_atoms, list):
        raise LawParseError("atoms must be an array", field="atoms", source=source)

    atoms = []
    for i, entry in enumerate(raw_atoms):
        field = f"atoms[{i}]"
        if not isinstance(entry, dict):
            raise LawParseError("atom must be an object", field=field, source=source)
        extra = set(entry) - {"prob", "ages"}
        if extra:
            raise LawParseError(
                "unknown key(s)", field=f"{field}.{sorted(extra)[0]}", source=source
            )
        if "prob" not in entry or "ages" not in entry:
            raise LawParseError(
                "atom needs 'prob' and 'ages'", field=field, source=source
            )
        prob = entry["prob"]
        if not isinstance(prob, (int, float)) or isinstance(prob, bool):
            raise LawParseError(
                "prob must be a number", field=f"{field}.prob", source=source
            )
        ages = entry["ages"]
        if not isinstance(ages, list):
            raise LawParseError(
                "ages must be an array", field=f"{field}.ages", source=source
            )
        atoms.append((prob, ages))

    try:
        return validate_law(p0, atoms)
    except InputError as exc:
        raise LawParseError(str(exc), source=source) from None


def load_law(path: str | Path) -> ReproductionLaw:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise LawParseError(f"cannot read file: {exc.strerror}", source=str(path)) from None
    return parse_law(text, source=str(path))


def resolve_law(source: str) -> ReproductionLaw:
    """Load a law from ``builtin:NAME`` or from a file path."""
    if source.startswith(BUILTIN_PREFIX):
        name = source[len(BUILTIN_PREFIX):]
        try:
            return BUILTIN_LAWS[name]
        except KeyError:
            known = ", ".join(sorted(BUILTIN_LAWS))
            raise LawParseError(
                f"unknown builtin law {name!r} (known: {known})", source=source
            ) from None
    return load_law(source)
