"""Schema-checked loading of carequeue CSV artifacts.

Every artifact starts with a ``#schema=<tag>`` line; rendering refuses a
file whose tag it does not support rather than guessing at columns.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Dict, List

SUPPORTED = {
    "threshold-v1": ("a", "J_short", "se_short", "J_long", "se_long"),
    "sweep-v1": ("param", "value", "policy", "J", "se", "improvement_pct"),
    "clearing-v1": ("i", "j", "a", "c1", "c2", "diff", "ordering_pass"),
    "tradeoff-v1": ("alpha", "beta", "gamma", "a", "rule_chosen",
                    "avg_queue_all", "avg_queue_hi"),
}


class SchemaError(ValueError):
    """The file's schema tag or header does not match a supported schema."""


@dataclass
class Artifact:
    tag: str
    columns: List[str]
    rows: List[Dict[str, str]]

    def __len__(self):
        return len(self.rows)

    def floats(self, column: str) -> List[float]:
        return [float(r[column]) for r in self.rows if r[column] != ""]


def load_artifact(path: str, expected_tag: str) -> Artifact:
    """Read one artifact, insisting on the expected schema tag."""
    if expected_tag not in SUPPORTED:
        raise SchemaError(f"no reader for schema {expected_tag!r}")
    with open(path, "r", encoding="utf-8", newline="") as fh:
        first = fh.readline().strip()
        if not first.startswith("#schema="):
            raise SchemaError(f"{path}: missing #schema tag; expected {expected_tag}")
        tag = first[len("#schema="):]
        if tag != expected_tag:
            raise SchemaError(f"{path}: schema {tag!r}, expected {expected_tag!r}")
        reader = csv.reader(fh)
        header = next(reader, [])
        if tuple(header) != SUPPORTED[tag]:
            raise SchemaError(
                f"{path}: header {header} does not match schema {tag}")
        rows = [dict(zip(header, row)) for row in reader if row]
    return Artifact(tag=tag, columns=list(header), rows=rows)
