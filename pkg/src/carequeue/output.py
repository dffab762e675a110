"""CSV artifacts and run manifests.

Every artifact starts with a ``#schema=<name>-v<N>`` tag line so consumers
can refuse files they do not understand. Numbers are written with 10
significant digits; output is UTF-8 with LF endings and contains nothing
run-dependent beyond the data, so identical runs produce identical bytes.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Dict, Iterable, List, Sequence, Tuple

__all__ = [
    "Schema",
    "SCHEMAS",
    "format_value",
    "write_csv",
    "read_csv",
    "write_manifest",
]


@dataclass(frozen=True)
class Schema:
    name: str
    version: int
    columns: Tuple[str, ...]

    @property
    def tag(self) -> str:
        return f"{self.name}-v{self.version}"


SCHEMAS: Dict[str, Schema] = {
    s.name: s for s in (
        Schema("threshold", 1, ("a", "J_short", "se_short", "J_long", "se_long")),
        Schema("sweep", 1, ("param", "value", "policy", "J", "se", "improvement_pct")),
        Schema("clearing", 1, ("i", "j", "a", "c1", "c2", "diff", "ordering_pass")),
        Schema("tradeoff", 1, ("alpha", "beta", "gamma", "a", "rule_chosen",
                               "avg_queue_all", "avg_queue_hi")),
        Schema("simulate", 1, ("rep", "seed", "total_cost", "avg_queue_all",
                               "avg_queue_hi", "discharges")),
    )
}


def format_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return f"{v:.10g}"
    return str(v)


def write_csv(path: str, schema: Schema, rows: Iterable[Sequence]) -> None:
    """Write rows under the schema's header; empty input gives a header-only
    file. Raises ValueError when a row does not match the schema."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"#schema={schema.tag}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(schema.columns)
        for row in rows:
            if len(row) != len(schema.columns):
                raise ValueError(
                    f"row of width {len(row)} does not fit schema {schema.tag} "
                    f"({len(schema.columns)} columns)")
            writer.writerow([format_value(v) for v in row])


def read_csv(path: str) -> Tuple[str, List[str], List[List[str]]]:
    """Load an artifact back: (schema tag, header, raw string rows)."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        first = fh.readline().strip()
        if not first.startswith("#schema="):
            raise ValueError(f"{path} has no #schema tag")
        tag = first[len("#schema="):]
        reader = csv.reader(fh)
        header = next(reader, [])
        return tag, header, [row for row in reader if row]


def write_manifest(path: str, entries: Dict[str, object]) -> None:
    """key=value sidecar with every resolved parameter, sorted by key."""
    buf = io.StringIO()
    for key in sorted(entries):
        buf.write(f"{key}={_manifest_value(entries[key])}\n")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(buf.getvalue())


def _manifest_value(v) -> str:
    if isinstance(v, (list, tuple)):
        return ",".join(_manifest_value(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)
