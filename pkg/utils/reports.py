import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional

import pandas as pd

from utils.catalog import Catalog
from utils.census import CensusReport, IncidenceGraph, label_key, vertex_key, vertex_name
from utils.orders import CyclicWord, Tables

logger = logging.getLogger(__name__)

TABLE_FORMATS = ("md", "csv", "json")


def select_table(tables: Tables, which: int) -> Dict[str, CyclicWord]:
    """Tables 1 and 3 are white words, 2 and 4 black words"""
    if which not in (1, 2, 3, 4):
        raise ValueError(f"no table {which}")
    return tables.white if which in (1, 3) else tables.black


def table_frame(words: Dict[str, CyclicWord]) -> pd.DataFrame:
    rows = [(label, str(words[label]), len(words[label])) for label in sorted(words, key=label_key)]
    return pd.DataFrame(rows, columns=["N", "order", "length"])


def render_table(tables: Tables, which: int, fmt: str = "md") -> str:
    """Markdown, CSV or JSON; deterministic for a given table"""
    if fmt == "json":
        # Both sides, so the file can be fed back to the census
        return dump_json(tables.to_dict())
    frame = table_frame(select_table(tables, which))[["N", "order"]]
    if fmt == "csv":
        return frame.to_csv(index=False, lineterminator="\n")
    if fmt == "md":
        lines = [f"Table {which}", "", "| N | order |", "|---|---|"]
        lines += [f"| {n} | {order} |" for n, order in frame.itertuples(index=False)]
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown table format {fmt!r}")


def catalog_frame(catalog: Catalog) -> pd.DataFrame:
    return pd.DataFrame(
        [
            {
                "id": c.id,
                "V": c.counts[0],
                "E": c.counts[1],
                "F": c.counts[2],
                "face degrees": " ".join(map(str, c.face_degrees)),
                "automorphisms": c.automorphisms,
                "partner": c.partner or "",
            }
            for c in catalog
        ]
    )


def histogram_frame(report: CensusReport, convention: str = "white") -> pd.DataFrame:
    row = report.genus_table.get(convention, {})
    return pd.DataFrame(
        [
            {
                "faces": faces,
                "choice vectors": count,
                f"genus ({convention})": row[faces].to_dict()["genus"] if faces in row else None,
            }
            for faces, count in sorted(report.face_histogram.items())
        ]
    )


def genus_frame(report: CensusReport) -> pd.DataFrame:
    records = []
    for convention, row in report.genus_table.items():
        for faces, estimate in sorted(row.items()):
            entry = estimate.to_dict()
            records.append({
                "convention": convention,
                "E": float(report.edge_counts[convention]),
                "faces": faces,
                "genus": entry["genus"],
                "flag": entry["flag"] or "",
            })
    return pd.DataFrame(records, columns=["convention", "E", "faces", "genus", "flag"])


def incidence_dot(g: IncidenceGraph, name: str = "incidence") -> str:
    """Undirected DOT; parallel edges drawn max(two-sided counts) times"""
    lines = [f"graph {name} {{", "  node [fontsize=10];"]
    for v in g.vertices:
        if v[0] == "w":
            lines.append(f'  "{vertex_name(v)}" [label="{v[1]}", shape=circle];')
        else:
            lines.append(
                f'  "{vertex_name(v)}" [label="{v[1]}", shape=circle, style=filled, '
                f'fillcolor=black, fontcolor=white];'
            )
    pairs = sorted(
        {tuple(sorted(p, key=vertex_key)) for p in g.adjacency},
        key=lambda p: (vertex_key(p[0]), vertex_key(p[1])),
    )
    for u, v in pairs:
        multiplicity = max(g.adjacency.get((u, v), 0), g.adjacency.get((v, u), 0))
        for _ in range(multiplicity):
            lines.append(f'  "{vertex_name(u)}" -- "{vertex_name(v)}";')
    lines.append("}")
    return "\n".join(lines) + "\n"


def dump_json(data: Any) -> str:
    return json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def write_text(path: Optional[str], text: str) -> None:
    """Write to ``path``, or to stdout when no path is given"""
    if path is None:
        print(text, end="")
        return
    out = Path(path)
    if out.parent and not out.parent.exists():
        out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text, encoding="utf-8")
    logger.info(f"Wrote {out}")


def load_tables(path: str) -> Tables:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return Tables.from_dict(data)
