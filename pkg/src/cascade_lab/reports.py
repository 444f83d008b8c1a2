"""Artifact emission: JSON documents, CSV tables and gnuplot scripts.

Every file starts by declaring :data:`SCHEMA_VERSION`; JSON documents carry
it as a field, CSV and gnuplot files as a leading comment line.
"""

import logging
from pathlib import Path
from typing import Dict, List, NamedTuple, Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field

from cascade_lab.settings import SCHEMA_VERSION

logger = logging.getLogger(__name__)

# CSV records end in CRLF
CRLF = "\r\n"

SCHEMA_LINE = f"# schema_version: {SCHEMA_VERSION}"


class RunSummary(BaseModel):
    """Scalar results and pass flags of one command."""

    schema_version: str = SCHEMA_VERSION
    command: str
    values: Dict[str, float] = Field(default_factory=dict)
    flags: Dict[str, bool] = Field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.flags.values())


class PlotSpec(NamedTuple):
    xlabel: str
    ylabel: str
    columns: Sequence[int] = ()
    logscale: str = ""
    title: str = ""


def ensure_dir(path: Path) -> Path:
    path.mkdir(parents=True, exist_ok=True)
    return path


def write_json(path: Path, document: BaseModel) -> Path:
    return write_text(path, document.model_dump_json(indent=2))


def write_text(path: Path, text: str) -> Path:
    ensure_dir(path.parent)
    path.write_text(text.rstrip("\n") + "\n", encoding="utf-8")
    logger.info(f"Wrote {path}")
    return path


def write_csv(path: Path, rows: np.ndarray, header: Sequence[str]) -> Path:
    """Numeric table with a schema line and a column header, CRLF terminated."""
    data = np.atleast_2d(np.asarray(rows, dtype=np.float64))
    if data.size and data.shape[1] != len(header):
        raise ValueError(f"{len(header)} column names for {data.shape[1]} columns")
    ensure_dir(path.parent)
    with path.open("w", encoding="utf-8", newline="") as f:
        f.write(SCHEMA_LINE + CRLF)
        f.write(",".join(_quote(name) for name in header) + CRLF)
        if data.size:
            np.savetxt(f, data, delimiter=",", fmt="%.17g", newline=CRLF)
    logger.info(f"Wrote {path} ({len(data) if data.size else 0} rows)")
    return path


def _quote(field: str) -> str:
    if any(ch in field for ch in ',"\r\n'):
        return '"' + field.replace('"', '""') + '"'
    return field


def gnuplot_script(csv_name: str, header: Sequence[str], plot: PlotSpec) -> str:
    columns = list(plot.columns) or list(range(2, len(header) + 1))
    lines = [
        SCHEMA_LINE,
        'set datafile separator ","',
        "set key autotitle columnhead",
        f'set xlabel "{plot.xlabel}"',
        f'set ylabel "{plot.ylabel}"',
    ]
    if plot.title:
        lines.append(f'set title "{plot.title}"')
    if plot.logscale:
        lines.append(f"set logscale {plot.logscale}")
    series = ", \\\n     ".join(
        f'"{csv_name}" using 1:{c} with linespoints' for c in columns
    )
    lines.append(f"plot {series}")
    return "\n".join(lines) + "\n"


def write_table(
    out_dir: Path,
    stem: str,
    rows: np.ndarray,
    header: Sequence[str],
    plot: Optional[PlotSpec] = None,
) -> List[Path]:
    """CSV ``<stem>.csv`` plus, when ``plot`` is given, ``<stem>.gp`` next to it."""
    csv_path = write_csv(out_dir / f"{stem}.csv", rows, header)
    written = [csv_path]
    if plot is not None:
        script = out_dir / f"{stem}.gp"
        script.write_text(
            gnuplot_script(csv_path.name, header, plot), encoding="utf-8"
        )
        written.append(script)
    return written


def read_csv(path: Path) -> np.ndarray:
    """Load a table written by :func:`write_csv`."""
    return np.atleast_2d(np.loadtxt(path, delimiter=",", comments="#", skiprows=2))
