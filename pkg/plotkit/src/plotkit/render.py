"""Turn a sweep results CSV into figures plus deterministic series sidecars.

Three figure kinds over the fixed CSV schema:

* ``bias``: ML bias curves against alpha, one series per register count m
  (at a fixed f).
* ``variance``: normalized variance against alpha, one series per scheme
  (at a fixed f and m).
* ``improvement``: 100 * (var_scheme - var_ml) / var_scheme against alpha,
  one series per plug-in scheme (at a fixed f and m).

Image bytes depend on the rendering toolkit, so every figure is accompanied
by a ``<name>.series.json`` sidecar holding exactly the plotted points; the
sidecar is byte-deterministic and is what tests pin down.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

EXPECTED_HEADER = (
    "scheme,f,alpha,m,trials,true_n,mean_est,bias_norm,var_norm,"
    "theory_var_norm,cr_var_norm,improvement_of_ml,fallback_count,seed"
)

KINDS = ("bias", "variance", "improvement")
PLUGIN_SCHEMES = ("s1", "s2", "s3")


class SchemaError(ValueError):
    """The CSV does not carry the expected sweep schema."""


class EmptySelectionError(ValueError):
    """No rows match the requested (kind, f, m) selection."""


@dataclass(frozen=True)
class FigureSpec:
    """What to draw and where to put it."""

    kind: str  # bias | variance | improvement
    f: float
    m: Optional[int]  # required for variance/improvement; None = all m for bias
    out_dir: Path
    image_format: str = "svg"  # svg | png

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.image_format not in ("svg", "png"):
            raise ValueError(f"format must be svg or png, got {self.image_format!r}")
        if self.kind in ("variance", "improvement") and self.m is None:
            raise ValueError(f"kind {self.kind!r} needs an explicit --m")

    @property
    def stem(self) -> str:
        m_tag = "all" if self.m is None else str(self.m)
        return f"{self.kind}_f{self.f:g}_m{m_tag}"


def load_rows(csv_path) -> list[dict]:
    """Read and validate the sweep CSV; header must match verbatim."""
    with open(csv_path, "r", encoding="utf-8", newline="") as fh:
        header = fh.readline().rstrip("\r\n")
        if header != EXPECTED_HEADER:
            raise SchemaError(
                f"unexpected results header:\n  got:      {header}\n  expected: {EXPECTED_HEADER}"
            )
        reader = csv.DictReader(fh, fieldnames=EXPECTED_HEADER.split(","))
        rows = list(reader)
    if any(None in row.values() or None in row for row in rows):
        raise SchemaError(f"ragged row in {csv_path}")
    return rows


def _series_points(rows, y_column, scale=1.0):
    """Sorted (alpha, y) pairs, skipping empty normalized cells."""
    points = []
    for row in rows:
        cell = row[y_column]
        if cell == "":
            continue
        points.append((float(row["alpha"]), float(cell) * scale))
    points.sort()
    return points


def build_series(rows: list[dict], spec: FigureSpec) -> list[dict]:
    """The plotted points for a spec: [{label, x, y}, ...]."""
    matching = [r for r in rows if float(r["f"]) == spec.f]
    if spec.m is not None:
        matching = [r for r in matching if int(r["m"]) == spec.m]
    series: list[dict] = []
    if spec.kind == "bias":
        for m in sorted({int(r["m"]) for r in matching}):
            pts = _series_points(
                [r for r in matching if int(r["m"]) == m and r["scheme"] == "ml"],
                "bias_norm",
            )
            if pts:
                series.append(
                    {"label": f"m={m}", "x": [p[0] for p in pts], "y": [p[1] for p in pts]}
                )
    elif spec.kind == "variance":
        for scheme in ("ml", *PLUGIN_SCHEMES):
            pts = _series_points(
                [r for r in matching if r["scheme"] == scheme], "var_norm"
            )
            if pts:
                series.append(
                    {"label": scheme, "x": [p[0] for p in pts], "y": [p[1] for p in pts]}
                )
    else:  # improvement
        for scheme in PLUGIN_SCHEMES:
            pts = _series_points(
                [r for r in matching if r["scheme"] == scheme],
                "improvement_of_ml",
                scale=100.0,
            )
            if pts:
                series.append(
                    {"label": scheme, "x": [p[0] for p in pts], "y": [p[1] for p in pts]}
                )
    if not series:
        raise EmptySelectionError(
            f"no rows match kind={spec.kind} f={spec.f:g} m={spec.m}"
        )
    return series


_Y_LABEL = {
    "bias": "|mean/n - 1| (dimensionless)",
    "variance": "Var(est/n) (dimensionless)",
    "improvement": "variance improvement of ml (%)",
}


def render(csv_path, spec: FigureSpec) -> tuple[Path, Path]:
    """Render one figure; returns (image path, sidecar path)."""
    rows = load_rows(csv_path)
    series = build_series(rows, spec)

    spec.out_dir.mkdir(parents=True, exist_ok=True)
    image_path = spec.out_dir / f"{spec.stem}.{spec.image_format}"
    sidecar_path = spec.out_dir / f"{spec.stem}.series.json"

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for entry in series:
        ax.plot(entry["x"], entry["y"], marker="o", markersize=3, label=entry["label"])
    ax.set_xlabel("alpha (dimensionless)")
    ax.set_ylabel(_Y_LABEL[spec.kind])
    title_m = "" if spec.m is None else f", m={spec.m}"
    ax.set_title(f"{spec.kind} vs alpha (f={spec.f:g}{title_m})")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(image_path)
    plt.close(fig)

    sidecar = {
        "kind": spec.kind,
        "f": spec.f,
        "m": spec.m,
        "y_column": {"bias": "bias_norm", "variance": "var_norm",
                     "improvement": "improvement_of_ml"}[spec.kind],
        "series": series,
    }
    with open(sidecar_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(sidecar, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return image_path, sidecar_path
