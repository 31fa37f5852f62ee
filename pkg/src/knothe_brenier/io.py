"""Problem configuration, CSV output and SVG snapshots."""
from __future__ import annotations

import csv
import json
import math
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .cells import Atoms, sample_atoms, validate_atoms
from .continuation import FULL_SWEEP, STANDARD, Sample, Schedule, relative_area_errors
from .errors import InvalidProblem
from .geometry import ConvexPolygon, unit_square

FLOAT = "{:.17g}"
SVG_SIZE = 800.0
SVG_NS = "http://www.w3.org/2000/svg"


def fmt(x: float) -> str:
    return FLOAT.format(float(x))


@dataclass
class ProblemConfig:
    omega: ConvexPolygon
    atoms: Atoms
    schedule: Schedule
    seed: int | None = None
    snapshots: int = 5
    project_every: int = 0


def load_config(path: str | Path | None = None, *, steps: int | None = None,
                schedule: str | None = None, seed: int | None = None,
                n_atoms: int | None = None, snapshots: int | None = None,
                project_every: int | None = None) -> ProblemConfig:
    """Read a JSON problem file; keyword arguments override its entries.

    Recognized keys: ``omega`` (list of vertices, default unit square),
    ``atoms`` (list of points; drawn at random when absent), ``n_atoms``
    (default 5), ``seed``, ``steps`` (default 500), ``schedule``,
    ``snapshots``, ``project_every``. Raises :class:`InvalidProblem` with a
    readable message on any inconsistency.
    """
    raw = {}
    if path is not None:
        try:
            raw = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidProblem(f"cannot read config {path}: {exc}") from exc
        if not isinstance(raw, dict):
            raise InvalidProblem("config must be a JSON object")
    overrides = dict(steps=steps, schedule=schedule, seed=seed, n_atoms=n_atoms,
                     snapshots=snapshots, project_every=project_every)
    raw.update({k: v for k, v in overrides.items() if v is not None})

    try:
        omega = (ConvexPolygon.from_points(raw["omega"]) if "omega" in raw else unit_square())
    except (ValueError, TypeError) as exc:
        raise InvalidProblem(f"invalid omega: {exc}") from exc
    try:
        sched = Schedule(raw.get("schedule", STANDARD), int(raw.get("steps", 500)))
    except (ValueError, TypeError) as exc:
        raise InvalidProblem(f"invalid schedule: {exc}") from exc

    seed = raw.get("seed")
    if "atoms" in raw:
        try:
            atoms = Atoms(raw["atoms"])
        except (ValueError, TypeError) as exc:
            raise InvalidProblem(f"invalid atoms: {exc}") from exc
    else:
        n = int(raw.get("n_atoms", 5))
        if n < 1:
            raise InvalidProblem("n_atoms must be positive")
        rng = np.random.default_rng(seed)
        atoms = sample_atoms(omega, n, rng, distinct_first=sched.kind == FULL_SWEEP)
    validate_atoms(atoms, omega)
    if sched.kind == FULL_SWEEP:
        validate_atoms(atoms, omega, axis=0)
    return ProblemConfig(omega, atoms, sched, seed, int(raw.get("snapshots", 5)),
                         int(raw.get("project_every", 0)))


def trajectory_header(n: int) -> list:
    return (["step", "frame", "eps", "ratio", "min_eig", "z1", "z2"]
            + [f"p_{i}" for i in range(n)] + [f"area_{i}" for i in range(n)])


def write_trajectory(path: Path, samples: list) -> None:
    n = len(samples[0].prices) if samples else 0
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(trajectory_header(n))
        for k, s in enumerate(samples):
            w.writerow([k, s.frame, fmt(s.eps), fmt(s.ratio), fmt(s.min_eig),
                        fmt(s.correlation[0]), fmt(s.correlation[1])]
                       + [fmt(v) for v in s.prices] + [fmt(v) for v in s.areas])


def read_trajectory(path: Path) -> list:
    """Parse a trajectory CSV back into :class:`Sample` objects."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    n = sum(1 for h in header if h.startswith("p_"))
    out = []
    for row in body:
        vals = row[2:]
        eps, _, min_eig, z1, z2 = (float(v) for v in vals[:5])
        prices = np.array([float(v) for v in vals[5:5 + n]])
        areas = np.array([float(v) for v in vals[5 + n:5 + 2 * n]])
        out.append(Sample(eps, prices, areas, (z1, z2), min_eig, row[1]))
    return out


def write_errors(path: Path, areas: np.ndarray, total: float, label: str = "") -> None:
    rel = relative_area_errors(areas, total)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["atom", "area", "relative_error", "percent"])
        for i, (a, r) in enumerate(zip(areas, rel)):
            w.writerow([i, fmt(a), fmt(r), f"{100 * r:.2f}%"])
        if label:
            w.writerow(["#", label])


def write_correlation(path: Path, samples: list) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["frame", "eps", "ratio", "z1", "z2"])
        for s in samples:
            w.writerow([s.frame, fmt(s.eps), fmt(s.ratio), fmt(s.correlation[0]),
                        fmt(s.correlation[1])])


def write_points(path: Path, eps, z) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["eps", "z1", "z2"])
        for e, (a, b) in zip(eps, z):
            w.writerow([fmt(e), fmt(a), fmt(b)])


def _svg_transform(omega: ConvexPolygon):
    xmin, ymin, xmax, ymax = omega.bounds()
    sx = SVG_SIZE / (xmax - xmin)
    sy = SVG_SIZE / (ymax - ymin)

    def to_svg(p):
        return (p[0] - xmin) * sx, (ymax - p[1]) * sy
    return to_svg, sx, sy


def write_svg(path: Path, cells, atoms: Atoms, omega: ConvexPolygon, title: str = "") -> None:
    """One filled polygon per cell and one dot per atom, in an 800x800 view box.

    The domain's bounding box maps affinely onto the view box (second
    coordinate pointing up); the box is kept as metadata for inversion.
    """
    to_svg, _, _ = _svg_transform(omega)
    xmin, ymin, xmax, ymax = omega.bounds()
    size = f"{SVG_SIZE:g}"
    root = ET.Element("svg", xmlns=SVG_NS, width=size, height=size,
                      viewBox=f"0 0 {size} {size}")
    root.set("data-bbox", " ".join(fmt(v) for v in (xmin, ymin, xmax, ymax)))
    if title:
        ET.SubElement(root, "title").text = title
    n = len(cells)
    g = ET.SubElement(root, "g", id="cells")
    for i, cell in enumerate(cells):
        hue = 360.0 * i / max(n, 1)
        pts = " ".join("{:.10f},{:.10f}".format(*to_svg(v)) for v in cell.vertices)
        ET.SubElement(g, "polygon", points=pts, fill=f"hsl({hue:.0f},60%,75%)",
                      stroke="black", attrib={"stroke-width": "1", "data-atom": str(i)})
    g = ET.SubElement(root, "g", id="atoms")
    for i, y in enumerate(atoms.points):
        cx, cy = to_svg(y)
        ET.SubElement(g, "circle", cx=f"{cx:.10f}", cy=f"{cy:.10f}", r="5", fill="black",
                      attrib={"data-atom": str(i)})
    ET.ElementTree(root).write(path, xml_declaration=True, encoding="utf-8")


def read_svg_polygons(path: Path) -> list:
    """Cell polygons of a snapshot, mapped back to domain coordinates."""
    root = ET.parse(path).getroot()
    xmin, ymin, xmax, ymax = (float(v) for v in root.get("data-bbox").split())
    sx = SVG_SIZE / (xmax - xmin)
    sy = SVG_SIZE / (ymax - ymin)
    out = []
    for el in root.iter(f"{{{SVG_NS}}}polygon"):
        text = el.get("points").split()
        pts = [tuple(float(c) for c in t.split(",")) for t in text] if text else []
        out.append(np.array([(u / sx + xmin, ymax - v / sy) for u, v in pts]).reshape(-1, 2))
    return out


def snapshot_name(s: Sample) -> str:
    if s.frame == STANDARD:
        return f"eps_{s.eps:.6f}.svg"
    return f"eps_{s.eps:.6f}_{s.frame}.svg"


def write_status(path: Path, **fields) -> None:
    def clean(v):
        if isinstance(v, float) and not math.isfinite(v):
            return str(v)
        if isinstance(v, np.generic):
            return v.item()
        return v
    path.write_text(json.dumps({k: clean(v) for k, v in fields.items()}, indent=2) + "\n")
