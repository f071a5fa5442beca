"""Point-cloud container, nearest-neighbor queries, and file I/O.

Supported formats (all coordinates in meters):

* ASCII PLY — ``x y z`` vertex properties; extra properties such as
  normals are ignored on read.
* CSV — header row exactly ``x,y,z``.
* Organized JSON — ``{"version": "binomap-grid/1", "height": H,
  "width": W, "points": [[x,y,z] * H*W row-major], "valid": [bool * H*W]}``
  for grid-indexed clouds that allow pixel -> 3D lookup.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DegenerateInput, InputFormatError

GRID_VERSION = "binomap-grid/1"


@dataclass
class PointCloud:
    """Unordered or organized set of 3D points.

    Organized clouds carry ``height``/``width`` and a row-major validity
    mask; ``points`` then has exactly ``height * width`` rows and pixel
    (u, v) maps to row ``v * width + u``.
    """

    points: np.ndarray
    height: int | None = None
    width: int | None = None
    valid: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float).reshape(-1, 3)
        organized = self.height is not None or self.width is not None or self.valid is not None
        if organized:
            if self.height is None or self.width is None or self.valid is None:
                raise DegenerateInput("organized cloud needs height, width, and a validity mask")
            self.height = int(self.height)
            self.width = int(self.width)
            self.valid = np.asarray(self.valid, dtype=bool).reshape(-1)
            if self.points.shape[0] != self.height * self.width:
                raise DegenerateInput(
                    f"organized cloud has {self.points.shape[0]} points, "
                    f"expected height*width = {self.height * self.width}")
            if self.valid.shape[0] != self.points.shape[0]:
                raise DegenerateInput("validity mask length does not match the grid")

    @property
    def organized(self) -> bool:
        return self.height is not None

    def __len__(self) -> int:
        return self.points.shape[0]

    def valid_points(self) -> np.ndarray:
        """(M, 3) array of usable points (all points when unorganized)."""
        if self.valid is None:
            return self.points
        return self.points[self.valid]

    def point_at(self, u: int, v: int) -> np.ndarray:
        """Stored point at pixel (u, v) of an organized cloud."""
        if not self.organized:
            raise DegenerateInput("pixel lookup requires an organized cloud")
        return self.points[v * self.width + u]

    def centroid(self) -> np.ndarray:
        pts = self.valid_points()
        if pts.shape[0] == 0:
            raise DegenerateInput("cannot take the centroid of an empty cloud")
        return pts.mean(axis=0)


def min_distance(p, cloud) -> tuple[float, np.ndarray]:
    """Exact nearest neighbor by brute-force scan.

    Returns (distance, nearest point). Ties resolve to the lowest index
    in the cloud's storage order. ``cloud`` may be a PointCloud or a raw
    (N, 3) array.
    """
    pts = cloud.valid_points() if isinstance(cloud, PointCloud) else np.asarray(cloud, dtype=float).reshape(-1, 3)
    if pts.shape[0] == 0:
        raise DegenerateInput("nearest-neighbor query on an empty cloud")
    q = np.asarray(p, dtype=float).reshape(3)
    d2 = np.einsum("ij,ij->i", pts - q, pts - q)
    i = int(np.argmin(d2))  # argmin takes the first minimum: lowest index
    return float(np.sqrt(d2[i])), pts[i].copy()


# ---------------------------------------------------------------------------
# File I/O


def save_point_cloud(cloud: PointCloud, path) -> None:
    path = Path(path)
    suffix = path.suffix.lower()
    if cloud.organized or suffix == ".json":
        if not cloud.organized:
            raise InputFormatError("JSON cloud files are reserved for organized grids")
        _save_organized(cloud, path)
    elif suffix == ".ply":
        _save_ply(cloud.points, path)
    elif suffix == ".csv":
        _save_csv(cloud.points, path)
    else:
        raise InputFormatError(f"unsupported cloud extension: {path.suffix!r}")


def load_point_cloud(path) -> PointCloud:
    path = Path(path)
    if not path.exists():
        raise InputFormatError(f"cloud file not found: {path}")
    suffix = path.suffix.lower()
    if suffix == ".ply":
        return PointCloud(_load_ply(path))
    if suffix == ".csv":
        return PointCloud(_load_csv(path))
    if suffix == ".json":
        return _load_organized(path)
    raise InputFormatError(f"unsupported cloud extension: {path.suffix!r}")


def _save_ply(points: np.ndarray, path: Path) -> None:
    lines = [
        "ply",
        "format ascii 1.0",
        "comment units meters",
        f"element vertex {points.shape[0]}",
        "property float x",
        "property float y",
        "property float z",
        "end_header",
    ]
    lines.extend(" ".join(repr(float(c)) for c in row) for row in points)
    path.write_text("\n".join(lines) + "\n")


def _load_ply(path: Path) -> np.ndarray:
    lines = path.read_text().splitlines()
    if not lines or lines[0].strip() != "ply":
        raise InputFormatError(f"{path}: missing 'ply' magic line")
    count = None
    props: list[str] = []
    in_vertex = False
    body_start = None
    for i, raw in enumerate(lines[1:], start=1):
        tok = raw.strip().split()
        if not tok:
            continue
        if tok[0] == "format":
            if tok[1] != "ascii":
                raise InputFormatError(f"{path}: only ASCII PLY is supported")
        elif tok[0] == "element":
            in_vertex = tok[1] == "vertex"
            if in_vertex:
                count = int(tok[2])
        elif tok[0] == "property" and in_vertex:
            props.append(tok[-1])
        elif tok[0] == "end_header":
            body_start = i + 1
            break
    if count is None or body_start is None:
        raise InputFormatError(f"{path}: malformed PLY header")
    try:
        cols = [props.index(axis) for axis in ("x", "y", "z")]
    except ValueError:
        raise InputFormatError(f"{path}: vertex element lacks x/y/z properties") from None
    rows = []
    for raw in lines[body_start:body_start + count]:
        values = raw.split()
        if len(values) < len(props):
            raise InputFormatError(f"{path}: vertex row has too few columns: {raw!r}")
        rows.append([float(values[c]) for c in cols])
    if len(rows) != count:
        raise InputFormatError(f"{path}: expected {count} vertices, found {len(rows)}")
    return np.asarray(rows, dtype=float).reshape(-1, 3)


def _save_csv(points: np.ndarray, path: Path) -> None:
    lines = ["x,y,z"]
    lines.extend(",".join(repr(float(c)) for c in row) for row in points)
    path.write_text("\n".join(lines) + "\n")


def _load_csv(path: Path) -> np.ndarray:
    lines = [ln for ln in path.read_text().splitlines() if ln.strip()]
    if not lines or [c.strip() for c in lines[0].split(",")] != ["x", "y", "z"]:
        raise InputFormatError(f"{path}: CSV cloud requires the header 'x,y,z'")
    rows = []
    for ln in lines[1:]:
        cells = ln.split(",")
        if len(cells) != 3:
            raise InputFormatError(f"{path}: expected 3 columns, got {ln!r}")
        rows.append([float(c) for c in cells])
    return np.asarray(rows, dtype=float).reshape(-1, 3)


def _save_organized(cloud: PointCloud, path: Path) -> None:
    doc = {
        "version": GRID_VERSION,
        "units": "meters",
        "height": cloud.height,
        "width": cloud.width,
        "points": [[float(c) for c in row] for row in cloud.points],
        "valid": [bool(v) for v in cloud.valid],
    }
    with open(path, "w") as fp:
        json.dump(doc, fp, sort_keys=True)
        fp.write("\n")


def _load_organized(path: Path) -> PointCloud:
    try:
        with open(path) as fp:
            doc = json.load(fp)
    except json.JSONDecodeError as e:
        raise InputFormatError(f"{path}: not valid JSON ({e})") from e
    if not isinstance(doc, dict) or doc.get("version") != GRID_VERSION:
        raise InputFormatError(f"{path}: expected version {GRID_VERSION!r}")
    try:
        return PointCloud(
            points=np.asarray(doc["points"], dtype=float),
            height=doc["height"],
            width=doc["width"],
            valid=np.asarray(doc["valid"], dtype=bool),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise InputFormatError(f"{path}: malformed organized cloud ({e})") from e
