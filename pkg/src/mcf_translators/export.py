"""File formats: CSV series, JSON manifests, binary grids and OBJ meshes.

Every file carries a :class:`RunManifest`.  CSV files start with a
``# manifest <json>`` comment line, binary grids with a JSON header line and
OBJ files with ``# manifest <json>``.  Numbers are written with 17
significant digits so that a reread is lossless.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from importlib import metadata
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError
from .graphical import BoxDomain, GridSolution
from .hyperbolic import hyperboloid_to_half_space
from .profile import ProfileCurve

SCHEMA_VERSION = 1
_FMT = "%.17g"


def tool_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:  # pragma: no cover
        from . import __version__

        return __version__


@dataclass
class RunManifest:
    subcommand: str
    parameters: dict
    tool_version: str = field(default_factory=tool_version)
    tolerances: dict = field(default_factory=dict)
    outputs: list = field(default_factory=list)
    schema_version: int = SCHEMA_VERSION

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "RunManifest":
        data = json.loads(text)
        if data.get("schema_version") != SCHEMA_VERSION:
            raise DomainError(f"unsupported manifest schema {data.get('schema_version')!r}")
        return cls(**data)


def write_json(path, payload) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _write_table(path, manifest: RunManifest, header: Sequence[str], table: np.ndarray) -> None:
    buf = io.StringIO()
    buf.write("# manifest " + manifest.to_json() + "\n")
    buf.write(",".join(header) + "\n")
    np.savetxt(buf, table, fmt=_FMT, delimiter=",")
    Path(path).write_text(buf.getvalue())


def _read_table(path):
    lines = Path(path).read_text().splitlines()
    manifest = None
    body = []
    for line in lines:
        if line.startswith("# manifest "):
            manifest = RunManifest.from_json(line[len("# manifest "):])
        elif line.startswith("#") or not line.strip():
            continue
        else:
            body.append(line)
    if not body:
        raise DomainError(f"{path}: no header row")
    header = [h.strip() for h in body[0].split(",")]
    rows = []
    for lineno, row in enumerate(csv.reader(body[1:]), start=2):
        if len(row) != len(header):
            raise DomainError(f"{path}: row {lineno} has {len(row)} fields, expected {len(header)}")
        try:
            rows.append([float(v) for v in row])
        except ValueError as exc:
            raise DomainError(f"{path}: row {lineno}: {exc}") from None
    table = np.array(rows, dtype=float).reshape(-1, len(header))
    return manifest, header, table


def write_profile_csv(path, curve: ProfileCurve, manifest: RunManifest) -> None:
    _write_table(path, manifest, ["s", "w", "f"], curve.columns())


def write_series_csv(path, s, w, f, manifest: RunManifest) -> None:
    _write_table(path, manifest, ["s", "w", "f"], np.column_stack([s, w, f]))


def read_profile_csv(path):
    """``(manifest, table)`` with columns ``s, w, f``."""
    manifest, header, table = _read_table(path)
    if header != ["s", "w", "f"]:
        raise DomainError(f"{path}: expected columns s,w,f, got {header}")
    return manifest, table


def _grid_table(sol: GridSolution) -> np.ndarray:
    dom = sol.domain
    pts = dom.points().reshape(-1, dom.k)
    full = np.zeros((pts.shape[0], dom.n))
    full[:, : dom.k] = pts
    return np.column_stack([full, sol.values.ravel()])


def grid_header(n: int) -> list:
    return [f"x{i + 1}" for i in range(n)] + ["u"]


def write_grid_csv(path, sol: GridSolution, manifest: RunManifest) -> None:
    """Columns ``x1, ..., xn, u`` in C order; coordinates not on the grid are written as 0."""
    _write_table(path, manifest, grid_header(sol.domain.n), _grid_table(sol))


def domain_from_table(header, table, n: Optional[int] = None) -> tuple:
    """Recover a :class:`BoxDomain` and the values from a grid CSV table."""
    if len(header) < 2 or header[-1] != "u" or any(h != f"x{i + 1}" for i, h in enumerate(header[:-1])):
        raise DomainError(f"grid columns must be x1,...,xn,u; got {header}")
    if n is not None and n != len(header) - 1:
        raise DomainError(f"n = {n} does not match the {len(header) - 1} coordinate columns")
    n = len(header) - 1
    coords = table[:, :-1]
    axes = [np.unique(coords[:, d]) for d in range(coords.shape[1])]
    gridded = [d for d, a in enumerate(axes) if a.size > 1]
    if gridded != list(range(len(gridded))) or not gridded:
        raise DomainError("gridded coordinates must be the leading columns")
    shape = tuple(axes[d].size for d in gridded)
    if int(np.prod(shape)) != table.shape[0]:
        raise DomainError("table is not a full tensor grid")
    bounds = [(axes[d][0], axes[d][-1]) for d in gridded]
    dom = BoxDomain(bounds, shape, n)
    expected = dom.points().reshape(-1, dom.k)
    if not np.allclose(expected, coords[:, : dom.k], rtol=1e-12, atol=1e-12):
        raise DomainError("nodes are not a uniform grid in C order")
    return dom, table[:, -1].reshape(shape)


def read_grid_csv(path):
    manifest, header, table = _read_table(path)
    n = None
    if manifest is not None:
        n = manifest.parameters.get("n")
    dom, values = domain_from_table(header, table, n)
    return manifest, dom, values


def write_grid_binary(path, sol: GridSolution, manifest: RunManifest) -> None:
    """One JSON header line, then the values as little-endian float64 in C order."""
    dom = sol.domain
    header = {
        "manifest": json.loads(manifest.to_json()),
        "bounds": [list(b) for b in dom.bounds],
        "shape": list(dom.shape),
        "n": dom.n,
        "dtype": "<f8",
    }
    with open(path, "wb") as fh:
        fh.write((json.dumps(header, sort_keys=True) + "\n").encode())
        fh.write(np.ascontiguousarray(sol.values, dtype="<f8").tobytes())


def read_grid_binary(path):
    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode())
        payload = fh.read()
    dom = BoxDomain(header["bounds"], header["shape"], header["n"])
    values = np.frombuffer(payload, dtype=header["dtype"]).reshape(dom.shape).copy()
    manifest = RunManifest(**header["manifest"])
    return manifest, dom, values


# ---------------------------------------------------------------- meshes


def revolve_polyline(s, f, n: int, angular: int = 64, model: str = "half-space"):
    """Surface of revolution of the polyline ``(s_i, f_i)`` about a point of H^2.

    Each sample becomes a ring of ``angular`` vertices at hyperbolic distance
    ``s_i`` from the centre and height ``f_i``.  For ``n = 3`` this is the
    slice of the hypersurface by a totally geodesic ``H^2 x R`` through the
    axis.  ``model`` chooses the planar coordinates: ``"hyperboloid"`` uses
    ``(sinh s cos a, sinh s sin a)``, ``"half-space"`` maps the same point to
    the half-space with the centre at ``(1, 0)``.

    Returns ``(vertices, faces)`` with 0-based counterclockwise triangles.
    """
    if n not in (2, 3):
        raise DomainError(f"mesh embedding supports n = 2 or 3, got n = {n}")
    if model not in ("half-space", "hyperboloid"):
        raise DomainError(f"unknown model {model!r}")
    if angular < 3:
        raise DomainError("angular resolution must be at least 3")
    s = np.asarray(s, dtype=float)
    f = np.asarray(f, dtype=float)
    a = 2.0 * math.pi * np.arange(angular) / angular
    S, A = np.meshgrid(s, a, indexing="ij")
    hyp = np.stack([np.sinh(S) * np.cos(A), np.sinh(S) * np.sin(A), np.cosh(S)], axis=-1)
    plane = hyp[..., :2] if model == "hyperboloid" else hyperboloid_to_half_space(hyp)
    F = np.broadcast_to(f[:, None], S.shape)
    verts = np.concatenate([plane, F[..., None]], axis=-1).reshape(-1, 3)
    faces = []
    for i in range(len(s) - 1):
        for j in range(angular):
            a0 = i * angular + j
            a1 = i * angular + (j + 1) % angular
            b0 = a0 + angular
            b1 = a1 + angular
            faces.append((a0, b1, a1))
            faces.append((a0, b0, b1))
    return verts, np.array(faces, dtype=int).reshape(-1, 3)


def height_field(sol: GridSolution):
    """Triangulated graph of a 2-axis grid solution over its half-space box."""
    dom = sol.domain
    if dom.k != 2:
        raise DomainError("height-field meshes need a grid with two axes")
    X1, X2 = dom.coords()
    verts = np.column_stack([X1.ravel(), X2.ravel(), sol.values.ravel()])
    n0, n1 = dom.shape
    faces = []
    for i in range(n0 - 1):
        for j in range(n1 - 1):
            a = i * n1 + j
            b = a + n1
            faces.append((a, b, b + 1))
            faces.append((a, b + 1, a + 1))
    return verts, np.array(faces, dtype=int)


def write_obj(path, vertices, faces, manifest: RunManifest) -> None:
    buf = io.StringIO()
    buf.write("# manifest " + manifest.to_json() + "\n")
    np.savetxt(buf, vertices, fmt="v " + " ".join([_FMT] * 3))
    np.savetxt(buf, np.asarray(faces) + 1, fmt="f %d %d %d")
    Path(path).write_text(buf.getvalue())


def read_obj(path):
    verts, faces = [], []
    for line in Path(path).read_text().splitlines():
        if line.startswith("v "):
            verts.append([float(t) for t in line.split()[1:4]])
        elif line.startswith("f "):
            faces.append([int(t) - 1 for t in line.split()[1:4]])
    return np.array(verts), np.array(faces, dtype=int)
