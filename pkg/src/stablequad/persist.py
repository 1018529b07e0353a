"""Deterministic text serialization: trees (SQT v1), maps (SQM v1),
experiment CSVs, run manifests and mesh exports.

All formats are plain text with fixed rendering (17 significant digits for
reals), so identical inputs produce byte-identical files on every
platform.  Readers re-validate: a map file that fails the structural
checks is rejected.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import warnings
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import scaling
from .cvs import QuadMap, validate_quadrangulation
from .errors import AdmissibilityError, CodingError, ParameterError, ParseError
from .gwtree import LabelledTree, PlaneTree, tree_from_offspring

_REAL_FMT = "%.17g"


def _fmt_real(x: float) -> str:
    return _REAL_FMT % float(x)


# ---------------------------------------------------------------------------
# SQT v1: labelled trees
# ---------------------------------------------------------------------------


def write_tree(path, tree: PlaneTree | LabelledTree, alpha: float = 0.0, seed: int = 0) -> None:
    """SQT v1: header, offspring counts, optional label line."""
    labels = None
    if isinstance(tree, LabelledTree):
        labels = tree.labels
        tree = tree.tree
    lines = [f"SQT1 {tree.n_edges} {_fmt_real(alpha)} {seed}"]
    lines.append(" ".join(str(int(c)) for c in tree.offspring_counts()))
    if labels is not None:
        lines.append(" ".join(str(int(x)) for x in labels))
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def read_tree(path):
    """Parse SQT v1; returns (PlaneTree | LabelledTree, alpha, seed)."""
    raw = Path(path).read_text(encoding="ascii").splitlines()
    if not raw:
        raise ParseError("empty file", line=1)
    head = raw[0].split()
    if len(head) != 4 or head[0] != "SQT1":
        raise ParseError("expected header 'SQT1 <n> <alpha> <seed>'", line=1)
    try:
        n = int(head[1])
        alpha = float(head[2])
        seed = int(head[3])
    except ValueError as exc:
        raise ParseError(f"bad header field: {exc}", line=1) from None
    if len(raw) < 2:
        raise ParseError("missing offspring line", line=2)
    try:
        offspring = np.array([int(tok) for tok in raw[1].split()], dtype=np.int64)
    except ValueError as exc:
        raise ParseError(f"bad offspring count: {exc}", line=2) from None
    if len(offspring) != n + 1:
        raise ParseError(f"expected {n + 1} offspring counts, found {len(offspring)}", line=2)
    if int(offspring.sum()) != n:
        raise ParseError(f"offspring counts sum to {offspring.sum()}, expected {n}", line=2)
    try:
        tree = tree_from_offspring(offspring)
    except CodingError as exc:
        raise ParseError(str(exc), line=2) from None
    if len(raw) > 2 and raw[2].strip():
        try:
            labels = np.array([int(tok) for tok in raw[2].split()], dtype=np.int64)
        except ValueError as exc:
            raise ParseError(f"bad label: {exc}", line=3) from None
        if len(labels) != n + 1:
            raise ParseError(f"expected {n + 1} labels, found {len(labels)}", line=3)
        if labels[0] != 0:
            raise ParseError("root label must be 0", line=3)
        if np.abs(labels[1:] - labels[tree.parent[1:]]).max(initial=0) > 1:
            raise ParseError("labels violate unit-increment admissibility", line=3)
        return LabelledTree(tree=tree, labels=labels), alpha, seed
    return tree, alpha, seed


# ---------------------------------------------------------------------------
# SQM v1: quadrangulations
# ---------------------------------------------------------------------------


def write_map(path, q: QuadMap) -> None:
    """SQM v1: header, one 'h twin next origin' line per half-edge,
    optional vertex-label line."""
    lines = [
        f"SQM1 {q.n_vertices} {q.n_edges} {q.n_faces} {q.root_half_edge} {q.pointed_vertex}"
    ]
    for h in range(q.n_half_edges):
        lines.append(
            f"{h} {int(q.twin[h])} {int(q.next_in_rotation[h])} {int(q.origin[h])}"
        )
    if q.vertex_labels is not None:
        lines.append(" ".join(str(int(x)) for x in q.vertex_labels))
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def read_map(path) -> QuadMap:
    """Parse SQM v1 and re-run the structural validator."""
    raw = Path(path).read_text(encoding="ascii").splitlines()
    if not raw:
        raise ParseError("empty file", line=1)
    head = raw[0].split()
    if len(head) != 6 or head[0] != "SQM1":
        raise ParseError("expected header 'SQM1 <V> <E> <F> <root_half_edge> <pointed_vertex>'", line=1)
    try:
        n_v, n_e, n_f, root_he, pointed = (int(tok) for tok in head[1:])
    except ValueError as exc:
        raise ParseError(f"bad header field: {exc}", line=1) from None
    if n_v != n_f + 2 or n_e != 2 * n_f:
        raise ParseError(f"inconsistent counts V={n_v} E={n_e} F={n_f}", line=1)
    m = 4 * n_f
    if len(raw) < 1 + m:
        raise ParseError(f"expected {m} half-edge lines, found {len(raw) - 1}", line=len(raw))
    twin = np.empty(m, dtype=np.int64)
    nxt = np.empty(m, dtype=np.int64)
    origin = np.empty(m, dtype=np.int64)
    for h in range(m):
        parts = raw[1 + h].split()
        if len(parts) != 4:
            raise ParseError("expected 'h twin next origin'", line=2 + h)
        try:
            hh, tw, nx, orig = (int(tok) for tok in parts)
        except ValueError as exc:
            raise ParseError(f"bad half-edge field: {exc}", line=2 + h) from None
        if hh != h:
            raise ParseError(f"half-edge ids must be consecutive, got {hh}", line=2 + h)
        twin[h] = tw
        nxt[h] = nx
        origin[h] = orig
    labels = None
    if len(raw) > 1 + m and raw[1 + m].strip():
        try:
            labels = np.array([int(tok) for tok in raw[1 + m].split()], dtype=np.int64)
        except ValueError as exc:
            raise ParseError(f"bad label: {exc}", line=2 + m) from None
        if len(labels) != n_v:
            raise ParseError(f"expected {n_v} labels, found {len(labels)}", line=2 + m)
    q = QuadMap(
        n_faces=n_f,
        twin=twin,
        next_in_rotation=nxt,
        origin=origin,
        root_half_edge=root_he,
        pointed_vertex=pointed,
        vertex_labels=labels,
    )
    report = validate_quadrangulation(q)
    if not report.ok:
        raise ParseError(
            f"map fails validation: {', '.join(report.failing())}", line=1
        )
    return q


# ---------------------------------------------------------------------------
# mesh export
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MeshResult:
    path: str
    n_vertices: int
    n_faces: int
    converged: bool


def _face_vertex_lists(q: QuadMap) -> list[list[int]]:
    return [[int(q.origin[h]) for h in cycle] for cycle in q.face_cycles()]


def _tutte_layout(q: QuadMap) -> tuple[np.ndarray, bool]:
    """Harmonic embedding with the root face pinned to a square."""
    from scipy.sparse import coo_matrix
    from scipy.sparse.linalg import spsolve

    faces = _face_vertex_lists(q)
    root_face = None
    for cycle, verts in zip(q.face_cycles(), faces):
        if q.root_half_edge in cycle or int(q.twin[q.root_half_edge]) in cycle:
            root_face = verts
            break
    outer = list(dict.fromkeys(root_face))  # distinct, in face order
    corners = np.array(
        [[math.cos(a), math.sin(a)] for a in np.linspace(0.25 * math.pi, 2.25 * math.pi, len(outer), endpoint=False)]
    )
    n_v = q.n_vertices
    pos = np.zeros((n_v, 2))
    fixed = np.zeros(n_v, dtype=bool)
    for v, xy in zip(outer, corners):
        pos[v] = xy
        fixed[v] = True
    free = np.nonzero(~fixed)[0]
    if len(free) == 0:
        return np.column_stack([pos, np.zeros(n_v)]), True
    index_of = -np.ones(n_v, dtype=np.int64)
    index_of[free] = np.arange(len(free))
    src = q.origin
    dst = q.origin[q.twin]
    deg = np.bincount(src, minlength=n_v).astype(np.float64)
    mask = ~fixed[src]
    rows_all = index_of[src[mask]]
    free_nb = ~fixed[dst[mask]]
    rows = np.concatenate([rows_all[free_nb], np.arange(len(free))])
    cols = np.concatenate([index_of[dst[mask][free_nb]], np.arange(len(free))])
    vals = np.concatenate([np.full(int(free_nb.sum()), -1.0), deg[free]])
    lap = coo_matrix((vals, (rows, cols)), shape=(len(free), len(free))).tocsr()
    rhs = np.zeros((len(free), 2))
    fixed_nb = ~free_nb
    np.add.at(rhs, rows_all[fixed_nb], pos[dst[mask][fixed_nb]])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        sol = spsolve(lap, rhs)
    sol = np.atleast_2d(sol)
    pos[free] = sol
    converged = bool(np.isfinite(pos).all())
    return np.column_stack([pos, np.zeros(n_v)]), converged


def _spring_layout(q: QuadMap, seed: int, iterations: int = 200) -> tuple[np.ndarray, bool]:
    """Small force-directed 3-d layout; visualization convenience only."""
    rng = np.random.Generator(np.random.PCG64(seed))
    n_v = q.n_vertices
    pos = rng.standard_normal((n_v, 3))
    src = q.origin
    dst = q.origin[q.twin]
    step = 0.1
    for _ in range(iterations):
        disp = np.zeros((n_v, 3))
        delta = pos[dst] - pos[src]
        np.add.at(disp, src, 0.5 * delta)
        # sampled repulsion keeps the cost linear in the map size
        others = rng.integers(0, n_v, size=n_v)
        away = pos - pos[others]
        norm2 = (away**2).sum(axis=1, keepdims=True) + 1e-9
        disp += away / norm2
        pos += step * disp
        step *= 0.985
    converged = bool(np.isfinite(pos).all())
    if converged:
        pos -= pos.mean(axis=0)
        scale = np.abs(pos).max()
        if scale > 0:
            pos /= scale
    return pos, converged


def export_mesh(q: QuadMap, path, layout: str = "tutte", seed: int = 0) -> MeshResult:
    """OBJ-style mesh: V vertex lines and one quad face line per face."""
    if layout == "tutte":
        coords, converged = _tutte_layout(q)
    elif layout == "spring":
        coords, converged = _spring_layout(q, seed)
    else:
        raise ParameterError(f"unknown layout {layout!r}")
    if not converged:
        warnings.warn("layout did not converge; writing best-effort coordinates")
        coords = np.nan_to_num(coords)
    lines = [f"# stablequad mesh: V={q.n_vertices} F={q.n_faces} layout={layout}"]
    for xyz in coords:
        lines.append("v " + " ".join(_fmt_real(c) for c in xyz))
    for verts in _face_vertex_lists(q):
        lines.append("f " + " ".join(str(v + 1) for v in verts))
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")
    return MeshResult(
        path=str(path), n_vertices=q.n_vertices, n_faces=q.n_faces, converged=converged
    )


# ---------------------------------------------------------------------------
# experiment CSVs
# ---------------------------------------------------------------------------


def _open_csv(path):
    return open(path, "w", newline="", encoding="ascii")


def write_radius_csv(result: scaling.RadiusResult, path) -> None:
    with _open_csv(path) as fh:
        w = csv.writer(fh)
        w.writerow(["n", "replica", "seed", "trials", "distance"])
        for rec in result.records:
            w.writerow([rec.n, rec.replica, rec.seed, rec.trials, rec.distance])


def write_maxdeg_csv(result: scaling.MaxDegreeResult, path) -> None:
    with _open_csv(path) as fh:
        w = csv.writer(fh)
        w.writerow(["n", "replica", "seed", "max_offspring", "max_map_degree"])
        for rec in result.records:
            w.writerow([rec.n, rec.replica, rec.seed, rec.max_offspring, rec.max_map_degree])


def write_profile_csv(result: scaling.VolumeResult, path) -> None:
    """Rows (map_id, center_kind, r, count) for every profiled center."""
    with _open_csv(path) as fh:
        w = csv.writer(fh)
        w.writerow(["map_id", "center_kind", "r", "count"])
        per = int(np.ceil(result.config.centers / result.config.replicas_single()))
        for idx, profile in enumerate(result.center_profiles):
            map_id = idx // per
            for r, count in enumerate(profile):
                w.writerow([map_id, result.config.center_policy, r, int(count)])
        for r, count in enumerate(result.pointed_profile):
            w.writerow(["mean", "pointed", r, _fmt_real(count)])
        for r, count in enumerate(result.mean_profile):
            w.writerow(["mean", result.config.center_policy, r, _fmt_real(count)])


def write_voltail_csv(result: scaling.VolTailResult, path) -> None:
    with _open_csv(path) as fh:
        w = csv.writer(fh)
        w.writerow(["value", "survival"])
        for value, survival in result.survival_points:
            w.writerow([_fmt_real(value), _fmt_real(survival)])


def write_paths_csv(result: scaling.PathsResult, path) -> None:
    with _open_csv(path) as fh:
        w = csv.writer(fh)
        w.writerow(["replica", "t", "x_rescaled", "height_rescaled", "label_rescaled"])
        for rep, table in enumerate(result.tables):
            for row in table:
                w.writerow([rep] + [_fmt_real(x) for x in row])


# ---------------------------------------------------------------------------
# manifests
# ---------------------------------------------------------------------------


def file_digest(path) -> str:
    h = hashlib.sha256()
    h.update(Path(path).read_bytes())
    return h.hexdigest()


def write_manifest(path, *, kind: str, config: dict, constants: dict,
                   master_seed: int, replica_seeds, outputs, extra: dict | None = None) -> None:
    """One manifest per run; digests cover data files, never timestamps."""
    payload = {
        "tool": "stablequad",
        "version": _tool_version(),
        "kind": kind,
        "config": config,
        "constants": constants,
        "master_seed": master_seed,
        "replica_seeds": list(replica_seeds),
        "created_utc": datetime.now(timezone.utc).isoformat(),
        "outputs": [{"path": str(p), "sha256": file_digest(p)} for p in outputs],
    }
    if extra:
        payload.update(extra)
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="ascii")


def _tool_version() -> str:
    from . import __version__

    return __version__
