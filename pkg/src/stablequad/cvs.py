"""Arc construction turning labelled plane trees into pointed rooted
quadrangulations, stored as half-edge rotation systems.

One arc is drawn per corner of the contour exploration, from the corner to
its successor (the first later corner, cyclically, whose label is one
less); corners at the minimal label send their arc to the extra pointed
vertex.  The resulting graph on the tree vertices plus the pointed vertex
is a quadrangulation with one face per tree edge.

The planar embedding is fixed by a frozen rotation convention, certified
by the exhaustive face-degree oracle over every labelled tree with up to 4
edges (see ``enumerate_small``):

* at each corner the incident arc ends are, in rotation order, the
  incoming arcs from sources ordered nearest-behind first (cyclically
  decreasing source), then the single outgoing arc;
* the corners of a tree vertex follow each other in increasing contour
  order;
* around the pointed vertex the arcs arrive in decreasing corner order.

The mirrored convention is the only other consistent one; it produces the
reflected embedding and is not exposed.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .backend import kernels
from .errors import AdmissibilityError, ConstructionError, InvariantViolation, ParameterError
from .gwtree import CornerSequence, LabelledTree, contour_exploration, tree_from_offspring

INF_SUCCESSOR = -1  # successor value for corners at the minimal label


@dataclass(frozen=True)
class SuccessorTable:
    """Successor corner per corner; INF_SUCCESSOR marks arcs to the pointed vertex."""

    s: np.ndarray

    def __len__(self) -> int:
        return len(self.s)


@dataclass
class QuadMap:
    """Pointed rooted quadrangulation as a half-edge structure.

    Half-edge ``h`` has its twin at ``twin[h]``, the next half-edge
    counterclockwise around its origin at ``next_in_rotation[h]``, and its
    source vertex at ``origin[h]``.  Faces are the orbits of
    ``next_in_rotation[twin[h]]``.  Treated as immutable after construction.
    """

    n_faces: int
    twin: np.ndarray
    next_in_rotation: np.ndarray
    origin: np.ndarray
    root_half_edge: int
    pointed_vertex: int
    vertex_labels: np.ndarray | None = None
    _adj: tuple[np.ndarray, np.ndarray] | None = field(default=None, repr=False, compare=False)

    @property
    def n_vertices(self) -> int:
        return self.n_faces + 2

    @property
    def n_edges(self) -> int:
        return 2 * self.n_faces

    @property
    def n_half_edges(self) -> int:
        return 4 * self.n_faces

    def degrees(self) -> np.ndarray:
        return np.bincount(self.origin, minlength=self.n_vertices)

    def adjacency(self) -> tuple[np.ndarray, np.ndarray]:
        """CSR adjacency (indptr, indices); parallel edges kept."""
        if self._adj is None:
            src = self.origin
            dst = self.origin[self.twin]
            order = np.argsort(src, kind="stable")
            indptr = np.zeros(self.n_vertices + 1, dtype=np.int64)
            np.cumsum(np.bincount(src, minlength=self.n_vertices), out=indptr[1:])
            self._adj = (indptr, dst[order].astype(np.int64))
        return self._adj

    def face_cycles(self) -> list[np.ndarray]:
        """Half-edge cycles of all faces, each starting at its smallest id."""
        nxt = self.next_in_rotation[self.twin]
        seen = np.zeros(self.n_half_edges, dtype=bool)
        faces = []
        for h0 in range(self.n_half_edges):
            if seen[h0]:
                continue
            cycle = [h0]
            seen[h0] = True
            h = int(nxt[h0])
            while h != h0:
                seen[h] = True
                cycle.append(h)
                h = int(nxt[h])
            faces.append(np.array(cycle, dtype=np.int64))
        return faces


def successor_table(corners: CornerSequence) -> SuccessorTable:
    """Successor of every corner over the periodically extended contour."""
    if corners.labels is None:
        raise AdmissibilityError("corner sequence carries no labels")
    labels = np.asarray(corners.labels, dtype=np.int64)
    if len(labels) >= 2:
        steps = np.abs(np.diff(np.concatenate([labels, labels[:1]])))
        if steps.max() > 1:
            raise AdmissibilityError("corner labels must change by at most 1 along the contour")
    return SuccessorTable(s=kernels.successor_table(labels))


def _perm_cycle_count(perm: np.ndarray) -> int:
    """Number of cycles, via pointer doubling of the orbit minimum."""
    x = np.arange(len(perm), dtype=np.int64)
    y = perm.astype(np.int64, copy=True)
    for _ in range(int(np.ceil(np.log2(max(len(perm), 2)))) + 1):
        x = np.minimum(x, x[y])
        y = y[y]
    return int((x == np.arange(len(perm))).sum())


def _assemble_rotation(cv: np.ndarray, succ: np.ndarray, n: int):
    """Frozen rotation assembly; returns (twin, next_in_rotation, origin)."""
    two_n = 2 * n
    vstar = n + 1
    half_ids = np.arange(4 * n, dtype=np.int64)

    finite = succ >= 0
    origin = np.empty(4 * n, dtype=np.int64)
    origin[0::2] = cv
    origin[1::2] = np.where(finite, cv[np.where(finite, succ, 0)], vstar)
    twin = np.empty(4 * n, dtype=np.int64)
    twin[0::2] = half_ids[1::2]
    twin[1::2] = half_ids[0::2]

    # Incoming arcs per corner, nearest-behind source first.
    sources = np.nonzero(finite)[0]
    targets = succ[sources]
    key = (targets - sources) % two_n
    order = np.lexsort((key, targets))
    sorted_sources = sources[order]
    sorted_targets = targets[order]
    counts = np.bincount(targets, minlength=two_n)

    # Per-corner segments: incoming halves then the outgoing half.
    seg_len = counts + 1
    seg_start = np.zeros(two_n + 1, dtype=np.int64)
    np.cumsum(seg_len, out=seg_start[1:])
    stream = np.empty(seg_start[-1], dtype=np.int64)
    first_in_group = np.searchsorted(sorted_targets, np.arange(two_n))
    rank = np.arange(len(sorted_sources), dtype=np.int64) - first_in_group[sorted_targets]
    stream[seg_start[sorted_targets] + rank] = 2 * sorted_sources + 1
    stream[seg_start[:-1] + counts] = 2 * np.arange(two_n, dtype=np.int64)

    # Vertex blocks: the vertex's corner segments in increasing contour order.
    corner_order = np.lexsort((np.arange(two_n), cv))
    lens = seg_len[corner_order]
    starts = seg_start[:-1][corner_order]
    total = int(lens.sum())
    excl = np.cumsum(lens) - lens
    gather = np.arange(total, dtype=np.int64) + np.repeat(starts - excl, lens)
    rot_tree = stream[gather]

    # Pointed-vertex block: arcs from minimal-label corners, decreasing corner.
    inf_corners = np.nonzero(~finite)[0]
    vstar_block = 2 * inf_corners[::-1] + 1

    rot_order = np.concatenate([rot_tree, vstar_block])
    vertex_len = np.bincount(cv, weights=seg_len, minlength=n + 1).astype(np.int64)
    block_lens = np.concatenate([vertex_len, [len(vstar_block)]])
    if (block_lens == 0).any() or len(rot_order) != 4 * n:
        raise ConstructionError("rotation assembly produced an empty vertex block")
    block_starts = np.concatenate([[0], np.cumsum(block_lens)[:-1]])
    nxt_pos = np.arange(len(rot_order), dtype=np.int64) + 1
    nxt_pos[block_starts + block_lens - 1] = block_starts
    next_rot = np.empty(4 * n, dtype=np.int64)
    next_rot[rot_order] = rot_order[nxt_pos]
    return twin, next_rot, origin


def build_quadrangulation(lt: LabelledTree, epsilon: int) -> QuadMap:
    """Image of (labelled tree, epsilon) under the arc construction.

    The root edge is the arc attached to the first contour corner; with
    ``epsilon=+1`` it points back toward that corner, with ``epsilon=-1``
    away from it.
    """
    if epsilon not in (-1, 1):
        raise ParameterError(f"epsilon must be +1 or -1, got {epsilon}")
    n = lt.n_edges
    if n < 1:
        raise ParameterError("the construction needs a tree with at least one edge")

    corners = contour_exploration(lt.tree, lt.labels)
    succ = successor_table(corners).s
    twin, next_rot, origin = _assemble_rotation(corners.vertices, succ, n)

    # Face oracle on the fresh rotation system: any failure is a bug.
    pi = next_rot[twin]
    ids = np.arange(4 * n, dtype=np.int64)
    pi2 = pi[pi]
    if (pi == ids).any() or (pi2 == ids).any() or not (pi2[pi2] == ids).all():
        raise ConstructionError("rotation assembly failed the face-degree oracle")

    labels_ext = np.concatenate([lt.labels, [lt.labels.min() - 1]])
    root_half_edge = 1 if epsilon == 1 else 0
    return QuadMap(
        n_faces=n,
        twin=twin,
        next_in_rotation=next_rot,
        origin=origin,
        root_half_edge=root_half_edge,
        pointed_vertex=n + 1,
        vertex_labels=labels_ext,
    )


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of every structural check on a QuadMap."""

    checks: dict[str, bool]
    details: dict[str, str]

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def failing(self) -> list[str]:
        return [name for name, passed in self.checks.items() if not passed]


def validate_quadrangulation(q: QuadMap) -> ValidationReport:
    """Full structural certificate: counts, involution/rotation sanity,
    face degrees, Euler characteristic and connectivity."""
    checks: dict[str, bool] = {}
    details: dict[str, str] = {}
    n = q.n_faces
    m = q.n_half_edges
    ids = np.arange(m, dtype=np.int64)

    def record(name: str, passed: bool, detail: str = "") -> bool:
        checks[name] = bool(passed)
        if detail and not passed:
            details[name] = detail
        return checks[name]

    in_range = (
        len(q.twin) == m
        and len(q.next_in_rotation) == m
        and len(q.origin) == m
        and m > 0
        and (q.twin >= 0).all()
        and (q.twin < m).all()
        and (q.next_in_rotation >= 0).all()
        and (q.next_in_rotation < m).all()
    )
    record("arrays_well_formed", in_range)
    if not in_range:
        return ValidationReport(checks=checks, details=details)

    record("twin_involution", (q.twin[q.twin] == ids).all() and (q.twin != ids).all())
    perm_ok = record("rotation_permutation", np.array_equal(np.sort(q.next_in_rotation), ids))
    record(
        "rotation_preserves_origin",
        perm_ok and (q.origin[q.next_in_rotation] == q.origin).all(),
    )

    v_seen = np.unique(q.origin)
    record(
        "vertex_count",
        len(v_seen) == n + 2 and v_seen[0] == 0 and v_seen[-1] == n + 1,
        f"distinct origins {len(v_seen)}, expected {n + 2}",
    )
    record("edge_count", m == 4 * n)

    if perm_ok:
        record(
            "one_rotation_cycle_per_vertex",
            _perm_cycle_count(q.next_in_rotation) == n + 2,
        )
        pi = q.next_in_rotation[q.twin]
        pi2 = pi[pi]
        deg4 = (pi != ids).all() and (pi2 != ids).all() and (pi2[pi2] == ids).all()
        record("faces_degree_four", deg4)
        n_faces = _perm_cycle_count(pi)
        record("face_count", n_faces == n, f"{n_faces} faces, expected {n}")
        euler = (n + 2) - 2 * n + n_faces
        record("euler_characteristic", euler == 2, f"V-E+F = {euler}")
    else:
        for name in (
            "one_rotation_cycle_per_vertex",
            "faces_degree_four",
            "face_count",
            "euler_characteristic",
        ):
            record(name, False, "skipped: rotation is not a permutation")

    indptr, indices = q.adjacency()
    dist = kernels.bfs_distances(indptr, indices, 0, -1)
    record("connected", bool((dist >= 0).all()))

    record("root_half_edge_in_range", 0 <= q.root_half_edge < m)
    record("pointed_vertex_in_range", 0 <= q.pointed_vertex <= n + 1)

    return ValidationReport(checks=checks, details=details)


def canonical_form(q: QuadMap) -> tuple:
    """Canonical encoding of the rooted pointed map.

    Vertices are relabelled by first visit of a traversal that starts at
    the root half-edge and reads each vertex's rotation from its entry
    half-edge; two maps get the same encoding iff they are isomorphic as
    rooted pointed embedded maps.
    """
    n_v = q.n_vertices
    entry = np.full(n_v, -1, dtype=np.int64)
    new_id = np.full(n_v, -1, dtype=np.int64)
    root_vertex = int(q.origin[q.root_half_edge])
    entry[root_vertex] = q.root_half_edge
    new_id[root_vertex] = 0
    queue = [root_vertex]
    next_id = 1
    encoding: list[tuple[int, ...]] = []
    head = 0
    while head < len(queue):
        v = queue[head]
        head += 1
        around: list[int] = []
        h = int(entry[v])
        while True:
            t = int(q.twin[h])
            w = int(q.origin[t])
            if new_id[w] < 0:
                new_id[w] = next_id
                next_id += 1
                entry[w] = t
                queue.append(w)
            around.append(int(new_id[w]))
            h = int(q.next_in_rotation[h])
            if h == entry[v]:
                break
        encoding.append(tuple(around))
    return (q.n_faces, tuple(encoding), int(new_id[q.pointed_vertex]))


def iter_offspring_sequences(n: int) -> Iterator[np.ndarray]:
    """All lexicographic offspring sequences of plane trees with n edges."""
    seq = np.zeros(n + 1, dtype=np.int64)

    def rec(m: int, total: int) -> Iterator[np.ndarray]:
        if m == n:
            if total == n:
                seq[n] = 0
                yield seq.copy()
            return
        for c in range(0, n - total + 1):
            if total + c - (m + 1) >= 0:
                seq[m] = c
                yield from rec(m + 1, total + c)

    yield from rec(0, 0)


def iter_labelled_trees(n: int) -> Iterator[LabelledTree]:
    """All admissible labelled trees with n edges (Cat(n) * 3^n of them)."""
    for offspring in iter_offspring_sequences(n):
        tree = tree_from_offspring(offspring)
        for incs in itertools.product((-1, 0, 1), repeat=n):
            labels = np.zeros(n + 1, dtype=np.int64)
            for v in range(1, n + 1):
                labels[v] = labels[tree.parent[v]] + incs[v - 1]
            yield LabelledTree(tree=tree, labels=labels)


def enumerate_small(n: int) -> list[tuple[LabelledTree, int, QuadMap]]:
    """Build the images of every (labelled tree, epsilon) with n <= 4 edges.

    Every image is validated and the collection is checked to be pairwise
    non-isomorphic as rooted pointed maps; failures raise
    InvariantViolation because injectivity is a theorem.
    """
    if not (1 <= n <= 4):
        raise ParameterError("exhaustive enumeration is supported for 1 <= n <= 4")
    out: list[tuple[LabelledTree, int, QuadMap]] = []
    forms: set[tuple] = set()
    for lt in iter_labelled_trees(n):
        for eps in (1, -1):
            q = build_quadrangulation(lt, eps)
            report = validate_quadrangulation(q)
            if not report.ok:
                raise InvariantViolation(
                    f"enumeration image failed checks {report.failing()} "
                    f"for labels {lt.labels.tolist()}, eps={eps}"
                )
            form = canonical_form(q)
            if form in forms:
                raise InvariantViolation(
                    f"two inputs produced isomorphic rooted pointed maps (n={n})"
                )
            forms.add(form)
            out.append((lt, eps, q))
    return out
