"""Undirected multigraphs, incidence matrices and subgraph bookkeeping.

Edge order is authoritative: edge ``e`` is bit ``e`` of every subgraph vector
``b`` and of the bond vector ``w``.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

from .errors import DimensionError, InputError
from .gf2 import Gf2Matrix, Gf2Vector, kernel_basis


@dataclass(frozen=True)
class Graph:
    num_vertices: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        if self.num_vertices < 0:
            raise InputError(f"vertex count must be nonnegative, got {self.num_vertices}")
        edges = tuple((int(i), int(j)) for i, j in self.edges)
        for e, (i, j) in enumerate(edges):
            if i == j:
                raise InputError(f"edge {e} is a self-loop on vertex {i}")
            if not (0 <= i < self.num_vertices and 0 <= j < self.num_vertices):
                raise InputError(f"edge {e} = ({i}, {j}) references a vertex outside 0..{self.num_vertices - 1}")
        object.__setattr__(self, "edges", edges)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def edge_masks(self) -> list[int]:
        """Per-edge vertex bitmask with both endpoints set (the columns of A)."""
        return [(1 << i) | (1 << j) for i, j in self.edges]

    def incidence_matrix(self) -> Gf2Matrix:
        return incidence_matrix(self)

    def num_components(self) -> int:
        parent = list(range(self.num_vertices))

        def find(x: int) -> int:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        comps = self.num_vertices
        for i, j in self.edges:
            ri, rj = find(i), find(j)
            if ri != rj:
                parent[ri] = rj
                comps -= 1
        return comps

    def relabel(self, perm: Sequence[int]) -> Graph:
        """Graph with vertex ``v`` renamed ``perm[v]``; edge order kept."""
        if sorted(perm) != list(range(self.num_vertices)):
            raise InputError("relabeling must be a permutation of the vertices")
        return Graph(self.num_vertices, tuple((perm[i], perm[j]) for i, j in self.edges))


def incidence_matrix(G: Graph) -> Gf2Matrix:
    """The |V| x |E| vertex/edge incidence matrix; each column has two ones."""
    rows = [0] * G.num_vertices
    for e, (i, j) in enumerate(G.edges):
        rows[i] |= 1 << e
        rows[j] |= 1 << e
    return Gf2Matrix(tuple(rows), G.num_edges)


def _check_subgraph(G: Graph, b: Gf2Vector) -> None:
    if b.length != G.num_edges:
        raise DimensionError(f"subgraph vector has length {b.length}, graph has {G.num_edges} edges")


def parity_vector(G: Graph, b: Gf2Vector) -> Gf2Vector:
    """Vertices of odd degree in subgraph ``b``."""
    _check_subgraph(G, b)
    bits = 0
    for e, mask in enumerate(G.edge_masks()):
        if (b.bits >> e) & 1:
            bits ^= mask
    return Gf2Vector(bits, G.num_vertices)


def subgraph_degree(G: Graph, b: Gf2Vector, i: int) -> int:
    _check_subgraph(G, b)
    if not 0 <= i < G.num_vertices:
        raise IndexError(f"vertex {i} out of range for {G.num_vertices} vertices")
    return sum(1 for e, (u, v) in enumerate(G.edges) if (b.bits >> e) & 1 and i in (u, v))


def cycle_space_dimension(G: Graph) -> int:
    """Dimension of the GF(2) cycle space, via the incidence-matrix kernel."""
    return kernel_basis(incidence_matrix(G)).dim


def augment_star(G: Graph, field_signs: Gf2Vector) -> tuple[Graph, Gf2Vector]:
    """Add an always-up spin joined to every vertex.

    The new vertex gets index ``|V|`` and the new edges ``(i, |V|)`` are
    appended after the existing ones in vertex order. Returns the augmented
    graph and the bond-vector extension (``field_signs`` itself) for the new
    edges; concatenate it after the original ``w``.
    """
    if field_signs.length != G.num_vertices:
        raise DimensionError(f"field signs have length {field_signs.length}, graph has {G.num_vertices} vertices")
    hub = G.num_vertices
    new_edges = G.edges + tuple((i, hub) for i in range(G.num_vertices))
    return Graph(G.num_vertices + 1, new_edges), field_signs


def gauge_transform(G: Graph, w: Gf2Vector, v: Gf2Vector) -> Gf2Vector:
    """Flip spins in ``v``: ``w ^ A^T v``, i.e. bonds with one endpoint in ``v``."""
    _check_subgraph(G, w)
    if v.length != G.num_vertices:
        raise DimensionError(f"gauge vector has length {v.length}, graph has {G.num_vertices} vertices")
    flips = 0
    for e, mask in enumerate(G.edge_masks()):
        flips |= ((v.bits & mask).bit_count() & 1) << e
    return Gf2Vector(w.bits ^ flips, w.length)


# --- standard families ---------------------------------------------------------


def path_graph(n: int) -> Graph:
    return Graph(n, tuple((i, i + 1) for i in range(n - 1)))


def cycle_graph(n: int) -> Graph:
    """Periodic chain; n = 2 gives a doubled edge."""
    if n < 2:
        raise InputError("a cycle needs at least two vertices")
    return Graph(n, tuple((i, (i + 1) % n) for i in range(n)))


def complete_graph(n: int) -> Graph:
    return Graph(n, tuple((i, j) for i in range(n) for j in range(i + 1, n)))


def grid_graph(rows: int, cols: int, periodic: bool = False) -> tuple[Graph, list[str]]:
    """Square grid with row-major vertices; returns the graph and per-edge
    orientation tags ("h" or "v")."""
    edges: list[tuple[int, int]] = []
    orient: list[str] = []

    def vid(r: int, c: int) -> int:
        return r * cols + c

    for r in range(rows):
        for c in range(cols):
            if c + 1 < cols or (periodic and cols > 1):
                edges.append((vid(r, c), vid(r, (c + 1) % cols)))
                orient.append("h")
            if r + 1 < rows or (periodic and rows > 1):
                edges.append((vid(r, c), vid((r + 1) % rows, c)))
                orient.append("v")
    return Graph(rows * cols, tuple(edges)), orient


def random_multigraph(rng: random.Random, num_vertices: int, num_edges: int) -> Graph:
    """Uniform random endpoints, parallel edges allowed, no self-loops."""
    if num_edges and num_vertices < 2:
        raise InputError("need at least two vertices to place an edge")
    edges = []
    for _ in range(num_edges):
        i, j = rng.sample(range(num_vertices), 2)
        edges.append((i, j))
    return Graph(num_vertices, tuple(edges))


# --- JSON ingestion ------------------------------------------------------------


def graph_from_json(obj: Any, where: str = "graph") -> tuple[Graph, Gf2Vector]:
    """Parse ``{"vertices": N, "edges": [[i, j], ...], "w": [...]}``."""
    if not isinstance(obj, dict):
        raise InputError(f"{where}: expected an object")
    for key in ("vertices", "edges"):
        if key not in obj:
            raise InputError(f"{where}: missing key {key!r}")
    n = obj["vertices"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 0:
        raise InputError(f"{where}.vertices: expected a nonnegative integer, got {n!r}")
    raw_edges = obj["edges"]
    if not isinstance(raw_edges, list):
        raise InputError(f"{where}.edges: expected a list")
    edges = []
    for e, pair in enumerate(raw_edges):
        if (
            not isinstance(pair, list)
            or len(pair) != 2
            or not all(isinstance(x, int) and not isinstance(x, bool) for x in pair)
        ):
            raise InputError(f"{where}.edges[{e}]: expected [i, j] integers, got {pair!r}")
        edges.append((pair[0], pair[1]))
    try:
        G = Graph(n, tuple(edges))
    except InputError as exc:
        raise InputError(f"{where}: {exc}") from exc
    raw_w = obj.get("w")
    if raw_w is None:
        w = Gf2Vector.zeros(G.num_edges)
    else:
        w = parse_bits(raw_w, f"{where}.w")
        if w.length != G.num_edges:
            raise InputError(f"{where}.w: length {w.length} does not match {G.num_edges} edges")
    return G, w


def graph_to_json(G: Graph, w: Gf2Vector | None = None) -> dict:
    out: dict[str, Any] = {"vertices": G.num_vertices, "edges": [list(e) for e in G.edges]}
    if w is not None:
        out["w"] = w.to_list()
    return out


def parse_bits(raw: Any, where: str = "bits") -> Gf2Vector:
    """Accept a list of 0/1 integers or a string such as ``"0110"`` / ``"0,1,1,0"``."""
    if isinstance(raw, str):
        s = raw.replace(",", "").replace(" ", "")
        if any(ch not in "01" for ch in s):
            raise InputError(f"{where}: bit string must contain only 0 and 1, got {raw!r}")
        return Gf2Vector.from_iterable(int(ch) for ch in s)
    if not isinstance(raw, list):
        raise InputError(f"{where}: expected a list of 0/1, got {type(raw).__name__}")
    for j, x in enumerate(raw):
        if x not in (0, 1) or isinstance(x, bool):
            raise InputError(f"{where}[{j}]: expected 0 or 1, got {x!r}")
    return Gf2Vector.from_iterable(raw)


def load_json(path: str | Path) -> Any:
    """Read a JSON file, reporting the location of syntax errors."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc


def load_graph(path: str | Path) -> tuple[Graph, Gf2Vector]:
    return graph_from_json(load_json(path), where=str(path))
