"""Random welded-tree instances and their classical adjacency oracle.

Internal vertex ids are layer ordered: the entrance is id 0, the left tree is
stored in heap order (layers 0..n), and the right tree follows with its leaves
first so that ``layer_of`` is non-decreasing in the id. Names are an
independent random bijection onto 2n-bit strings, with the entrance pinned to
``0`` and ``2**(2n) - 1`` reserved as the padding symbol.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from os import PathLike
from typing import Iterable

import numpy as np

__all__ = [
    "CapacityError",
    "InstanceParseError",
    "QueryLedger",
    "WeldedTree",
    "BaselineTimeout",
    "classical_baseline",
    "dumps",
    "generate",
    "is_exit",
    "load",
    "oracle_query",
    "save",
    "vertex_count",
]

RNG_ALGORITHM = "py-mt19937"
HEADER_RE = re.compile(r"^weldedtree v1 n=(\d+) seed=(-?\d+) rng=(\S+)$")


class CapacityError(ValueError):
    """The 2n-bit name space cannot hold all vertices."""


class InstanceParseError(ValueError):
    def __init__(self, lineno: int, message: str) -> None:
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class BaselineTimeout(RuntimeError):
    pass


@dataclass
class QueryLedger:
    """Oracle-call counters for one run; never shared between runs."""

    classical_queries: int = 0
    quantum_oracle_calls: int = 0
    breakdown: dict[str, int] = field(default_factory=dict)

    def charge_quantum(self, what: str, calls: int) -> None:
        if calls < 0:
            raise ValueError("oracle charges are non-negative")
        self.quantum_oracle_calls += calls
        self.breakdown[what] = self.breakdown.get(what, 0) + calls


def vertex_count(n: int) -> int:
    return 2 * (2 ** (n + 1) - 1)


@dataclass(frozen=True, eq=False)
class WeldedTree:
    """A concrete instance. Arrays are treated as read-only after construction.

    ``slots[u]`` holds the three neighbour ids of vertex ``u`` in oracle order,
    with ``-1`` standing for the padding symbol. ``names[u]`` is the 2n-bit name.
    """

    n: int
    names: np.ndarray  # int64 or object, shape (V,)
    layer_of: np.ndarray  # shape (V,)
    slots: np.ndarray  # shape (V, 3)
    parent_port: np.ndarray  # slot index toward the nearer root (the padding slot at roots)
    seed: int
    rng_algorithm: str = RNG_ALGORITHM
    _index: dict[int, int] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        if not self._index:
            self._index.update({int(name): u for u, name in enumerate(self.names)})

    @property
    def bottom(self) -> int:
        return (1 << (2 * self.n)) - 1

    @property
    def num_vertices(self) -> int:
        return len(self.names)

    @property
    def entrance(self) -> int:
        return 0

    @property
    def exit(self) -> int:
        return self.num_vertices - 1

    def id_of(self, name: int) -> int | None:
        return self._index.get(int(name))

    def name_of(self, u: int) -> int:
        return int(self.names[u])

    def row(self, u: int) -> tuple[int, int, int]:
        """Γ(u, 1..3) as names."""
        bottom = self.bottom
        return tuple(bottom if v < 0 else int(self.names[v]) for v in self.slots[u])  # type: ignore[return-value]

    def neighbors(self, u: int) -> list[int]:
        """Genuine neighbour ids in slot order."""
        return [int(v) for v in self.slots[u] if v >= 0]

    def degree(self, u: int) -> int:
        return int(np.count_nonzero(self.slots[u] >= 0))

    def middle_cycle(self) -> list[int]:
        """Vertices of the leaf cycle in traversal order, starting at a left leaf."""
        n = self.n
        start = 2**n - 1
        cycle = [start]
        prev, cur = -1, start
        while True:
            nxt = [
                v
                for v in self.neighbors(cur)
                if {int(self.layer_of[v]), int(self.layer_of[cur])} == {n, n + 1} and v != prev
            ]
            if not nxt:
                raise ValueError("leaf cycle is broken")
            prev, cur = cur, nxt[0]
            if cur == start:
                return cycle
            cycle.append(cur)
            if len(cycle) > 2 ** (n + 1):
                raise ValueError("leaf cycle does not close")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, WeldedTree):
            return NotImplemented
        return (
            self.n == other.n
            and self.seed == other.seed
            and self.rng_algorithm == other.rng_algorithm
            and np.array_equal(self.names, other.names)
            and np.array_equal(self.layer_of, other.layer_of)
            and np.array_equal(self.slots, other.slots)
            and np.array_equal(self.parent_port, other.parent_port)
        )


def _layout(n: int) -> tuple[np.ndarray, list[list[int]]]:
    """Layer indices and the tree edges (as neighbour lists) of the two binary trees."""
    half = 2 ** (n + 1) - 1
    size = 2 * half
    layer_of = np.empty(size, dtype=np.int64)
    adj: list[list[int]] = [[] for _ in range(size)]
    # left tree, heap order
    for u in range(half):
        layer_of[u] = (u + 1).bit_length() - 1
        if u > 0:
            parent = (u - 1) // 2
            adj[u].append(parent)
            adj[parent].append(u)
    # right tree: depth d (0 = exit) sits at layer 2n+1-d; ids ordered by layer
    def right_id(depth: int, j: int) -> int:
        return half + (2 ** (n + 1) - 2 ** (depth + 1)) + j

    for depth in range(n + 1):
        for j in range(2**depth):
            u = right_id(depth, j)
            layer_of[u] = 2 * n + 1 - depth
            if depth > 0:
                parent = right_id(depth - 1, j // 2)
                adj[u].append(parent)
                adj[parent].append(u)
    return layer_of, adj


def generate(n: int, seed: int) -> WeldedTree:
    if n < 1:
        raise ValueError(f"tree height must be positive, got {n}")
    size = vertex_count(n)
    if size > 2 ** (2 * n) - 2:
        raise CapacityError(
            f"n={n}: {size} vertices do not fit in {2 * n}-bit names with the padding symbol reserved"
        )
    rng = random.Random(seed)
    layer_of, adj = _layout(n)
    half = size // 2
    leaves = 2**n
    left_leaves = [half - leaves + j for j in range(leaves)]
    right_leaves = [half + j for j in range(leaves)]
    sigma = rng.sample(range(leaves), leaves)
    tau = rng.sample(range(leaves), leaves)
    for i in range(leaves):
        left, right = left_leaves[sigma[i]], right_leaves[tau[i]]
        nxt = left_leaves[sigma[(i + 1) % leaves]]
        adj[left].append(right)
        adj[right].append(left)
        adj[right].append(nxt)
        adj[nxt].append(right)

    bottom = 2 ** (2 * n) - 1
    others = rng.sample(range(1, bottom), size - 1)
    dtype = np.int64 if 2 * n < 63 else object
    names = np.array([0] + others, dtype=dtype)

    slots = np.full((size, 3), -1, dtype=np.int64)
    parent_port = np.empty(size, dtype=np.int64)
    for u in range(size):
        row = list(adj[u]) + [-1] * (3 - len(adj[u]))
        rng.shuffle(row)
        slots[u] = row
        parent_port[u] = row.index(_toward_root(u, row, layer_of, n))
    return WeldedTree(n, names, layer_of, slots, parent_port, seed, RNG_ALGORITHM)


def _toward_root(u: int, row: Iterable[int], layer_of: np.ndarray, n: int) -> int:
    k = int(layer_of[u])
    want = k - 1 if k <= n else k + 1
    for v in row:
        if v < 0:
            if k in (0, 2 * n + 1):
                return v
            continue
        if int(layer_of[v]) == want:
            return v
    raise ValueError(f"vertex {u} has no neighbour toward its root")


def oracle_query(tree: WeldedTree, ledger: QueryLedger, u: int) -> tuple[int, int, int]:
    """Row ``u`` of the adjacency list; unknown names get three padding symbols."""
    ledger.classical_queries += 1
    vid = tree.id_of(u)
    if vid is None:
        b = tree.bottom
        return (b, b, b)
    return tree.row(vid)


def _row_is_exit(tree: WeldedTree, u: int, row: tuple[int, int, int]) -> bool:
    return u != 0 and sum(1 for v in row if v == tree.bottom) == 1


def is_exit(tree: WeldedTree, ledger: QueryLedger, u: int) -> bool:
    return _row_is_exit(tree, u, oracle_query(tree, ledger, u))


def classical_baseline(tree: WeldedTree, seed: int) -> tuple[int, int]:
    """Seeded random walk from the entrance until the exit is recognised.

    Each distinct vertex is queried once. Returns ``(exit name, queries)``.
    """
    rng = random.Random(seed)
    ledger = QueryLedger()
    rows: dict[int, tuple[int, int, int]] = {}
    cap = 10 * 4**tree.n
    u = 0
    for _ in range(cap):
        if u not in rows:
            rows[u] = oracle_query(tree, ledger, u)
            if _row_is_exit(tree, u, rows[u]):
                return u, ledger.classical_queries
        u = rng.choice([v for v in rows[u] if v != tree.bottom])
    raise BaselineTimeout(f"exit not found within {cap} steps")


def _hex_width(n: int) -> int:
    return (2 * n + 3) // 4


def dumps(tree: WeldedTree) -> str:
    width = _hex_width(tree.n)
    lines = [f"weldedtree v1 n={tree.n} seed={tree.seed} rng={tree.rng_algorithm}"]
    for u in range(tree.num_vertices):
        cells = " ".join(f"{g:0{width}x}" for g in tree.row(u))
        lines.append(f"{tree.name_of(u):0{width}x} {cells} layer={int(tree.layer_of[u])}")
    return "\n".join(lines) + "\n"


def save(tree: WeldedTree, path: str | PathLike) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(dumps(tree))


def load(path: str | PathLike) -> WeldedTree:
    with open(path, encoding="ascii") as fh:
        text = fh.read().splitlines()
    if not text:
        raise InstanceParseError(1, "empty file")
    m = HEADER_RE.match(text[0].strip())
    if m is None:
        raise InstanceParseError(1, f"bad header {text[0]!r}")
    n, seed, rng_id = int(m.group(1)), int(m.group(2)), m.group(3)
    if n < 1:
        raise InstanceParseError(1, "n must be positive")
    bottom = 2 ** (2 * n) - 1
    size = vertex_count(n)
    body = [(i + 2, line) for i, line in enumerate(text[1:]) if line.strip()]
    if len(body) != size:
        raise InstanceParseError(len(text), f"expected {size} vertex lines, found {len(body)}")

    names: list[int] = []
    rows: list[list[int]] = []
    layers: list[int] = []
    index: dict[int, int] = {}
    for lineno, line in body:
        parts = line.split()
        if len(parts) != 5 or not parts[4].startswith("layer="):
            raise InstanceParseError(lineno, "expected '<name> <g1> <g2> <g3> layer=<k>'")
        try:
            name, *row = (int(p, 16) for p in parts[:4])
            layer = int(parts[4][len("layer="):])
        except ValueError as exc:
            raise InstanceParseError(lineno, str(exc)) from None
        if name == bottom or name > bottom or any(g > bottom for g in row):
            raise InstanceParseError(lineno, "name outside the 2n-bit range or equal to the padding symbol")
        if name in index:
            raise InstanceParseError(lineno, f"duplicate name {name:x}")
        if not 0 <= layer <= 2 * n + 1:
            raise InstanceParseError(lineno, f"layer {layer} out of range")
        index[name] = len(names)
        names.append(name)
        rows.append(row)
        layers.append(layer)
    if names[0] != 0:
        raise InstanceParseError(body[0][0], "the entrance must be named 0 and listed first")

    slots = np.full((size, 3), -1, dtype=np.int64)
    for u, row in enumerate(rows):
        lineno = body[u][0]
        pads = sum(1 for g in row if g == bottom)
        if pads != (1 if layers[u] in (0, 2 * n + 1) else 0):
            raise InstanceParseError(lineno, "wrong number of padding slots for this layer")
        for i, g in enumerate(row):
            if g == bottom:
                continue
            v = index.get(g)
            if v is None:
                raise InstanceParseError(lineno, f"neighbour {g:x} is not a vertex")
            slots[u, i] = v
        genuine = [v for v in slots[u] if v >= 0]
        if len(set(genuine)) != len(genuine):
            raise InstanceParseError(lineno, "repeated neighbour")
    for u in range(size):
        for v in slots[u]:
            if v >= 0 and u not in slots[v]:
                raise InstanceParseError(body[u][0], f"asymmetric adjacency between {names[u]:x} and {names[v]:x}")

    layer_of = np.array(layers, dtype=np.int64)
    parent_port = np.empty(size, dtype=np.int64)
    for u in range(size):
        row = [int(v) for v in slots[u]]
        try:
            parent_port[u] = row.index(_toward_root(u, row, layer_of, n))
        except ValueError:
            raise InstanceParseError(body[u][0], "no neighbour toward the root") from None
    dtype = np.int64 if 2 * n < 63 else object
    return WeldedTree(n, np.array(names, dtype=dtype), layer_of, slots, parent_port, seed, rng_id)
