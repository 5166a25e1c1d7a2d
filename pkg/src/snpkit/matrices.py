"""Exact-integer matrices derived from a system.

Row indices are rule indices, column indices are neuron indices, both in
declaration order.  All arithmetic is over Python ints (and stays exact);
rank is computed with fraction-free elimination so no rationals are ever
materialized.

Conventions:
  spiking_matrix      n x m: -c in the owner column, +p in each synaptic
                      target column of the owner.
  augmented_matrix    n x (m+1): extra environment column holding p for
                      spiking rules owned by the out neuron, else 0.
  production_matrix   n x m: the +p part only.
  consumption_matrix  n x m: the +c part only (owner column).
  struc_matrix        m x m: -1 on the diagonal, +1 at (i,j) for each
                      synapse (i,j); the synapse digraph in matrix form.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import SNPSystem

__all__ = [
    "IntMatrix",
    "spiking_matrix",
    "augmented_matrix",
    "production_matrix",
    "consumption_matrix",
    "struc_matrix",
    "row_rank",
    "StructuralReport",
    "structural_report",
    "vec_add",
    "vec_sub",
    "hadamard",
]


@dataclass(frozen=True)
class IntMatrix:
    rows: int
    cols: int
    data: tuple[tuple[int, ...], ...]  # row-major

    def __post_init__(self):
        if len(self.data) != self.rows or any(len(r) != self.cols for r in self.data):
            raise ValueError("data shape does not match rows x cols")

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return self.data[i][j]

    def vecmat(self, v: tuple[int, ...]) -> tuple[int, ...]:
        """v . self for a row vector v of length `rows`."""
        if len(v) != self.rows:
            raise ValueError(f"vector length {len(v)} != rows {self.rows}")
        return tuple(
            sum(v[i] * self.data[i][j] for i in range(self.rows))
            for j in range(self.cols)
        )

    def sub(self, other: "IntMatrix") -> "IntMatrix":
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("shape mismatch")
        return IntMatrix(
            self.rows,
            self.cols,
            tuple(
                tuple(a - b for a, b in zip(ra, rb))
                for ra, rb in zip(self.data, other.data)
            ),
        )

    def column(self, j: int) -> tuple[int, ...]:
        return tuple(row[j] for row in self.data)

    def to_json_dict(self) -> dict:
        return {"rows": self.rows, "cols": self.cols, "data": [list(r) for r in self.data]}

    def to_text(self) -> str:
        if not self.data:
            return "(empty)"
        width = max(len(str(x)) for row in self.data for x in row)
        return "\n".join(
            " ".join(str(x).rjust(width) for x in row) for row in self.data
        )


def vec_add(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(x + y for x, y in zip(a, b, strict=True))


def vec_sub(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(x - y for x, y in zip(a, b, strict=True))


def hadamard(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(x * y for x, y in zip(a, b, strict=True))


def spiking_matrix(sys: SNPSystem) -> IntMatrix:
    n, m = sys.rule_count, sys.neuron_count
    data = [[0] * m for _ in range(n)]
    for i, r in enumerate(sys.rules):
        data[i][r.owner] -= r.c
        for tgt in sys.targets_of[r.owner]:
            data[i][tgt] += r.p
    return IntMatrix(n, m, tuple(tuple(row) for row in data))


def augmented_matrix(sys: SNPSystem) -> IntMatrix:
    """Spiking matrix plus an environment column for out-neuron emission."""
    if sys.out_neuron is None:
        raise ValueError("system has no out neuron")
    base = spiking_matrix(sys)
    data = []
    for i, r in enumerate(sys.rules):
        env = r.p if (r.owner == sys.out_neuron and not r.is_forgetting) else 0
        data.append(base.data[i] + (env,))
    return IntMatrix(base.rows, base.cols + 1, tuple(data))


def production_matrix(sys: SNPSystem) -> IntMatrix:
    n, m = sys.rule_count, sys.neuron_count
    data = [[0] * m for _ in range(n)]
    for i, r in enumerate(sys.rules):
        for tgt in sys.targets_of[r.owner]:
            data[i][tgt] += r.p
    return IntMatrix(n, m, tuple(tuple(row) for row in data))


def consumption_matrix(sys: SNPSystem) -> IntMatrix:
    n, m = sys.rule_count, sys.neuron_count
    data = [[0] * m for _ in range(n)]
    for i, r in enumerate(sys.rules):
        data[i][r.owner] += r.c
    return IntMatrix(n, m, tuple(tuple(row) for row in data))


def struc_matrix(sys: SNPSystem) -> IntMatrix:
    m = sys.neuron_count
    data = [[0] * m for _ in range(m)]
    for i in range(m):
        data[i][i] = -1
    for a, b in sys.syn:
        data[a][b] = 1
    return IntMatrix(m, m, tuple(tuple(row) for row in data))


def row_rank(mat: IntMatrix) -> int:
    """Rank over Q by Bareiss fraction-free elimination (exact ints only)."""
    a = [list(row) for row in mat.data]
    rank = 0
    prev = 1
    for c in range(mat.cols):
        piv = next((i for i in range(rank, mat.rows) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[rank], a[piv] = a[piv], a[rank]
        for i in range(rank + 1, mat.rows):
            for j in range(c + 1, mat.cols):
                # exact by Sylvester's determinant identity
                a[i][j] = (a[i][j] * a[rank][c] - a[i][c] * a[rank][j]) // prev
            a[i][c] = 0
        prev = a[rank][c]
        rank += 1
        if rank == mat.rows:
            break
    return rank


@dataclass(frozen=True)
class StructuralReport:
    row_negative_counts: tuple[int, ...]  # per rule row of M
    col_negative_counts: tuple[int, ...]  # per neuron column of M
    inferred_output_neurons: tuple[int, ...]  # negative-only-row evidence
    out_degree: tuple[int, ...]
    struc_rank: int
    rank_cycle_hint: bool  # rank(Struc-M) < m
    dfs_has_cycle: bool


def _digraph_has_cycle(m: int, syn) -> bool:
    adj: list[list[int]] = [[] for _ in range(m)]
    for a, b in syn:
        adj[a].append(b)
        if a == b:
            return True
    color = [0] * m  # 0 unvisited, 1 on stack, 2 done
    for start in range(m):
        if color[start]:
            continue
        stack = [(start, iter(adj[start]))]
        color[start] = 1
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                color[node] = 2
                stack.pop()
            elif color[nxt] == 1:
                return True
            elif color[nxt] == 0:
                color[nxt] = 1
                stack.append((nxt, iter(adj[nxt])))
    return False


def structural_report(sys: SNPSystem) -> StructuralReport:
    """Row/column sign census of M plus the two independent cycle signals.

    A row whose single nonzero entry is negative consumes without feeding
    any neuron, which is evidence its owner emits outside the system (or
    merely forgets); the augmented matrix disambiguates, so the inference
    here reports neuron indices only.
    """
    mat = spiking_matrix(sys)
    m = sys.neuron_count
    row_neg = tuple(sum(1 for x in row if x < 0) for row in mat.data)
    col_neg = tuple(
        sum(1 for i in range(mat.rows) if mat.data[i][j] < 0) for j in range(m)
    )
    inferred = []
    for i, row in enumerate(mat.data):
        nonzero = [j for j, x in enumerate(row) if x != 0]
        if len(nonzero) == 1 and row[nonzero[0]] < 0:
            owner = sys.rules[i].owner
            if owner not in inferred:
                inferred.append(owner)
    out_degree = tuple(len(t) for t in sys.targets_of)
    struc = struc_matrix(sys)
    rank = row_rank(struc)
    return StructuralReport(
        row_negative_counts=row_neg,
        col_negative_counts=col_neg,
        inferred_output_neurons=tuple(inferred),
        out_degree=out_degree,
        struc_rank=rank,
        rank_cycle_hint=rank < m,
        dfs_has_cycle=_digraph_has_cycle(m, sys.syn),
    )
