"""Young diagrams and the structural matrices of the canonical Jacobi system.

A diagram is a non-increasing list of row lengths.  Boxes are ordered
row-major: all boxes of row 1 first, then row 2, and so on.  Every matrix
in this package is indexed by that ordering.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "YoungDiagram",
    "Level",
    "StructuralMatrices",
    "build_structural_matrices",
    "levels_and_superboxes",
    "partial_trace_ricci",
]

MAX_BOXES = 64


@dataclass(frozen=True)
class Level:
    """A maximal group of rows of equal length.

    ``length`` is the common row length (number of superboxes), ``size``
    the number of rows, ``rows`` their 0-based indices in the diagram.
    """

    length: int
    size: int
    rows: tuple[int, ...]


@dataclass(frozen=True)
class YoungDiagram:
    """Ordered row lengths n1 >= n2 >= ... >= nk, all positive."""

    row_lengths: tuple[int, ...]

    def __post_init__(self):
        rows = tuple(int(r) for r in self.row_lengths)
        object.__setattr__(self, "row_lengths", rows)
        if not rows:
            raise ValueError("diagram needs at least one row")
        if any(r <= 0 for r in rows):
            raise ValueError("row lengths must be positive")
        if any(rows[i] < rows[i + 1] for i in range(len(rows) - 1)):
            raise ValueError("row lengths must be non-increasing")
        if sum(rows) > MAX_BOXES:
            raise ValueError(f"diagram has more than {MAX_BOXES} boxes")

    @property
    def total_boxes(self) -> int:
        return sum(self.row_lengths)

    @property
    def num_rows(self) -> int:
        return len(self.row_lengths)

    def row_offsets(self) -> tuple[int, ...]:
        """Start index of each row in the canonical box ordering."""
        offs, acc = [], 0
        for r in self.row_lengths:
            offs.append(acc)
            acc += r
        return tuple(offs)

    def box_index(self, row: int, box: int) -> int:
        """Canonical index of box ``box`` (0-based) of row ``row`` (0-based)."""
        if not (0 <= row < self.num_rows):
            raise IndexError("row out of range")
        if not (0 <= box < self.row_lengths[row]):
            raise IndexError("box out of range")
        return self.row_offsets()[row] + box

    def levels(self) -> tuple[Level, ...]:
        """Partition of the rows into levels (groups of equal length)."""
        levels: list[Level] = []
        start = 0
        for i in range(1, self.num_rows + 1):
            if i == self.num_rows or self.row_lengths[i] != self.row_lengths[start]:
                levels.append(
                    Level(
                        length=self.row_lengths[start],
                        size=i - start,
                        rows=tuple(range(start, i)),
                    )
                )
                start = i
        return tuple(levels)

    @classmethod
    def parse(cls, text: str) -> "YoungDiagram":
        """Parse the compact form used by the CLI, e.g. ``"2,1"``."""
        parts = [p.strip() for p in text.split(",") if p.strip()]
        if not parts:
            raise ValueError(f"cannot parse diagram from {text!r}")
        try:
            rows = tuple(int(p) for p in parts)
        except ValueError as exc:
            raise ValueError(f"cannot parse diagram from {text!r}") from exc
        return cls(rows)

    def __str__(self) -> str:
        return ",".join(str(r) for r in self.row_lengths)


@dataclass(frozen=True, eq=False)
class StructuralMatrices:
    """The pair (gamma1, gamma2) attached to a diagram.

    gamma1 is block-diagonal with nilpotent shift blocks, gamma2 with
    rank-one projectors onto the first box of each row.  Together they are
    controllable: the columns of gamma2, gamma2@gamma1, ... span R^n.
    """

    diagram: YoungDiagram
    gamma1: np.ndarray = field(repr=False)
    gamma2: np.ndarray = field(repr=False)

    @property
    def dimension(self) -> int:
        return self.diagram.total_boxes

    def controllability_rank(self) -> int:
        n = self.dimension
        blocks, m = [], np.array(self.gamma2)
        for _ in range(n):
            blocks.append(m)
            m = m @ self.gamma1
        return int(np.linalg.matrix_rank(np.vstack(blocks)))


def build_structural_matrices(diagram: YoungDiagram) -> StructuralMatrices:
    """Assemble gamma1 and gamma2 block by block along the rows."""
    n = diagram.total_boxes
    g1 = np.zeros((n, n))
    g2 = np.zeros((n, n))
    for off, length in zip(diagram.row_offsets(), diagram.row_lengths):
        for i in range(length - 1):
            g1[off + i, off + i + 1] = 1.0
        g2[off, off] = 1.0
    g1.setflags(write=False)
    g2.setflags(write=False)
    return StructuralMatrices(diagram=diagram, gamma1=g1, gamma2=g2)


def levels_and_superboxes(diagram: YoungDiagram) -> tuple[Level, ...]:
    """Levels of the diagram; superbox i of a level collects box i of its rows."""
    return diagram.levels()


def partial_trace_ricci(R: np.ndarray, diagram: YoungDiagram, level: Level) -> list[float]:
    """Partial traces of a symmetric matrix over the superboxes of ``level``.

    Value ``i`` is the sum of the diagonal entries of ``R`` at box ``i`` of
    every row in the level, in the canonical box ordering.
    """
    R = np.asarray(R, dtype=float)
    n = diagram.total_boxes
    if R.shape != (n, n):
        raise ValueError(f"expected a {n}x{n} matrix, got shape {R.shape}")
    if level not in diagram.levels():
        raise ValueError("level does not belong to this diagram")
    offs = diagram.row_offsets()
    return [
        float(sum(R[offs[a] + i, offs[a] + i] for a in level.rows))
        for i in range(level.length)
    ]
