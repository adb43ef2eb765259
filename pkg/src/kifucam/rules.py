"""Board representation and capture rules.

Only occupancy and suicide are enforced: the device records what physically
happens on the board, so ko/superko violations that actually occur must still
be recordable.
"""

from __future__ import annotations

import numpy as np

from .errors import IllegalMove

EMPTY, BLACK, WHITE = 0, 1, 2
COLOR_NAMES = {EMPTY: "Empty", BLACK: "Black", WHITE: "White"}
Coord = tuple[int, int]  # (col, row), zero-based from top-left


def opponent(color: int) -> int:
    if color not in (BLACK, WHITE):
        raise ValueError(f"not a stone color: {color}")
    return WHITE if color == BLACK else BLACK


class BoardState:
    """N x N cells of {Empty, Black, White}; cheap to copy and compare."""

    __slots__ = ("size", "cells")

    def __init__(self, size: int = 19, cells: np.ndarray | None = None):
        self.size = size
        if cells is None:
            self.cells = np.zeros((size, size), dtype=np.int8)
        else:
            cells = np.asarray(cells, dtype=np.int8)
            if cells.shape != (size, size):
                raise ValueError("cell array shape does not match size")
            self.cells = cells

    def get(self, c: Coord) -> int:
        return int(self.cells[c[1], c[0]])

    def set(self, c: Coord, color: int) -> None:
        self.cells[c[1], c[0]] = color

    def copy(self) -> "BoardState":
        return BoardState(self.size, self.cells.copy())

    def __eq__(self, other) -> bool:
        return isinstance(other, BoardState) and self.size == other.size \
            and bool(np.array_equal(self.cells, other.cells))

    def __hash__(self):
        return hash((self.size, self.cells.tobytes()))

    def key(self) -> bytes:
        return self.cells.tobytes()

    def neighbors(self, c: Coord):
        x, y = c
        if x > 0:
            yield (x - 1, y)
        if x < self.size - 1:
            yield (x + 1, y)
        if y > 0:
            yield (x, y - 1)
        if y < self.size - 1:
            yield (x, y + 1)

    def group_and_liberties(self, c: Coord) -> tuple[set[Coord], set[Coord]]:
        """Flood-fill the group at ``c`` and collect its liberties."""
        color = self.get(c)
        if color == EMPTY:
            raise ValueError("no stone at coordinate")
        group = {c}
        liberties: set[Coord] = set()
        stack = [c]
        while stack:
            cur = stack.pop()
            for n in self.neighbors(cur):
                v = self.get(n)
                if v == EMPTY:
                    liberties.add(n)
                elif v == color and n not in group:
                    group.add(n)
                    stack.append(n)
        return group, liberties

    def stones(self, color: int | None = None) -> list[Coord]:
        if color is None:
            ys, xs = np.nonzero(self.cells)
        else:
            ys, xs = np.nonzero(self.cells == color)
        return [(int(x), int(y)) for x, y in zip(xs, ys)]

    def to_rows(self) -> list[str]:
        """Rows as strings of '.', 'X' (black), 'O' (white), top to bottom."""
        chars = np.array([".", "X", "O"])
        return ["".join(chars[row]) for row in self.cells]

    @classmethod
    def from_rows(cls, rows: list[str]) -> "BoardState":
        size = len(rows)
        cells = np.zeros((size, size), dtype=np.int8)
        lut = {".": EMPTY, "X": BLACK, "O": WHITE}
        for j, row in enumerate(rows):
            for i, ch in enumerate(row):
                cells[j, i] = lut[ch]
        return cls(size, cells)


def expected_captures(board: BoardState, coord: Coord, color: int) -> list[Coord]:
    """Opponent stones that come off if ``color`` plays at ``coord``.

    Raises IllegalMove for an occupied point or a suicide (a capture always
    rescues the placed stone, so suicide means zero captures and no liberty).
    """
    if board.get(coord) != EMPTY:
        raise IllegalMove(f"point {coord} is occupied")
    work = board.copy()
    work.set(coord, color)
    opp = opponent(color)
    captured: set[Coord] = set()
    for n in work.neighbors(coord):
        if work.get(n) == opp and n not in captured:
            group, libs = work.group_and_liberties(n)
            if not libs:
                captured |= group
    if not captured:
        _, libs = work.group_and_liberties(coord)
        if not libs:
            raise IllegalMove(f"suicide at {coord}")
    return sorted(captured)


def play_move(board: BoardState, coord: Coord, color: int) -> list[Coord]:
    """Apply a move in place, removing captures; returns the captured coords."""
    captured = expected_captures(board, coord, color)
    board.set(coord, color)
    for c in captured:
        board.set(c, EMPTY)
    return captured
