"""SGF FF[4] writing and a reader for the subset the pipeline consumes.

Coordinates use the standard lowercase letters, column then row, 'a' at the
top-left. Only the main line of play is read; variations are ignored.
"""

from __future__ import annotations

import re

from .errors import SgfInvalid
from .rules import BLACK, WHITE, BoardState, Coord, play_move

_LETTERS = "abcdefghijklmnopqrs"


def coord_to_sgf(coord: Coord) -> str:
    x, y = coord
    return _LETTERS[x] + _LETTERS[y]


def sgf_to_coord(text: str) -> Coord | None:
    if text == "" or text == "tt":
        return None  # pass
    if len(text) != 2:
        raise SgfInvalid(f"bad coordinate {text!r}")
    try:
        return (_LETTERS.index(text[0]), _LETTERS.index(text[1]))
    except ValueError as e:
        raise SgfInvalid(f"bad coordinate {text!r}") from e


def emit_sgf(
    size: int,
    moves: list[tuple[int, Coord | None]],
    metadata: dict[str, str] | None = None,
    handicap_stones: list[Coord] | None = None,
) -> str:
    """Serialize a move list as a single-line-per-node FF[4] game tree.

    ``moves`` holds (color, coord) pairs; coord None is a pass. Captures are
    implicit per SGF semantics.
    """
    head = f"(;FF[4]GM[1]CA[UTF-8]SZ[{size}]"
    meta = metadata or {}
    for key in sorted(meta):
        val = str(meta[key]).replace("\\", "\\\\").replace("]", "\\]")
        head += f"{key}[{val}]"
    if handicap_stones:
        head += f"HA[{len(handicap_stones)}]AB" + "".join(
            f"[{coord_to_sgf(c)}]" for c in sorted(handicap_stones))
    nodes = []
    for color, coord in moves:
        tag = "B" if color == BLACK else "W"
        nodes.append(f";{tag}[{coord_to_sgf(coord) if coord is not None else ''}]")
    return head + "\n" + "\n".join(nodes) + ("\n" if nodes else "") + ")\n"


_PROP_RE = re.compile(r"([A-Z]{1,4})((?:\[(?:\\.|[^\]])*\])+)", re.DOTALL)
_VAL_RE = re.compile(r"\[((?:\\.|[^\]])*)\]", re.DOTALL)


def parse_sgf(text: str) -> dict:
    """Read size, metadata, handicap placements, and the main-line moves.

    Returns {"size", "moves": [(color, coord-or-None)], "handicap": [...],
    "metadata": {...}}. Raises SgfInvalid on structural problems.
    """
    text = text.strip()
    if not text.startswith("(") or ";" not in text:
        raise SgfInvalid("not an SGF game tree")
    # main line only: cut at the first variation branch after the root
    depth = 0
    main = []
    for ch in text:
        if ch == "(":
            depth += 1
            if depth > 1:
                main.append(";")  # keep walking into the first branch only
                continue
        elif ch == ")":
            depth -= 1
            if depth <= 0:
                break
            continue
        elif depth >= 1:
            main.append(ch)
    nodes = [n for n in "".join(main).split(";") if n.strip()]
    if not nodes:
        raise SgfInvalid("empty game tree")

    size = 19
    moves: list[tuple[int, Coord | None]] = []
    handicap: list[Coord] = []
    metadata: dict[str, str] = {}
    for node in nodes:
        for m in _PROP_RE.finditer(node):
            ident, raw_vals = m.group(1), m.group(2)
            vals = [v.replace("\\]", "]").replace("\\\\", "\\")
                    for v in _VAL_RE.findall(raw_vals)]
            if ident == "SZ":
                try:
                    size = int(vals[0])
                except ValueError as e:
                    raise SgfInvalid(f"bad SZ value {vals[0]!r}") from e
                if not 2 <= size <= 19:
                    raise SgfInvalid(f"unsupported board size {size}")
            elif ident in ("B", "W"):
                moves.append((BLACK if ident == "B" else WHITE, sgf_to_coord(vals[0])))
            elif ident == "AB":
                handicap.extend(c for c in (sgf_to_coord(v) for v in vals) if c)
            elif ident in ("FF", "GM", "CA", "AW", "AE", "HA"):
                continue
            else:
                metadata[ident] = vals[0]

    for color, coord in moves:
        if coord is not None and not (0 <= coord[0] < size and 0 <= coord[1] < size):
            raise SgfInvalid(f"move {coord} outside {size}x{size} board")
    return {"size": size, "moves": moves, "handicap": handicap, "metadata": metadata}


def replay(size: int, moves: list[tuple[int, Coord | None]],
           handicap: list[Coord] | None = None) -> BoardState:
    """Play a move list from the empty board; raises IllegalMove on conflicts."""
    board = BoardState(size)
    for c in handicap or []:
        board.set(c, BLACK)
    for color, coord in moves:
        if coord is not None:
            play_move(board, coord, color)
    return board
