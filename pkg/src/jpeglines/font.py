"""Built-in 8x16 bitmap font for [A-Za-z ].

Cell rows 0-3 are the ascender zone, 4-11 the x-height zone and 12-15 the
descender zone.  Each glyph is given as (first cell row, bitmap rows); the
eighth column is always blank so neighbouring letters never touch.
"""

import numpy as np

CELL_W, CELL_H = 8, 16
ASCENDER_TOP, XHEIGHT_TOP, DESCENDER_TOP = 0, 4, 12

_X = 4  # x-height glyphs start here

_GLYPHS = {
    # x-height only
    "a": (_X, [" ####  ", "     # ", "     # ", " ##### ", "#    # ", "#    # ", "#   ## ", " ### # "]),
    "c": (_X, [" ####  ", "#    # ", "#      ", "#      ", "#      ", "#      ", "#    # ", " ####  "]),
    "e": (_X, [" ####  ", "#    # ", "#    # ", "###### ", "#      ", "#      ", "#    # ", " ####  "]),
    "m": (_X, ["### ## ", "#  #  #", "#  #  #", "#  #  #", "#  #  #", "#  #  #", "#  #  #", "#  #  #"]),
    "n": (_X, ["# ###  ", "##   # ", "#    # ", "#    # ", "#    # ", "#    # ", "#    # ", "#    # "]),
    "o": (_X, [" ####  ", "#    # ", "#    # ", "#    # ", "#    # ", "#    # ", "#    # ", " ####  "]),
    "r": (_X, ["# ###  ", "##   # ", "#      ", "#      ", "#      ", "#      ", "#      ", "#      "]),
    "s": (_X, [" ####  ", "#    # ", "#      ", " ####  ", "     # ", "     # ", "#    # ", " ####  "]),
    "u": (_X, ["#    # ", "#    # ", "#    # ", "#    # ", "#    # ", "#    # ", "#   ## ", " ### # "]),
    "v": (_X, ["#    # ", "#    # ", "#    # ", " #  #  ", " #  #  ", " #  #  ", "  ##   ", "  ##   "]),
    "w": (_X, ["#     #", "#     #", "#  #  #", "#  #  #", "#  #  #", "#  #  #", "# # # #", " #   # "]),
    "x": (_X, ["#    # ", " #  #  ", " #  #  ", "  ##   ", "  ##   ", " #  #  ", " #  #  ", "#    # "]),
    "z": (_X, ["###### ", "     # ", "    #  ", "   #   ", "  #    ", " #     ", "#      ", "###### "]),
    # dotted
    "i": (1, ["  ##   ", "  ##   ", "       "] + ["  ##   "] * 7 + [" ####  "]),
    "j": (1, ["    ## ", "    ## ", "       "] + ["    ## "] * 10 + ["#   ## ", " ####  "]),
    # ascenders
    "b": (0, ["#      "] * 4 + ["# ###  ", "##   # ", "#    # ", "#    # ", "#    # ", "#    # ", "##   # ", "# ###  "]),
    "d": (0, ["     # "] * 4 + [" ### # ", "#   ## ", "#    # ", "#    # ", "#    # ", "#    # ", "#   ## ", " ### # "]),
    "f": (0, ["   ### ", "  #    ", "  #    ", "  #    ", "#####  "] + ["  #    "] * 7),
    "h": (0, ["#      "] * 4 + ["# ###  ", "##   # "] + ["#    # "] * 6),
    "k": (0, ["#      "] * 4 + ["#    # ", "#   #  ", "#  #   ", "###    ", "#  #   ", "#   #  ", "#    # ", "#    # "]),
    "l": (0, ["  ##   "] * 11 + ["   ### "]),
    "t": (1, ["  #    ", "  #    ", "  #    ", "#####  "] + ["  #    "] * 6 + ["   ### "]),
    # descenders
    "g": (_X, [" ##### ", "#    # ", "#    # ", "#    # ", "#    # ", "#   ## ", " ### # ", "     # ",
               "     # ", "     # ", "#    # ", " ####  "]),
    "p": (_X, ["# ###  ", "##   # ", "#    # ", "#    # ", "#    # ", "#    # ", "##   # ", "# ###  "]
          + ["#      "] * 4),
    "q": (_X, [" ### # ", "#   ## ", "#    # ", "#    # ", "#    # ", "#    # ", "#   ## ", " ### # "]
          + ["     # "] * 4),
    "y": (_X, ["#    # "] * 5 + ["#   ## ", " ### # ", "     # ", "     # ", "     # ", "#    # ", " ####  "]),
    # capitals span the ascender and x-height zones
    "A": (0, ["  ##   ", " #  #  ", "#    # ", "#    # ", "#    # ", "###### "] + ["#    # "] * 6),
    "B": (0, ["#####  ", "#    # ", "#    # ", "#    # ", "#####  "] + ["#    # "] * 6 + ["#####  "]),
    "C": (0, [" ####  ", "#    # "] + ["#      "] * 8 + ["#    # ", " ####  "]),
    "D": (0, ["####   ", "#   #  "] + ["#    # "] * 8 + ["#   #  ", "####   "]),
    "E": (0, ["###### "] + ["#      "] * 4 + ["#####  "] + ["#      "] * 5 + ["###### "]),
    "F": (0, ["###### "] + ["#      "] * 4 + ["#####  "] + ["#      "] * 6),
    "G": (0, [" ####  ", "#    # "] + ["#      "] * 4 + ["#  ### ", "#    # ", "#    # ", "#    # ", "#   ## ",
                                                        " ### # "]),
    "H": (0, ["#    # "] * 5 + ["###### "] + ["#    # "] * 6),
    "I": (0, [" ##### "] + ["   #   "] * 10 + [" ##### "]),
    "J": (0, ["  #### "] + ["     # "] * 8 + ["#    # ", "#    # ", " ####  "]),
    "K": (0, ["#    # ", "#   #  ", "#  #   ", "# #    ", "##     ", "##     ", "# #    ", "#  #   ", "#   #  ",
              "#    # ", "#    # ", "#    # "]),
    "L": (0, ["#      "] * 11 + ["###### "]),
    "M": (0, ["#     #", "##   ##", "# # # #", "#  #  #"] + ["#     #"] * 8),
    "N": (0, ["#    # ", "##   # ", "##   # ", "# #  # ", "# #  # ", "#  # # ", "#  # # ", "#   ## ", "#   ## ",
              "#    # ", "#    # ", "#    # "]),
    "O": (0, [" ####  "] + ["#    # "] * 10 + [" ####  "]),
    "P": (0, ["#####  "] + ["#    # "] * 4 + ["#####  "] + ["#      "] * 6),
    "Q": (0, [" ####  "] + ["#    # "] * 8 + ["#  # # ", "#   #  ", " ### # "]),
    "R": (0, ["#####  "] + ["#    # "] * 4 + ["#####  ", "#  #   ", "#   #  ", "#   #  ", "#    # ", "#    # ",
                                               "#    # "]),
    "S": (0, [" ####  ", "#    # ", "#      ", "#      ", "#      ", " ####  ", "     # ", "     # ", "     # ",
              "     # ", "#    # ", " ####  "]),
    "T": (0, ["#######"] + ["   #   "] * 11),
    "U": (0, ["#    # "] * 11 + [" ####  "]),
    "V": (0, ["#    # "] * 6 + [" #  #  "] * 3 + ["  ##   "] * 3),
    "W": (0, ["#     #"] * 8 + ["#  #  #", "# # # #", "##   ##", "#     #"]),
    "X": (0, ["#    # ", "#    # ", " #  #  ", " #  #  ", "  ##   ", "  ##   ", "  ##   ", "  ##   ", " #  #  ",
              " #  #  ", "#    # ", "#    # "]),
    "Y": (0, ["#     #", "#     #", " #   # ", " #   # ", "  # #  "] + ["   #   "] * 7),
    "Z": (0, ["###### ", "     # ", "     # ", "    #  ", "    #  ", "   #   ", "  #    ", "  #    ", " #     ",
              "#      ", "#      ", "###### "]),
}


def _build():
    cells = {" ": np.zeros((CELL_H, CELL_W), dtype=bool)}
    for ch, (top, rows) in _GLYPHS.items():
        cell = np.zeros((CELL_H, CELL_W), dtype=bool)
        for i, row in enumerate(rows):
            cell[top + i, :len(row)] = [c == "#" for c in row]
        cells[ch] = cell
    return cells


GLYPHS = _build()
ALPHABET = "".join(sorted(GLYPHS))
DESCENDER_LETTERS = "gjpqy"
ASCENDER_LETTERS = "bdfhklt" + "ABCDEFGHIJKLMNOPQRSTUVWXYZ"


def glyph(ch: str) -> np.ndarray:
    """Boolean ink mask of one character cell."""
    try:
        return GLYPHS[ch]
    except KeyError:
        raise ValueError(f"no glyph for {ch!r}") from None


def render_text(text: str, scale: int = 1) -> np.ndarray:
    """Boolean ink mask of a text line, (16 * scale, 8 * scale * len(text))."""
    if not text:
        return np.zeros((CELL_H * scale, 0), dtype=bool)
    mask = np.concatenate([glyph(ch) for ch in text], axis=1)
    if scale > 1:
        mask = mask.repeat(scale, axis=0).repeat(scale, axis=1)
    return mask
