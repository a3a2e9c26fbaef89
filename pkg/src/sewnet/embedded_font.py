"""Built-in 8x8 ASCII bitmap face.

Original pixel art, authored for this project so English rendering needs no
font files on disk. Each glyph is 8 rows of 8 columns, '#' = ink, '.' = blank,
rows joined with '|'. Baseline sits on row 6; row 7 carries descenders only.
"""

from __future__ import annotations

# 0x20..0x7E. Every glyph except space has at least one ink pixel (tests rely
# on any printable token leaving a mark in its cell).
GLYPHS_8X8 = {
    " ": "........|........|........|........|........|........|........|........",
    "!": "..#.....|..#.....|..#.....|..#.....|..#.....|........|..#.....|........",
    '"': ".#.#....|.#.#....|........|........|........|........|........|........",
    "#": ".#.#....|#####...|.#.#....|.#.#....|.#.#....|#####...|.#.#....|........",
    "$": "..#.....|.####...|#.......|.###....|....#...|####....|..#.....|........",
    "%": "##...#..|##..#...|...#....|..#.....|.#......|#..##...|#...##..|........",
    "&": ".##.....|#..#....|#..#....|.##.....|#..#.#..|#...#...|.###.#..|........",
    "'": "..#.....|..#.....|........|........|........|........|........|........",
    "(": "...#....|..#.....|.#......|.#......|.#......|..#.....|...#....|........",
    ")": ".#......|..#.....|...#....|...#....|...#....|..#.....|.#......|........",
    "*": "........|..#.....|#.#.#...|.###....|#.#.#...|..#.....|........|........",
    "+": "........|..#.....|..#.....|#####...|..#.....|..#.....|........|........",
    ",": "........|........|........|........|........|..##....|..#.....|.#......",
    "-": "........|........|........|#####...|........|........|........|........",
    ".": "........|........|........|........|........|..##....|..##....|........",
    "/": "....#...|....#...|...#....|..#.....|..#.....|.#......|#.......|........",
    "0": ".###....|#...#...|#..##...|#.#.#...|##..#...|#...#...|.###....|........",
    "1": "..#.....|.##.....|..#.....|..#.....|..#.....|..#.....|.###....|........",
    "2": ".###....|#...#...|....#...|...#....|..#.....|.#......|#####...|........",
    "3": ".###....|#...#...|....#...|..##....|....#...|#...#...|.###....|........",
    "4": "...#....|..##....|.#.#....|#..#....|#####...|...#....|...#....|........",
    "5": "#####...|#.......|####....|....#...|....#...|#...#...|.###....|........",
    "6": ".###....|#.......|#.......|####....|#...#...|#...#...|.###....|........",
    "7": "#####...|....#...|...#....|..#.....|..#.....|..#.....|..#.....|........",
    "8": ".###....|#...#...|#...#...|.###....|#...#...|#...#...|.###....|........",
    "9": ".###....|#...#...|#...#...|.####...|....#...|....#...|.###....|........",
    ":": "........|..##....|..##....|........|..##....|..##....|........|........",
    ";": "........|..##....|..##....|........|..##....|..#.....|.#......|........",
    "<": "....#...|...#....|..#.....|.#......|..#.....|...#....|....#...|........",
    "=": "........|........|#####...|........|#####...|........|........|........",
    ">": "#.......|.#......|..#.....|...#....|..#.....|.#......|#.......|........",
    "?": ".###....|#...#...|....#...|...#....|..#.....|........|..#.....|........",
    "@": ".###....|#...#...|#.###...|#.#.#...|#.###...|#.......|.###....|........",
    "A": ".###....|#...#...|#...#...|#####...|#...#...|#...#...|#...#...|........",
    "B": "####....|#...#...|#...#...|####....|#...#...|#...#...|####....|........",
    "C": ".###....|#...#...|#.......|#.......|#.......|#...#...|.###....|........",
    "D": "####....|#...#...|#...#...|#...#...|#...#...|#...#...|####....|........",
    "E": "#####...|#.......|#.......|####....|#.......|#.......|#####...|........",
    "F": "#####...|#.......|#.......|####....|#.......|#.......|#.......|........",
    "G": ".###....|#...#...|#.......|#.###...|#...#...|#...#...|.###....|........",
    "H": "#...#...|#...#...|#...#...|#####...|#...#...|#...#...|#...#...|........",
    "I": ".###....|..#.....|..#.....|..#.....|..#.....|..#.....|.###....|........",
    "J": "..###...|...#....|...#....|...#....|...#....|#..#....|.##.....|........",
    "K": "#...#...|#..#....|#.#.....|##......|#.#.....|#..#....|#...#...|........",
    "L": "#.......|#.......|#.......|#.......|#.......|#.......|#####...|........",
    "M": "#...#...|##.##...|#.#.#...|#.#.#...|#...#...|#...#...|#...#...|........",
    "N": "#...#...|##..#...|#.#.#...|#..##...|#...#...|#...#...|#...#...|........",
    "O": ".###....|#...#...|#...#...|#...#...|#...#...|#...#...|.###....|........",
    "P": "####....|#...#...|#...#...|####....|#.......|#.......|#.......|........",
    "Q": ".###....|#...#...|#...#...|#...#...|#.#.#...|#..#....|.##.#...|........",
    "R": "####....|#...#...|#...#...|####....|#.#.....|#..#....|#...#...|........",
    "S": ".####...|#.......|#.......|.###....|....#...|....#...|####....|........",
    "T": "#####...|..#.....|..#.....|..#.....|..#.....|..#.....|..#.....|........",
    "U": "#...#...|#...#...|#...#...|#...#...|#...#...|#...#...|.###....|........",
    "V": "#...#...|#...#...|#...#...|#...#...|#...#...|.#.#....|..#.....|........",
    "W": "#...#...|#...#...|#...#...|#.#.#...|#.#.#...|##.##...|#...#...|........",
    "X": "#...#...|#...#...|.#.#....|..#.....|.#.#....|#...#...|#...#...|........",
    "Y": "#...#...|#...#...|.#.#....|..#.....|..#.....|..#.....|..#.....|........",
    "Z": "#####...|....#...|...#....|..#.....|.#......|#.......|#####...|........",
    "[": "..###...|..#.....|..#.....|..#.....|..#.....|..#.....|..###...|........",
    "\\": "#.......|#.......|.#......|..#.....|..#.....|...#....|....#...|........",
    "]": ".###....|...#....|...#....|...#....|...#....|...#....|.###....|........",
    "^": "..#.....|.#.#....|#...#...|........|........|........|........|........",
    "_": "........|........|........|........|........|........|........|#####...",
    "`": ".#......|..#.....|........|........|........|........|........|........",
    "a": "........|........|.###....|....#...|.####...|#...#...|.####...|........",
    "b": "#.......|#.......|####....|#...#...|#...#...|#...#...|####....|........",
    "c": "........|........|.###....|#.......|#.......|#.......|.###....|........",
    "d": "....#...|....#...|.####...|#...#...|#...#...|#...#...|.####...|........",
    "e": "........|........|.###....|#...#...|#####...|#.......|.###....|........",
    "f": "..##....|.#......|####....|.#......|.#......|.#......|.#......|........",
    "g": "........|........|.####...|#...#...|#...#...|.####...|....#...|.###....",
    "h": "#.......|#.......|####....|#...#...|#...#...|#...#...|#...#...|........",
    "i": "..#.....|........|.##.....|..#.....|..#.....|..#.....|.###....|........",
    "j": "...#....|........|..##....|...#....|...#....|...#....|#..#....|.##.....",
    "k": "#.......|#.......|#..#....|#.#.....|##......|#.#.....|#..#....|........",
    "l": ".##.....|..#.....|..#.....|..#.....|..#.....|..#.....|.###....|........",
    "m": "........|........|##.#....|#.#.#...|#.#.#...|#.#.#...|#.#.#...|........",
    "n": "........|........|####....|#...#...|#...#...|#...#...|#...#...|........",
    "o": "........|........|.###....|#...#...|#...#...|#...#...|.###....|........",
    "p": "........|........|####....|#...#...|#...#...|####....|#.......|#.......",
    "q": "........|........|.####...|#...#...|#...#...|.####...|....#...|....#...",
    "r": "........|........|#.##....|##......|#.......|#.......|#.......|........",
    "s": "........|........|.####...|#.......|.###....|....#...|####....|........",
    "t": ".#......|.#......|####....|.#......|.#......|.#......|..##....|........",
    "u": "........|........|#...#...|#...#...|#...#...|#...#...|.####...|........",
    "v": "........|........|#...#...|#...#...|#...#...|.#.#....|..#.....|........",
    "w": "........|........|#...#...|#.#.#...|#.#.#...|#.#.#...|.#.#....|........",
    "x": "........|........|#...#...|.#.#....|..#.....|.#.#....|#...#...|........",
    "y": "........|........|#...#...|#...#...|#...#...|.####...|....#...|.###....",
    "z": "........|........|#####...|...#....|..#.....|.#......|#####...|........",
    "{": "...##...|..#.....|..#.....|.#......|..#.....|..#.....|...##...|........",
    "|": "..#.....|..#.....|..#.....|..#.....|..#.....|..#.....|..#.....|........",
    "}": "##......|..#.....|..#.....|...#....|..#.....|..#.....|##......|........",
    "~": "........|........|.##..#..|#..##...|........|........|........|........",
}
