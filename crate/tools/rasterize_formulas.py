#!/usr/bin/env python3
"""Rasterize the formula corpus to PNG, the way an image-based CBT would.

Writes crates/core/tests/fixtures/raster/NN.png, one per line of
crates/core/tests/fixtures/formulas.txt. Run once; the PNGs are committed.

    python3 tools/rasterize_formulas.py

Matplotlib mathtext has no matrix environments, so matrices are laid out
cell by cell with the delimiters drawn as scaled glyphs.
"""

import re
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib import mathtext  # noqa: E402
from matplotlib.font_manager import FontProperties  # noqa: E402

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "crates/core/tests/fixtures/formulas.txt"
OUT = ROOT / "crates/core/tests/fixtures/raster"
DPI = 120
SIZE = 14
MATRIX = re.compile(r"\\begin\{([pbv]?matrix)\}(.*)\\end\{\1\}", re.S)
FENCES = {"matrix": ("", ""), "pmatrix": ("(", ")"), "bmatrix": ("[", "]"), "vmatrix": ("|", "|")}


def render_matrix(env, body, path):
    rows = [[c.strip() for c in r.split("&")] for r in body.split(r"\\") if r.strip()]
    ncols = max(len(r) for r in rows)
    cell_w, cell_h = 0.45, 0.35
    width = ncols * cell_w + 0.4
    height = len(rows) * cell_h + 0.2
    fig = plt.figure(figsize=(width, height), dpi=DPI)
    for i, row in enumerate(rows):
        for j, cell in enumerate(row):
            x = (0.2 + (j + 0.5) * cell_w) / width
            y = 1 - (0.1 + (i + 0.5) * cell_h) / height
            fig.text(x, y, f"${cell}$", ha="center", va="center", fontsize=SIZE)
    left, right = FENCES[env]
    if left:
        scale = SIZE * len(rows) * 1.3
        fig.text(0.02, 0.5, left, ha="left", va="center", fontsize=scale)
        fig.text(0.98, 0.5, right, ha="right", va="center", fontsize=scale)
    fig.savefig(path, dpi=DPI, transparent=False, bbox_inches="tight", pad_inches=0.02)
    plt.close(fig)


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    lines = [l for l in CORPUS.read_text().splitlines() if l.strip()]
    for n, formula in enumerate(lines, start=1):
        path = OUT / f"{n:02}.png"
        m = MATRIX.fullmatch(formula.strip())
        if m:
            render_matrix(m.group(1), m.group(2), path)
        else:
            mathtext.math_to_image(f"${formula}$", path, prop=FontProperties(size=SIZE), dpi=DPI, format="png")
        print(f"{path.relative_to(ROOT)}  {path.stat().st_size} bytes  {formula}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
