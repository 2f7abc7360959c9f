#!/usr/bin/env python3
"""Regenerates the canonical board files under boards/.

The 24-point boards are built from grid coordinates; the symmetry group is the
8 rotations/reflections of the square combined with the inner/outer ring swap.
"""
import itertools
import pathlib
import sys

FILES = "abcdefg"


def name(x, y):
    return f"{FILES[x]}{y + 1}"


def ring_points():
    pts = []
    for r in (3, 2, 1):
        for dy in (1, 0, -1):
            for dx in (-1, 0, 1):
                if dx == 0 and dy == 0:
                    continue
                pts.append((3 + dx * r, 3 + dy * r))
    # order: top row to bottom row, left to right
    return sorted(pts, key=lambda p: (-p[1], p[0]))


def standard_edges(pts, diagonals):
    s = set(pts)
    edges = set()
    for (x, y) in pts:
        r = max(abs(x - 3), abs(y - 3))
        dx, dy = (x - 3) // r if x != 3 else 0, (y - 3) // r if y != 3 else 0
        # ring neighbours
        for (nx, ny) in ((x + r, y), (x - r, y), (x, y + r), (x, y - r)):
            if (nx, ny) in s and max(abs(nx - 3), abs(ny - 3)) == r:
                edges.add(frozenset(((x, y), (nx, ny))))
        # spokes (midpoints) and diagonals (corners)
        if r > 1 and (dx == 0 or dy == 0 or diagonals):
            inner = (3 + dx * (r - 1), 3 + dy * (r - 1))
            if inner in s:
                edges.add(frozenset(((x, y), inner)))
    return edges


def mills_of(pts, edges):
    adj = {p: set() for p in pts}
    for e in edges:
        a, b = tuple(e)
        adj[a].add(b)
        adj[b].add(a)
    mills = set()
    for mid in pts:
        for a, b in itertools.combinations(sorted(adj[mid]), 2):
            if (a[0] - mid[0], a[1] - mid[1]) == (mid[0] - b[0], mid[1] - b[1]):
                mills.add(frozenset((a, mid, b)))
    return mills


def symmetries(pts):
    def d4(k):
        def f(p):
            x, y = p[0] - 3, p[1] - 3
            for _ in range(k % 4):
                x, y = -y, x
            if k >= 4:
                x = -x
            return (x + 3, y + 3)
        return f

    def swap(p):
        x, y = p[0] - 3, p[1] - 3
        r = max(abs(x), abs(y))
        nr = 4 - r
        return (x // r * nr + 3, y // r * nr + 3)

    out = []
    for use_swap in (False, True):
        for k in range(8):
            f = d4(k)
            out.append([f(swap(p)) if use_swap else f(p) for p in pts])
    return out


def emit(path, board_name, diagonals, comment):
    pts = ring_points()
    edges = standard_edges(pts, diagonals)
    mills = mills_of(pts, edges)
    order = {p: i for i, p in enumerate(pts)}
    lines = [f"# {comment}", "mills-board 1", f"name {board_name}", "", "[points]"]
    lines.append(" ".join(name(*p) for p in pts))
    lines += ["", "[layout]"]
    lines += [f"{name(*p)} {p[0]} {p[1]}" for p in pts]
    lines += ["", "[adjacency]"]
    for e in sorted(edges, key=lambda e: sorted(order[p] for p in e)):
        a, b = sorted(e, key=order.get)
        lines.append(f"{name(*a)} {name(*b)}")
    lines += ["", "[mills]"]
    for m in sorted(mills, key=lambda m: sorted(order[p] for p in m)):
        lines.append(" ".join(name(*p) for p in sorted(m, key=order.get)))
    lines += ["", "[symmetries]"]
    for perm in symmetries(pts):
        lines.append(" ".join(name(*p) for p in perm))
    path.write_text("\n".join(lines) + "\n")


if __name__ == "__main__":
    out = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else "boards")
    out.mkdir(parents=True, exist_ok=True)
    emit(out / "standard.board", "standard", False,
         "Standard Nine Men's Morris board (also used by Lasker Morris).")
    emit(out / "morabaraba.board", "morabaraba", True,
         "Morabaraba board: the standard board plus the four corner diagonals.")
