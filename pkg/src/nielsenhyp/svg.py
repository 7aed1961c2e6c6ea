"""Static SVG figures: point sets, geodesic paths and Cayley-graph edges.

Free-group points are drawn with the usual shrinking-cross layout, tree
vertices radially by depth, half-plane points in their own coordinates.
"""

import math
from collections import deque

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2")
SIZE = 600


def _word_pos(space, w):
    n = max(1, space.generator_count)
    x = y = 0.0
    r = 1.0
    for a in w:
        k = abs(a) - 1
        ang = math.pi * k / n + (math.pi if a < 0 else 0.0)
        x += r * math.cos(ang)
        y += r * math.sin(ang)
        r *= 0.48
    return x, y


def _tree_layout(space):
    B = space.backend
    root = B.vertices[0]
    depth = {root: 0}
    order = []
    q = deque([root])
    while q:
        v = q.popleft()
        order.append(v)
        for t in sorted(B.adj[v], key=str):
            if t not in depth:
                depth[t] = depth[v] + 1
                q.append(t)
    kids = {v: [] for v in order}
    for v in order[1:]:
        par = min((t for t in B.adj[v] if depth[t] == depth[v] - 1), key=str)
        kids[par].append(v)
    leaves = {}

    def count(v):
        leaves[v] = max(1, sum(count(c) for c in kids[v]))
        return leaves[v]

    count(root)
    pos = {}

    def place(v, lo, hi):
        a = 0.5 * (lo + hi)
        pos[v] = (depth[v] * math.cos(a), depth[v] * math.sin(a))
        cur = lo
        for c in kids[v]:
            span = (hi - lo) * leaves[c] / leaves[v]
            place(c, cur, cur + span)
            cur += span

    place(root, 0.0, 2 * math.pi)
    return pos


def _locator(space):
    if space.backend_kind == "tree":
        lay = _tree_layout(space)
        return lambda p: lay[p]
    if space.backend_kind == "half_plane":
        return lambda p: (p.real, -p.imag)
    return lambda p: _word_pos(space, p)


def render(space, layers=(), paths=(), title=""):
    """``layers``: (label, points); ``paths``: (label, PathSample)."""
    loc = _locator(space)
    items = []
    for k, (label, pts) in enumerate(layers):
        items.append(("pts", label, [loc(p) for p in pts], PALETTE[k % len(PALETTE)], pts))
    for k, (label, path) in enumerate(paths):
        items.append(("path", label, [loc(p) for p in path.points],
                      PALETTE[(k + len(layers)) % len(PALETTE)], path.points))
    xy = [c for it in items for c in it[2]] or [(0.0, 0.0)]
    xs, ys = [c[0] for c in xy], [c[1] for c in xy]
    x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
    span = max(x1 - x0, y1 - y0, 1e-9)
    pad = 30.0
    sc = (SIZE - 2 * pad) / span

    def P(c):
        return (pad + (c[0] - x0) * sc, pad + (c[1] - y0) * sc)

    out = ['<svg xmlns="http://www.w3.org/2000/svg" width="%d" height="%d" viewBox="0 0 %d %d">'
           % (SIZE, SIZE + 20 * len(items) + 20, SIZE, SIZE + 20 * len(items) + 20),
           '<rect width="100%" height="100%" fill="white"/>']
    if title:
        out.append('<text x="10" y="18" font-size="14">%s</text>' % _esc(title))
    for kind, label, cs, col, raw in items:
        if kind == "path":
            d = " ".join("%.3f,%.3f" % P(c) for c in cs)
            out.append('<polyline fill="none" stroke="%s" stroke-width="2" points="%s"/>' % (col, d))
        else:
            if space.is_word and space.backend_kind != "tree":
                S = set(raw)
                for p, c in zip(raw, cs):
                    for q, e in zip(raw, cs):
                        if space.sort_key(p) < space.sort_key(q) and q in S and space.dist(p, q) == 1:
                            out.append('<line x1="%.3f" y1="%.3f" x2="%.3f" y2="%.3f" stroke="%s" '
                                       'stroke-width="1"/>' % (P(c) + P(e) + (col,)))
            for c in cs:
                out.append('<circle cx="%.3f" cy="%.3f" r="3" fill="%s"/>' % (P(c) + (col,)))
    for k, (kind, label, _, col, _) in enumerate(items):
        y = SIZE + 15 + 20 * k
        out.append('<rect x="10" y="%d" width="12" height="12" fill="%s"/>' % (y - 10, col))
        out.append('<text x="28" y="%d" font-size="12">%s</text>' % (y, _esc(label)))
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _esc(s):
    return str(s).replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
