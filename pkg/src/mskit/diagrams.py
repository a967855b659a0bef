"""(1/p, s)-plane sweeps of classifier predicates and their SVG rendering."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Sequence, Tuple

from . import classifier as C
from .params import INF, Family, Flavor, SpaceDescriptor, _max, _min, format_number, recip
from .verdict import Status, Verdict

__all__ = [
    "PREDICATES", "QueryTemplate", "Overlay", "RegionGrid", "grid_sweep", "render_svg",
    "CANONICAL", "canonical_grid", "canonical_svg",
]

PREDICATES = ("linfty", "l1loc", "delta", "chi", "functional", "mult-algebra",
              "truncation", "haar")

WIDTH, HEIGHT = 800, 600
PLOT_X, PLOT_Y, PLOT_W, PLOT_H = 60, 50, 420, 460


@dataclass(frozen=True)
class QueryTemplate:
    """A predicate with everything fixed except (1/p, s)."""

    predicate: str
    family: Family = Family.B
    flavor: Flavor = Flavor.SUP
    q: object = Fraction(2)
    rho: object = Fraction(-1)
    n: int = 1

    def __post_init__(self):
        if self.predicate not in PREDICATES:
            raise ValueError(f"unknown predicate {self.predicate!r}; choose from {PREDICATES}")
        object.__setattr__(self, "family", Family(self.family))
        # validates rho, q and n once; s and p are placeholders
        d = SpaceDescriptor(self.family, self.flavor, 0, 1, self.q, self.rho, self.n)
        object.__setattr__(self, "flavor", d.flavor)
        object.__setattr__(self, "q", d.q)
        object.__setattr__(self, "rho", d.rho)

    @property
    def slope(self):
        return SpaceDescriptor(self.family, self.flavor, 0, 1, self.q, self.rho, self.n).slope

    def descriptor(self, s, p) -> SpaceDescriptor:
        rho = None if self.flavor is Flavor.CLASSICAL else self.rho
        return SpaceDescriptor(self.family, self.flavor, s, p, self.q, rho, self.n)

    def verdict(self, s, p) -> Verdict:
        d = self.descriptor(s, p)
        pr = self.predicate
        if pr == "linfty":
            return C.embeds(C.EmbeddingQuery(d, C.TargetSpace.linfty()))
        if pr == "l1loc":
            return C.embeds(C.EmbeddingQuery(d, C.TargetSpace.l1loc()))
        if pr == "delta":
            return C.member(C.Element.DELTA, d)
        if pr == "chi":
            return C.member(C.Element.CHI_Q, d)
        if pr == "functional":
            return C.functional_chiQ(d)
        if pr == "mult-algebra":
            return C.check_property(d, C.Property.MULTIPLICATION_ALGEBRA)
        if pr == "truncation":
            return C.check_property(d, C.Property.TRUNCATION)
        return C.check_property(d, C.Property.HAAR_BASIS)

    def title(self) -> str:
        names = {"linfty": "embedding into L∞", "l1loc": "embedding into L¹loc",
                 "delta": "δ membership", "chi": "χ_Q membership",
                 "functional": "χ_Q as a functional", "mult-algebra": "multiplication algebra",
                 "truncation": "truncation property", "haar": "Haar basis"}
        d = self.descriptor(1, 1)
        q = "q" if self.q is None else format_number(self.q)
        if d.classical:
            space = f"{self.family.value}^s_{{p,{q}}}"
        elif self.flavor is Flavor.SUB:
            space = f"Λ_{{{format_number(self.rho)}}} {self.family.value}^s_{{p,{q}}}"
        else:
            space = f"Λ^{{{format_number(self.rho)}}} {self.family.value}^s_{{p,{q}}}"
        return f"{names[self.predicate]}: {space}, n = {self.n}"


@dataclass(frozen=True)
class Overlay:
    formula: str
    params: str
    line: Callable[[object], object]  # p -> s on the breaking line

    @property
    def label(self) -> str:
        return f"{self.formula} ({self.params})"

    def at(self, x):
        return self.line(INF if x == 0 else 1 / Fraction(x))


def overlays(t: QueryTemplate) -> List[Overlay]:
    r, n, pr = t.slope, t.n, t.predicate
    rs = format_number(r)
    lin = Overlay("s = |ϱ|/p", f"|ϱ| = {rs}", lambda p: C.linfty_threshold(r, p))
    sig = Overlay("s = σ_p^|ϱ| = |ϱ|(max(1/p,1) − 1)", f"|ϱ| = {rs}",
                  lambda p: C.l1loc_threshold(r, p))
    chi = Overlay("s = min(|ϱ|,1)/p", f"|ϱ| = {rs}", lambda p: C.chi_threshold(r, p))
    fun = Overlay("s = min(|ϱ|,1)/p − 1 + σ_p^(max(|ϱ|,1)−1)", f"|ϱ| = {rs}",
                  lambda p: C.functional_threshold(r, p))
    if pr in ("linfty", "mult-algebra"):
        return [lin]
    if pr == "l1loc":
        return [sig]
    if pr == "delta":
        return [Overlay("s = |ϱ|/p − n", f"|ϱ| = {rs}, n = {n}",
                        lambda p: C.delta_threshold(r, p, n))]
    if pr == "chi":
        return [chi]
    if pr == "functional":
        return [fun]
    if pr == "truncation":
        return [sig, Overlay("s = 1 + min(|ϱ|,1)/p", f"|ϱ| = {rs}",
                             lambda p: 1 + C.chi_threshold(r, p))]
    low = Overlay("s = max(n(1/p − 1), 1/p − 1)", f"n = {n}",
                  lambda p: _max(n * (recip(p) - 1), recip(p) - 1))
    high = Overlay("s = min(1/p, |ϱ|/p, 1)", f"|ϱ| = {rs}",
                   lambda p: _min(_min(recip(p), r * recip(p)), Fraction(1)))
    return [low, high, chi, fun]


@dataclass
class RegionGrid:
    template: QueryTemplate
    inv_p_range: Tuple[Fraction, Fraction]
    s_range: Tuple[Fraction, Fraction]
    resolution: int
    xs: List[Fraction]
    ss: List[Fraction]
    cells: List[List[Status]]  # cells[i][k]: s index i (bottom up), 1/p index k
    overlays: List[Overlay] = field(default_factory=list)

    def __len__(self):
        return sum(len(row) for row in self.cells)

    def rows(self):
        for i, s in enumerate(self.ss):
            for k, x in enumerate(self.xs):
                yield x, s, self.cells[i][k]

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["inv_p", "s", "status"])
        for x, s, st in self.rows():
            wr.writerow([format_number(x), format_number(s), st.value])
        return buf.getvalue()

    def to_json(self) -> dict:
        counts: Dict[str, int] = {}
        for _, _, st in self.rows():
            counts[st.value] = counts.get(st.value, 0) + 1
        return {
            "predicate": self.template.predicate,
            "inv_p_range": [str(format_number(v)) for v in self.inv_p_range],
            "s_range": [str(format_number(v)) for v in self.s_range],
            "resolution": self.resolution,
            "counts": dict(sorted(counts.items())),
            "overlays": [o.label for o in self.overlays],
            "cells": [[st.value for st in row] for row in self.cells],
        }


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(str(x))


def grid_sweep(template: QueryTemplate, inv_p_range=(0, 2), s_range=(-1, 3),
               resolution: int = 40) -> RegionGrid:
    """Evaluate the template at the centres of a resolution × resolution grid."""
    if resolution < 8:
        raise ValueError("resolution must be at least 8 per axis")
    x0, x1 = map(_frac, inv_p_range)
    s0, s1 = map(_frac, s_range)
    if not (0 <= x0 < x1) or not s0 < s1:
        raise ValueError("ranges must be increasing and 1/p must be non-negative")
    xs = [x0 + (x1 - x0) * Fraction(2 * k + 1, 2 * resolution) for k in range(resolution)]
    ss = [s0 + (s1 - s0) * Fraction(2 * i + 1, 2 * resolution) for i in range(resolution)]
    cells = [[template.verdict(s, 1 / x).status for x in xs] for s in ss]
    return RegionGrid(template, (x0, x1), (s0, s1), resolution, xs, ss, cells,
                      overlays(template))


# ---------------------------------------------------------------------------
# SVG

_FILL = {Status.HOLDS: "#7fb3d5", Status.HOLDS_UNDER: "#d4e6f1", Status.OPEN: "url(#hatch)"}
_LINE = ("#c0392b", "#1e8449", "#7d3c98", "#b9770e")


def _f(v: float) -> str:
    return f"{v:.2f}"


def _esc(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def render_svg(grid: RegionGrid) -> str:
    x0, x1 = (float(v) for v in grid.inv_p_range)
    s0, s1 = (float(v) for v in grid.s_range)

    def px(x):
        return PLOT_X + (float(x) - x0) / (x1 - x0) * PLOT_W

    def py(s):
        return PLOT_Y + PLOT_H - (float(s) - s0) / (s1 - s0) * PLOT_H

    res = grid.resolution
    cw, ch = PLOT_W / res, PLOT_H / res
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        "<defs>",
        '<pattern id="hatch" width="6" height="6" patternUnits="userSpaceOnUse" '
        'patternTransform="rotate(45)"><rect width="6" height="6" fill="#fdebd0"/>'
        '<line x1="0" y1="0" x2="0" y2="6" stroke="#e67e22" stroke-width="2"/></pattern>',
        f'<clipPath id="plot"><rect x="{PLOT_X}" y="{PLOT_Y}" width="{PLOT_W}" '
        f'height="{PLOT_H}"/></clipPath>',
        "</defs>",
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>',
        f'<text x="{WIDTH / 2:.0f}" y="28" text-anchor="middle" font-size="15">'
        f'{_esc(grid.template.title())}</text>',
        '<g id="cells" stroke="none" shape-rendering="crispEdges">',
    ]
    for i in range(res):
        row = grid.cells[i]
        k = 0
        while k < res:
            st = row[k]
            end = k
            while end + 1 < res and row[end + 1] is st:
                end += 1
            if st in _FILL:
                out.append(f'<rect x="{_f(PLOT_X + k * cw)}" y="{_f(PLOT_Y + PLOT_H - (i + 1) * ch)}" '
                           f'width="{_f((end - k + 1) * cw)}" height="{_f(ch)}" '
                           f'fill="{_FILL[st]}" class="{st.value}"/>')
            k = end + 1
    out.append("</g>")
    # axes and ticks
    out.append(f'<rect x="{PLOT_X}" y="{PLOT_Y}" width="{PLOT_W}" height="{PLOT_H}" '
               'fill="none" stroke="#000000"/>')
    for v in _ticks(grid.inv_p_range):
        out.append(f'<line x1="{_f(px(v))}" y1="{PLOT_Y + PLOT_H}" x2="{_f(px(v))}" '
                   f'y2="{PLOT_Y + PLOT_H + 5}" stroke="#000000"/>')
        out.append(f'<text x="{_f(px(v))}" y="{PLOT_Y + PLOT_H + 18}" '
                   f'text-anchor="middle">{_esc(str(format_number(v)))}</text>')
    for v in _ticks(grid.s_range):
        out.append(f'<line x1="{PLOT_X - 5}" y1="{_f(py(v))}" x2="{PLOT_X}" '
                   f'y2="{_f(py(v))}" stroke="#000000"/>')
        out.append(f'<text x="{PLOT_X - 8}" y="{_f(py(v) + 4)}" '
                   f'text-anchor="end">{_esc(str(format_number(v)))}</text>')
    if x0 <= 0 <= x1 or s0 <= 0 <= s1:
        if s0 <= 0 <= s1:
            out.append(f'<line x1="{PLOT_X}" y1="{_f(py(0))}" x2="{PLOT_X + PLOT_W}" '
                       f'y2="{_f(py(0))}" stroke="#888888" stroke-dasharray="3,3"/>')
    out.append(f'<text x="{PLOT_X + PLOT_W / 2:.0f}" y="{PLOT_Y + PLOT_H + 38}" '
               'text-anchor="middle">1/p</text>')
    out.append(f'<text x="{PLOT_X - 45}" y="{PLOT_Y + PLOT_H / 2:.0f}" '
               'text-anchor="middle">s</text>')
    # breaking lines
    out.append('<g id="overlays" clip-path="url(#plot)" fill="none" stroke-width="2">')
    steps = 4 * res
    gx0, gx1 = grid.inv_p_range
    for idx, ov in enumerate(grid.overlays):
        pts = []
        for k in range(steps + 1):
            x = gx0 + (gx1 - gx0) * Fraction(k, steps)
            pts.append(f"{_f(px(x))},{_f(py(ov.at(x)))}")
        out.append(f'<polyline points="{" ".join(pts)}" stroke="{_LINE[idx % len(_LINE)]}"/>')
    out.append("</g>")
    # legend
    lx, ly = PLOT_X + PLOT_W + 15, PLOT_Y + 10
    out.append('<g id="legend">')
    entries = [("Holds", _FILL[Status.HOLDS]), ("Holds under conditions on q",
                                                 _FILL[Status.HOLDS_UNDER]),
               ("Open", _FILL[Status.OPEN]), ("Fails", "#ffffff")]
    for label, fill in entries:
        out.append(f'<rect x="{lx}" y="{ly}" width="14" height="14" fill="{fill}" '
                   'stroke="#000000"/>')
        out.append(f'<text x="{lx + 20}" y="{ly + 11}">{_esc(label)}</text>')
        ly += 22
    ly += 10
    for idx, ov in enumerate(grid.overlays):
        out.append(f'<line x1="{lx}" y1="{ly + 6}" x2="{lx + 14}" y2="{ly + 6}" '
                   f'stroke="{_LINE[idx % len(_LINE)]}" stroke-width="2"/>')
        out.append(f'<text x="{lx + 20}" y="{ly + 10}" font-size="11" class="formula">'
                   f'{_esc(ov.formula)}</text>')
        out.append(f'<text x="{lx + 20}" y="{ly + 25}" font-size="11">{_esc(ov.params)}</text>')
        ly += 40
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _ticks(rng) -> List[Fraction]:
    lo, hi = rng
    step = Fraction(1, 2) if hi - lo <= 4 else Fraction(1)
    v = (lo / step).__ceil__() * step
    out = []
    while v <= hi:
        out.append(v)
        v += step
    return out


# ---------------------------------------------------------------------------
# the six reference diagrams

CANONICAL: Dict[str, Tuple[QueryTemplate, tuple, tuple]] = {
    "linfty": (QueryTemplate("linfty", Family.B, Flavor.SUP, 2, Fraction(-3, 2), 3),
               (0, 2), (-1, 4)),
    "l1loc": (QueryTemplate("l1loc", Family.B, Flavor.SUP, 2, Fraction(-3, 2), 3),
              (0, 2), (-1, 3)),
    "chi_small_slope": (QueryTemplate("chi", Family.B, Flavor.SUP, 2, Fraction(-1, 2), 2),
                        (0, 2), (-1, 3)),
    "chi_large_slope": (QueryTemplate("chi", Family.B, Flavor.SUP, 2, Fraction(-2), 3),
                        (0, 2), (-1, 3)),
    "truncation": (QueryTemplate("truncation", Family.B, Flavor.SUB, 2, Fraction(-1, 2), 1),
                   (0, 2), (-1, 3)),
    "haar": (QueryTemplate("haar", Family.B, Flavor.SUP, 2, Fraction(-2), 3),
             (0, 2), (-2, 2)),
}

CANONICAL_RESOLUTION = 48


def canonical_grid(name: str) -> RegionGrid:
    if name not in CANONICAL:
        raise ValueError(f"unknown diagram {name!r}; choose from {sorted(CANONICAL)}")
    t, xr, sr = CANONICAL[name]
    return grid_sweep(t, xr, sr, CANONICAL_RESOLUTION)


def canonical_svg(name: str) -> str:
    return render_svg(canonical_grid(name))
