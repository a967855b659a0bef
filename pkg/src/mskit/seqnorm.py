"""Dyadic sequence-space quasi-norms on finite coefficient arrays.

Three norms are provided: the classical b^s_{p,q}, the sup flavor Λ^ϱ b^s_{p,q}
(one supremum over cubes Q_{J,M} outside the level sum) and the sub flavor
Λ_ϱ b^s_{p,q} (the supremum inside each level).

The supremum over J ∈ ℤ is made finite as follows.  Once a single cube
Q_{J,M} covers the whole support (or, for a support around the origin, once
the cells are those of {-1, 0}ⁿ), lowering J further keeps every inner sum
unchanged while the factor 2^{J(n+ϱ)/p} does not grow (n + ϱ >= 0), so J
below that level is never needed.  Above the top level j_max only the
coarse-cube terms of the ``FromZero`` convention survive and they decay like
2^{Jϱ/p}.  At fixed J only cubes meeting the support can contribute; a cube
that contains no entries at levels >= J is dominated by its parent.

Inner sums are taken over values sorted within each cube, so results do not
depend on the insertion order of the entries.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .params import INF, parse_number

__all__ = [
    "CoefficientArray", "GrowthReport", "CoefficientFileError", "FROM_J_PLUS",
    "FROM_ZERO", "norm_classic", "norm_sup_flavor", "norm_sub_flavor",
    "classic_level_terms", "sub_level_terms", "sup_truncated", "growth_analyze",
    "growth_series", "pow2", "lq", "dtype",
]

FROM_J_PLUS = "FromJPlus"
FROM_ZERO = "FromZero"


def dtype():
    """Floating type for level terms; MSKIT_PRECISION=double disables extended precision."""
    mode = os.environ.get("MSKIT_PRECISION", "extended").strip().lower()
    if mode in ("double", "float64", "fast", "0", "off"):
        return np.float64
    return np.longdouble


class CoefficientFileError(ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


Key = Tuple[int, int, Tuple[int, ...]]


@dataclass
class CoefficientArray:
    """Finite family λ^{j,G}_m with levels 0 <= j <= j_max.

    ``G`` is an opaque tag: 2^n tags (0 .. 2^n-1) exist at level 0 and
    2^n - 1 tags (0 .. 2^n-2) at levels j >= 1.
    """

    n: int
    j_max: int
    entries: Dict[Key, float] = field(default_factory=dict)

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 1:
            raise ValueError("n must be a positive integer")
        if not isinstance(self.j_max, int) or self.j_max < 0:
            raise ValueError("j_max must be a non-negative integer")
        raw, self.entries = dict(self.entries), {}
        for (j, g, m), v in raw.items():
            self.add(j, m, v, g)
        self._cache = {}

    def _check(self, j, g, m):
        if not (0 <= j <= self.j_max):
            raise ValueError(f"level {j} outside [0, {self.j_max}]")
        if len(m) != self.n:
            raise ValueError(f"position {m} does not have length n={self.n}")
        tags = 2 ** self.n if j == 0 else 2 ** self.n - 1
        if not (0 <= g < tags):
            raise ValueError(f"G={g} invalid at level {j} ({tags} tags)")

    def add(self, j: int, m: Sequence[int], value: float, G: int = 0) -> None:
        m = tuple(int(x) for x in m)
        j, G = int(j), int(G)
        self._check(j, G, m)
        key = (j, G, m)
        self.entries[key] = self.entries.get(key, 0.0) + float(value)
        self._cache = {}

    @classmethod
    def from_arrays(cls, n: int, j_max: int, js, Gs, ms, vs) -> "CoefficientArray":
        """Bulk constructor; repeated keys are summed like repeated ``add`` calls."""
        js = np.asarray(js, dtype=np.int64)
        Gs = np.asarray(Gs, dtype=np.int64)
        ms = np.asarray(ms, dtype=np.int64).reshape(len(js), n)
        vs = np.asarray(vs, dtype=np.float64)
        arr = cls(n, j_max)
        if len(js) == 0:
            return arr
        if js.min() < 0 or js.max() > j_max:
            raise ValueError(f"levels outside [0, {j_max}]")
        tags = np.where(js == 0, 2 ** n, 2 ** n - 1)
        if (Gs < 0).any() or (Gs >= tags).any():
            raise ValueError("G tag outside the per-level range")
        ent = arr.entries
        for j, g, m, v in zip(js.tolist(), Gs.tolist(), map(tuple, ms.tolist()), vs.tolist()):
            key = (j, g, m)
            ent[key] = ent.get(key, 0.0) + v
        return arr

    def __len__(self):
        return len(self.entries)

    def levels(self) -> List[int]:
        return sorted({j for (j, _, _) in self.entries})

    def copy_with(self, entries: Dict[Key, float], j_max: Optional[int] = None) -> "CoefficientArray":
        return CoefficientArray(self.n, self.j_max if j_max is None else j_max, entries)

    def truncated(self, top: int) -> "CoefficientArray":
        return self.copy_with({k: v for k, v in self.entries.items() if k[0] <= top}, top)

    def translated(self, shift: Sequence[int]) -> "CoefficientArray":
        """Move the array by the integer vector ``shift`` of ℝⁿ (level j cells by shift·2^j)."""
        shift = tuple(int(x) for x in shift)
        return self.copy_with({(j, g, tuple(a + (b << j) for a, b in zip(m, shift))): v
                               for (j, g, m), v in self.entries.items()})

    def covering_level(self) -> int:
        """Level below which coarser cubes no longer regroup the support."""
        return _Lattice.covering(*self._arrays()[:2]) if self.entries else 0

    def scaled(self, factor) -> "CoefficientArray":
        return self.copy_with({k: factor * v for k, v in self.entries.items()})

    # -- arrays -----------------------------------------------------------
    def _arrays(self):
        c = self._cache.get("arrays")
        if c is None:
            keys = sorted(self.entries)
            js = np.array([k[0] for k in keys], dtype=np.int64)
            ms = np.array([k[2] for k in keys], dtype=np.int64).reshape(len(keys), self.n)
            vs = np.array([abs(self.entries[k]) for k in keys], dtype=np.float64)
            c = self._cache["arrays"] = (js, ms, vs)
        return c

    # -- serialization ----------------------------------------------------
    def to_jsonl(self) -> str:
        out = [json.dumps({"n": self.n, "j_max": self.j_max})]
        for (j, g, m), v in sorted(self.entries.items()):
            out.append(json.dumps({"j": j, "G": g, "m": list(m), "v": v}))
        return "\n".join(out) + "\n"

    @classmethod
    def from_jsonl(cls, text: str) -> "CoefficientArray":
        lines = text.splitlines()
        arr = None
        for no, line in enumerate(lines, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CoefficientFileError(f"invalid JSON ({exc.msg})", no) from None
            if not isinstance(obj, dict):
                raise CoefficientFileError("expected a JSON object", no)
            if arr is None:
                if "n" not in obj or "j_max" not in obj:
                    raise CoefficientFileError("header {n, j_max} expected", no)
                try:
                    arr = cls(int(obj["n"]), int(obj["j_max"]))
                except (TypeError, ValueError) as exc:
                    raise CoefficientFileError(str(exc), no) from None
                continue
            try:
                arr.add(obj["j"], obj["m"], float(obj["v"]), obj.get("G", 0))
            except KeyError as exc:
                raise CoefficientFileError(f"missing field {exc.args[0]!r}", no) from None
            except (TypeError, ValueError) as exc:
                raise CoefficientFileError(str(exc), no) from None
        if arr is None:
            raise CoefficientFileError("empty coefficient file", max(len(lines), 1))
        return arr

    @classmethod
    def load(cls, path) -> "CoefficientArray":
        with open(path, encoding="utf-8") as fh:
            return cls.from_jsonl(fh.read())

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_jsonl())


# ---------------------------------------------------------------------------
# numeric primitives

def pow2(x, dt=None):
    """2^x with the integer part of x applied exactly through ldexp."""
    dt = dt or dtype()
    x = Fraction(x)
    k = math.floor(x)
    frac = x - k
    f = np.exp2(dt(frac.numerator) / dt(frac.denominator))
    return dt(np.ldexp(f, k))


def _pow(x: np.ndarray, e) -> np.ndarray:
    """x**e for e given as Fraction/float, in the array's precision."""
    if isinstance(e, Fraction):
        if e == 1:
            return x.copy()
        e = x.dtype.type(e.numerator) / x.dtype.type(e.denominator)
    return np.power(x, x.dtype.type(e))


def _inv(p):
    return Fraction(0) if p is INF else (1 / p)


def lq(values: np.ndarray, q) -> np.ndarray:
    """ℓ_q quasi-norm along the last axis, summed left to right."""
    values = np.asarray(values)
    if values.shape[-1] == 0:
        return np.zeros(values.shape[:-1], dtype=values.dtype)
    return _lq_prefix(values, q)[..., -1]


def _lq_prefix(values: np.ndarray, q) -> np.ndarray:
    """ℓ_q of every prefix along the last axis.

    Sequential sums without rescaling: termwise smaller inputs can never give a
    larger result after rounding, and dyadic data stays exact.  The value is
    clamped to max x <= ‖x‖_q <= k^{1/q} max x (k nonzero terms), so a single
    nonzero term comes back unchanged instead of through (x^q)^{1/q}; both
    bounds are monotone in the inputs, so the clamp keeps that property.
    """
    top = np.maximum.accumulate(values, axis=-1)
    if q is INF:
        return top
    k = np.cumsum(values > 0, axis=-1).astype(values.dtype)
    raw = _pow(np.cumsum(_pow(values, q), axis=-1), 1 / q)
    return np.maximum(np.minimum(raw, _pow(k, 1 / q) * top), top)


def _group_reduce(keys: np.ndarray, vals: np.ndarray, use_max: bool):
    """Sum (or max) of vals per key; values are sorted inside each group first."""
    if len(keys) == 0:
        return keys, vals
    order = np.lexsort((vals, keys))
    k, v = keys[order], vals[order]
    starts = np.flatnonzero(np.r_[True, k[1:] != k[:-1]])
    red = np.maximum.reduceat(v, starts) if use_max else np.add.reduceat(v, starts)
    return k[starts], red


def _encode(cells: np.ndarray, lo: np.ndarray, span: np.ndarray) -> np.ndarray:
    key = np.zeros(len(cells), dtype=np.int64)
    for i in range(cells.shape[1]):
        key = key * span[i] + (cells[:, i] - lo[i])
    return key


def _box(*cell_arrays):
    allc = np.concatenate([c for c in cell_arrays if len(c)], axis=0)
    lo = allc.min(axis=0)
    span = allc.max(axis=0) - lo + 1
    if float(np.prod(span.astype(np.float64))) >= 2.0 ** 62:
        raise ValueError("coefficient support too large to index")
    return lo, span


def _shift(m: np.ndarray, by) -> np.ndarray:
    """Cell coordinates one or more levels coarser (floor division by 2^by)."""
    return np.right_shift(m, np.asarray(by, dtype=np.int64).reshape(-1, 1))


# ---------------------------------------------------------------------------
# lattice of cube sums

class _Lattice:
    """Per-level p-th roots of Σ|λ|^p over every candidate cube Q_{J,M}.

    Each block holds (J, distinct rows of roots, column maxima of the roots
    over contained cubes only).
    """

    def __init__(self, a: CoefficientArray, p, ancestors: bool):
        dt = dtype()
        js, ms, vs = a._arrays()
        self.n, self.L = a.n, a.j_max + 1
        self.blocks = []
        if len(js) == 0:
            self.J_low = 0
            return
        pv = _pow(vs.astype(dt), p) if p is not INF else vs.astype(dt)
        self.J_low = self.covering(js, ms)
        own = None
        if ancestors:
            # own-cell sums at every level, keyed per level for ancestor lookups
            lo, span = _box(ms)
            own = {}
            for j in np.unique(js):
                sel = js == j
                k, s = _group_reduce(_encode(ms[sel], lo, span), pv[sel], False)
                own[int(j)] = (k, s)
            self._lo, self._span = lo, span
        for J in range(self.J_low, a.j_max + 1):
            sel = js >= J
            if not sel.any():
                continue
            cells = _shift(ms[sel], js[sel] - J)
            lo, span = _box(cells)
            ck = _encode(cells, lo, span)
            ucell, first, inv = np.unique(ck, return_index=True, return_inverse=True)
            level = js[sel]
            gk, gs = _group_reduce(inv.astype(np.int64) * self.L + level, pv[sel], False)
            mat = np.zeros((len(ucell), self.L), dtype=dt)
            mat[gk // self.L, gk % self.L] = gs
            anc = None
            if ancestors and J > 0:
                # look up the coarser ancestors of one representative per cube
                rep = cells[first]
                anc = np.zeros((len(ucell), self.L), dtype=dt)
                for j, (k, s) in own.items():
                    if j >= J:
                        continue
                    a_cells = _shift(rep, np.full(len(rep), J - j))
                    inside = np.all((a_cells >= self._lo) &
                                    (a_cells < self._lo + self._span), axis=1)
                    akey = _encode(np.where(inside[:, None], a_cells, self._lo),
                                   self._lo, self._span)
                    pos = np.searchsorted(k, akey)
                    pos = np.minimum(pos, len(k) - 1)
                    hit = inside & (k[pos] == akey)
                    frac = np.ldexp(dt(1), (j - J) * self.n)
                    anc[hit, j] = s[pos[hit]] * frac
            sums = mat if anc is None else mat + anc
            # identical rows give identical values, keep one of each
            roots = np.unique(_pow(sums, 1 / p), axis=0)
            self.blocks.append((J, roots, _pow(mat.max(axis=0), 1 / p)))


    @staticmethod
    def covering(js: np.ndarray, ms: np.ndarray) -> int:
        # stop once coarsening no longer merges cells: one cell left, or every
        # cell already sits next to the origin (a support meeting several
        # orthants is never inside a single dyadic cube)
        J = int(js.min())
        while True:
            cells = _shift(ms, js - J)
            if len(np.unique(cells, axis=0)) == 1 or ((cells >= -1) & (cells <= 0)).all():
                return J
            J -= 1


def _lattice(a: CoefficientArray, p, ancestors: bool) -> _Lattice:
    key = ("lattice", p, ancestors, dtype())
    lat = a._cache.get(key)
    if lat is None:
        lat = a._cache[key] = _Lattice(a, p, ancestors)
    return lat


def _check_space(s, p, q):
    s, p, q = parse_number(s), parse_number(p), parse_number(q)
    if p is not INF and p <= 0:
        raise ValueError("p > 0 required")
    if q is not INF and q <= 0:
        raise ValueError("q > 0 required")
    return s, p, q


def _check_rho(rho, n):
    rho = parse_number(rho)
    if rho < -n or rho > 0:
        raise ValueError(f"rho must lie in [-n, 0] (rho={rho}, n={n})")
    return rho


def _level_weights(L, s, p, n, dt):
    e = s - n * _inv(p)
    return np.array([pow2(j * e, dt) for j in range(L)], dtype=dt)


# ---------------------------------------------------------------------------
# norms

def classic_level_terms(a: CoefficientArray, s, p) -> np.ndarray:
    """2^{j(s-n/p)} (Σ_{m,G} |λ|^p)^{1/p} for j = 0 .. j_max."""
    s, p, _ = _check_space(s, p, 1)
    dt = dtype()
    js, ms, vs = a._arrays()
    inner = np.zeros(a.j_max + 1, dtype=dt)
    if len(js):
        if p is INF:
            k, r = _group_reduce(js, vs.astype(dt), True)
            inner[k] = r
        else:
            k, r = _group_reduce(js, _pow(vs.astype(dt), p), False)
            inner[k] = _pow(r, 1 / p)
    return _level_weights(a.j_max + 1, s, p, a.n, dt) * inner


def norm_classic(a: CoefficientArray, s, p, q) -> float:
    s, p, q = _check_space(s, p, q)
    return float(lq(classic_level_terms(a, s, p), q))


def sub_level_terms(a: CoefficientArray, s, p, rho) -> np.ndarray:
    """Level terms 2^{j(s-n/p)} sup_{J,M} 2^{J(n+ϱ)/p} (Σ_{Q_{j,m} ⊂ Q_{J,M}} |λ|^p)^{1/p}."""
    s, p, _ = _check_space(s, p, 1)
    if p is INF:
        raise ValueError("Morrey sequence norms need p < inf")
    rho = _check_rho(rho, a.n)
    dt = dtype()
    lat = _lattice(a, p, False)
    inner = np.zeros(a.j_max + 1, dtype=dt)
    g = (a.n + rho) / p
    for J, _, colmax in lat.blocks:
        cand = pow2(J * g, dt) * colmax
        inner = np.maximum(inner, cand)
    return _level_weights(a.j_max + 1, s, p, a.n, dt) * inner


def norm_sub_flavor(a: CoefficientArray, s, p, q, rho) -> float:
    s, p, q = _check_space(s, p, q)
    return float(lq(sub_level_terms(a, s, p, rho), q))


def sup_truncated(a: CoefficientArray, s, p, q, rho, convention: str = FROM_J_PLUS) -> np.ndarray:
    """Sup-flavor value of the array truncated at each level K = 0 .. j_max."""
    s, p, q = _check_space(s, p, q)
    if p is INF:
        raise ValueError("Morrey sequence norms need p < inf")
    rho = _check_rho(rho, a.n)
    if convention not in (FROM_J_PLUS, FROM_ZERO):
        raise ValueError(f"unknown convention {convention!r}")
    dt = dtype()
    L = a.j_max + 1
    out = np.zeros(L, dtype=dt)
    lat = _lattice(a, p, convention == FROM_ZERO)
    w = _level_weights(L, s, p, a.n, dt)
    g = (a.n + rho) / p
    for J, roots, _ in lat.blocks:
        x = w * (pow2(J * g, dt) * roots)
        pref = _lq_prefix(x, q).max(axis=0)
        start = max(J, 0)
        out[start:] = np.maximum(out[start:], pref[start:])
    return out


def norm_sup_flavor(a: CoefficientArray, s, p, q, rho, convention: str = FROM_J_PLUS) -> float:
    vals = sup_truncated(a, s, p, q, rho, convention)
    return float(vals[-1]) if len(vals) else 0.0


# ---------------------------------------------------------------------------
# growth analysis

@dataclass
class GrowthReport:
    per_level: List[float]
    fitted_rate: float
    verdict: str
    r_squared: float
    cumulative: List[float] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["level", "term", "cumulative"])
        cum = self.cumulative or [float("nan")] * len(self.per_level)
        for j, (t, c) in enumerate(zip(self.per_level, cum)):
            wr.writerow([j, repr(float(t)), repr(float(c))])
        return buf.getvalue()

    def summary(self) -> str:
        return (f"# fitted_rate={self.fitted_rate:.6g} r_squared={self.r_squared:.6g} "
                f"verdict={self.verdict}")


def growth_analyze(partials: Sequence[float], rate_tolerance: float = 0.02,
                   fit_floor: float = 0.98, cumulative: Optional[Sequence[float]] = None
                   ) -> GrowthReport:
    """Fit log2(term) against the level over the top ⌈j_max/2⌉ levels."""
    terms = [float(t) for t in partials]
    cum = [float(c) for c in cumulative] if cumulative is not None else []
    if len(terms) < 6:
        return GrowthReport(terms, float("nan"), "Inconclusive", 0.0, cum)
    j_max = len(terms) - 1
    k = math.ceil(j_max / 2)
    idx = list(range(len(terms) - k, len(terms)))
    window = [terms[i] for i in idx]
    # a truncated sup that has stopped moving gives exact zeros at the top
    if all(t == 0 for t in window) or all(t == 0 for t in window[-3:]):
        return GrowthReport(terms, float("-inf"), "Finite", 1.0, cum)
    pts = [(i, math.log2(terms[i])) for i in idx if terms[i] > 0]
    if len(pts) < 3:
        return GrowthReport(terms, float("nan"), "Inconclusive", 0.0, cum)
    x = np.array([p[0] for p in pts], dtype=np.float64)
    y = np.array([p[1] for p in pts], dtype=np.float64)
    slope, icpt = np.polyfit(x, y, 1)
    res = y - (slope * x + icpt)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot <= 1e-24 else max(0.0, 1.0 - float((res ** 2).sum()) / ss_tot)
    slope = float(slope)
    if slope < -rate_tolerance:
        verdict = "Finite"
    elif slope > rate_tolerance and r2 >= fit_floor:
        verdict = "Divergent"
    else:
        verdict = "Inconclusive"
    return GrowthReport(terms, slope, verdict, r2, cum)


def growth_series(a: CoefficientArray, s, p, q, rho=None, flavor: str = "Sub",
                  convention: str = FROM_J_PLUS) -> Tuple[np.ndarray, np.ndarray]:
    """Per-level terms and cumulative truncated norms for one flavor.

    For the classical and sub flavors the terms are the level contributions;
    for the sup flavor they are the increments of the truncated value.
    """
    flavor = flavor.capitalize()
    q = parse_number(q)
    if flavor == "Sup":
        cum = sup_truncated(a, s, p, q, rho, convention)
        terms = np.diff(np.r_[np.zeros(1, dtype=cum.dtype), cum])
        return terms, cum
    if flavor == "Sub":
        terms = sub_level_terms(a, s, p, rho)
    elif flavor == "Classical":
        terms = classic_level_terms(a, s, p)
    else:
        raise ValueError(f"unknown flavor {flavor!r}")
    return terms, _lq_prefix(terms[None, :], q)[0] if len(terms) else terms
