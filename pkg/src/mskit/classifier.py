"""Theorem-backed decisions for Morrey smoothness spaces.

Every public function returns a :class:`~mskit.verdict.Verdict` (or a small
result object carrying one).  A descriptor may name the same space as several
other descriptors (the F flavors agree, Λ_ϱ B_{p,∞} = Λ^ϱ B_{p,∞} and
Λ^ϱ B_{p,p} = Λ^ϱ F_{p,p}); each rule is evaluated on all of these names and
the first settled answer wins, so a verdict never depends on which name the
caller picked.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Callable, Optional

from .params import (
    INF, TOLERANCE, Family, Flavor, HolderZygmund, SpaceDescriptor, cmp,
    diff_dimension, equivalents, format_number, is_exact, parse_number, recip,
    sigma, _max, _min,
)
from .verdict import Verdict, fails, holds, holds_under, open_

__all__ = [
    "Ground", "Mode", "Element", "Property", "TargetKind", "TargetSpace",
    "EmbeddingQuery", "CompactnessExponents", "TraceResult", "Envelope",
    "InterpolationMethod", "embeds", "compactness_exponents", "member",
    "functional_chiQ", "property", "check_property", "trace", "interpolate", "growth_envelope",
    "spaces_equal", "linfty_threshold", "l1loc_threshold", "chi_threshold",
    "delta_threshold", "functional_threshold",
]


class Ground(str, enum.Enum):
    RN = "RnWhole"
    DOMAIN = "BoundedDomain"


class Mode(str, enum.Enum):
    CONTINUOUS = "Continuous"
    COMPACT = "Compact"


class Element(str, enum.Enum):
    DELTA = "Delta"
    CHI_Q = "ChiQ"


class Property(str, enum.Enum):
    MULTIPLICATION_ALGEBRA = "MultiplicationAlgebra"
    TRUNCATION = "Truncation"
    HAAR_BASIS = "HaarBasis"
    FATOU = "Fatou"
    SMOOTH_MULTIPLIER = "SmoothMultiplier"
    DIFFEOMORPHISM = "Diffeomorphism"
    HALF_SPACE_EXTENSION = "HalfSpaceExtension"


class TargetKind(str, enum.Enum):
    SPACE = "Space"
    LINFTY = "Linfty"
    CONTINUOUS_C = "ContinuousC"
    L1LOC = "L1loc"
    LR = "Lr"
    BMO = "Bmo"
    HOLDER_ZYGMUND = "HolderZygmund"


@dataclass(frozen=True)
class TargetSpace:
    kind: TargetKind
    space: Optional[SpaceDescriptor] = None
    r: object = None
    smoothness: object = None

    def __post_init__(self):
        kind = TargetKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is TargetKind.SPACE and not isinstance(self.space, SpaceDescriptor):
            raise ValueError("Space targets need a SpaceDescriptor")
        if kind is TargetKind.LR:
            if self.r is None:
                raise ValueError("Lr targets need r")
            r = parse_number(self.r)
            if r is not INF and r <= 0:
                raise ValueError(f"r > 0 violated (r={r})")
            object.__setattr__(self, "r", r)
        if kind is TargetKind.HOLDER_ZYGMUND:
            if self.smoothness is None:
                raise ValueError("HolderZygmund targets need a smoothness")
            object.__setattr__(self, "smoothness", parse_number(self.smoothness))

    @classmethod
    def of(cls, d: SpaceDescriptor) -> "TargetSpace":
        return cls(TargetKind.SPACE, space=d)

    @classmethod
    def linfty(cls) -> "TargetSpace":
        return cls(TargetKind.LINFTY)

    @classmethod
    def continuous(cls) -> "TargetSpace":
        return cls(TargetKind.CONTINUOUS_C)

    @classmethod
    def l1loc(cls) -> "TargetSpace":
        return cls(TargetKind.L1LOC)

    @classmethod
    def lr(cls, r) -> "TargetSpace":
        return cls(TargetKind.LR, r=r)

    @classmethod
    def bmo(cls) -> "TargetSpace":
        return cls(TargetKind.BMO)

    @classmethod
    def holder(cls, smoothness) -> "TargetSpace":
        return cls(TargetKind.HOLDER_ZYGMUND, smoothness=smoothness)


@dataclass(frozen=True)
class EmbeddingQuery:
    source: SpaceDescriptor
    target: TargetSpace
    ground: Ground = Ground.RN
    mode: Mode = Mode.CONTINUOUS

    def __post_init__(self):
        object.__setattr__(self, "ground", Ground(self.ground))
        object.__setattr__(self, "mode", Mode(self.mode))
        if isinstance(self.target, SpaceDescriptor):
            object.__setattr__(self, "target", TargetSpace.of(self.target))


# ---------------------------------------------------------------------------
# small helpers

_SUB_B, _SUP_B, _F, _CLASSICAL, _ZERO = "sub_b", "sup_b", "f", "classical", "zero"


def _fmt(x) -> str:
    return str(format_number(x))


def _kind(d: SpaceDescriptor) -> str:
    if d.classical:
        return _CLASSICAL
    if d.zero_clan:
        return _ZERO
    if d.family is Family.F:
        return _F
    return _SUB_B if d.flavor is Flavor.SUB else _SUP_B


def _effective(d: SpaceDescriptor) -> SpaceDescriptor:
    """Rewrite Λ^ϱ with ϱ > 0 as C^{s+ϱ/p} = B^{s+ϱ/p}_{∞,∞} and ϱ = -n as classical."""
    if d.flavor is Flavor.SUP and cmp(d.rho, 0) > 0:
        return SpaceDescriptor(Family.B, Flavor.CLASSICAL, d.s + d.rho * recip(d.p),
                               INF, INF, None, d.n)
    if d.flavor is not Flavor.CLASSICAL and d.classical:
        return replace(d, flavor=Flavor.CLASSICAL)
    return d


def _has_float(*ds) -> bool:
    for d in ds:
        if d is None:
            continue
        for x in (d.s, d.p, d.q, d.rho):
            if x is not None and not is_exact(x):
                return True
    return False


_FLOAT_NOTE = f"float parameters compared within a tolerance band of {TOLERANCE:g}"


def _le(a, b, name_a: str, name_b: str, cite: str, note: str = "") -> Verdict:
    """Holds iff a <= b; unspecified operands turn into a condition."""
    if a is None or b is None:
        lhs = name_a if a is None else _fmt(a)
        rhs = name_b if b is None else _fmt(b)
        return holds_under([f"{lhs} <= {rhs}"], cite, note)
    return holds(cite, note) if cmp(a, b) <= 0 else fails(cite, note)


def _q_le(q, bound, cite: str, note: str = "") -> Verdict:
    return _le(q, bound, "q", "", cite, note)


def _q_inf(q, cite: str, note: str = "") -> Verdict:
    if q is None:
        return holds_under(["q = inf"], cite, note)
    return holds(cite, note) if q is INF else fails(cite, note)


def _merge(d: SpaceDescriptor, rule: Callable[[SpaceDescriptor], Verdict]) -> Verdict:
    first = None
    for e in equivalents(d):
        v = rule(e)
        if not v.open:
            return v
        if first is None:
            first = v
    return first


def _merge2(a, b, rule) -> Verdict:
    first = None
    for x in equivalents(a):
        for y in equivalents(b):
            v = rule(x, y)
            if not v.open:
                return v
            if first is None:
                first = v
    return first


def _finish(v: Verdict, *ds) -> Verdict:
    return v.with_note(_FLOAT_NOTE) if _has_float(*ds) else v


def _zero_open(what: str) -> Verdict:
    return open_("Def 2.11(iii)", f"{what} is not settled for the 0-clan here")


# ---------------------------------------------------------------------------
# thresholds (shared with the diagram module)

def linfty_threshold(slope, p):
    """Smoothness above which the space lies in L∞: slope/p."""
    return slope * recip(p)


def l1loc_threshold(slope, p):
    return sigma(slope, p)


def delta_threshold(slope, p, n):
    return slope * recip(p) - n


def chi_threshold(slope, p):
    return _min(slope, Fraction(1)) * recip(p)


def functional_threshold(slope, p):
    one = Fraction(1)
    return _min(slope, one) * recip(p) - 1 + sigma(_max(slope, one) - 1, p)


# ---------------------------------------------------------------------------
# function-space targets

def _linfty(d: SpaceDescriptor) -> Verdict:
    k = _kind(d)
    if k == _ZERO:
        c = cmp(d.s, 0)
        return (holds if c > 0 else fails)("Remark 5.4: Λ^0 A^s_{p,q} ⊂ L∞ iff s > 0")
    th = linfty_threshold(d.slope, d.p)
    c = cmp(d.s, th)
    if k == _CLASSICAL:
        cite = "Prop 5.1, Eqs. 5.3/5.5"
        if c > 0:
            return holds(cite)
        if c < 0:
            return fails(cite)
        if d.family is Family.B:
            return _q_le(d.q, 1, cite, "limiting case s = n/p")
        if d.p is not INF and cmp(d.p, 1) <= 0:
            return holds(cite, "limiting case s = n/p with p <= 1")
        return fails(cite, "limiting case s = n/p needs p <= 1")
    cite = "Thm 5.3, Eqs. 5.7-5.8"
    if c > 0:
        return holds(cite)
    if c < 0:
        return fails(cite)
    if k == _SUB_B:
        return _q_le(d.q, 1, cite, "limiting case s = |ϱ|/p")
    return fails(cite, "limiting case s = |ϱ|/p")


def _l1loc(d: SpaceDescriptor) -> Verdict:
    k = _kind(d)
    if k == _ZERO:
        return _zero_open("local integrability")
    if k == _CLASSICAL:
        sg = sigma(d.n, d.p)
        if d.family is Family.B:
            cite = "Prop 5.5, Eq. 5.14"
            c = cmp(d.s, sg)
            if c > 0:
                return holds(cite)
            if c < 0:
                return fails(cite)
            if d.p is not INF and cmp(d.p, 1) <= 0:
                return _q_le(d.q, 1, cite, "limiting case s = σ^n_p, p <= 1")
            return _q_le(d.q, _min(d.p, Fraction(2)), cite, "limiting case s = 0, p > 1")
        cite = "Prop 5.5, Eq. 5.16"
        if d.p is not INF and cmp(d.p, 1) < 0:
            return (holds if cmp(d.s, sg) >= 0 else fails)(cite)
        c = cmp(d.s, 0)
        if c > 0:
            return holds(cite)
        if c < 0:
            return fails(cite)
        return _q_le(d.q, 2, cite, "limiting case s = 0, p >= 1")
    sg = l1loc_threshold(d.slope, d.p)
    cite = "Thm 5.7, Eq. 5.18"
    c = cmp(d.s, sg)
    if c > 0:
        return holds(cite)
    if c < 0:
        return fails(cite)
    if k == _SUB_B:
        return _q_le(d.q, _min(_max(d.p, Fraction(1)), Fraction(2)),
                     "Thm 5.7, Eq. DDH-6", "limiting case s = σ^{|ϱ|}_p")
    if k == _F:
        if cmp(d.p, 1) >= 0:
            return _q_le(d.q, 2, "Thm 5.7, Eq. DDH-5", "limiting case s = 0, p >= 1")
        return holds("Thm 5.7, Eq. DDH-4", "limiting case s = σ^{|ϱ|}_p, p < 1")
    return open_("Remark 5.8",
                 "the limiting case s = σ^{|ϱ|}_p for Λ^ϱ B is not characterised")


def _bmo(d: SpaceDescriptor) -> Verdict:
    k = _kind(d)
    if k == _ZERO:
        return _zero_open("the bmo embedding")
    if d.p is INF:
        return open_("Remark R-non-Lr", "bmo criterion is stated for p < inf")
    cite = "Remark R-non-Lr: ϱ-A^s_{p,q} ⊂ bmo iff s >= |ϱ|/p"
    return (holds if cmp(d.s, linfty_threshold(d.slope, d.p)) >= 0 else fails)(cite)


def _lr(d: SpaceDescriptor, r) -> Verdict:
    if r is INF:
        return _linfty(d)
    k = _kind(d)
    if k in (_SUB_B, _SUP_B, _F):
        return fails("Remark R-non-Lr: ϱ-A ⊂ L_r iff r = inf")
    if k == _ZERO:
        return _zero_open("the L_r embedding")
    return open_("Remark R-non-Lr", "L_r targets for classical spaces are outside the scope")


# ---------------------------------------------------------------------------
# space-to-space embeddings

def _dd(d):
    return diff_dimension(d)


def _ddh7(a, b) -> bool:
    return (cmp(b.slope, a.slope) <= 0
            and cmp(a.slope * recip(a.p), b.slope * recip(b.p)) >= 0)


def _same_sp(a, b) -> bool:
    return cmp(a.s, b.s) == 0 and cmp(a.p, b.p) == 0


def _mixed_equal(a, b, cite: str) -> Verdict:
    """Different families/flavors on a common limiting line s1-|ϱ|/p1 = s2-|ϱ|/p2.

    Decided by composing the same-type result with the elementary
    fine-index embeddings between Λ_ϱB, Λ^ϱB and Λ^ϱF.
    """
    ka, kb = _kind(a), _kind(b)
    q1, q2, p1, p2 = a.q, b.q, a.p, b.p
    if (a.family is Family.F and p1 is INF) or (b.family is Family.F and p2 is INF):
        return open_(cite, "F spaces with p = inf on the limiting line")
    if q1 is None or q2 is None:
        return open_(cite, "fine indices needed on the limiting line")
    a_b, b_b = a.family is Family.B, b.family is Family.B
    a_sub = ka in (_SUB_B, _CLASSICAL)
    a_sup = ka in (_SUP_B, _CLASSICAL)
    b_sub = kb in (_SUB_B, _CLASSICAL)
    b_sup = kb in (_SUP_B, _CLASSICAL)
    plt = cmp(p1, p2) < 0
    note = "fine-index chain on the limiting line"
    if a_b and b_b:
        if a_sub and b_sup:
            if cmp(q1, q2) <= 0:
                return holds(cite, note)
            return open_(cite, note)
        # Λ^ϱB -> Λ_ϱB
        if q2 is INF:
            return holds(cite, note)
        if cmp(q1, q2) > 0:
            return fails(cite, note)
        if cmp(q1, q2) == 0 and _same_sp(a, b):
            return fails("Eq. 2.56: Λ_ϱB_{p,q} ⊊ Λ^ϱB_{p,q} for q < inf", note)
        return open_(cite, note)
    if a_b and not b_b:
        if cmp(q1, _min(p2, q2)) <= 0 or (plt and cmp(q1, p1) <= 0):
            return holds(cite, note)
        if a_sup and cmp(q1, _max(p2, q2)) > 0:
            return fails(cite, note)
        return open_(cite, note)
    if not a_b and b_b:
        m = _min(p1, q1)
        if b_sup:
            if cmp(_max(p1, q1), q2) <= 0 or (plt and cmp(p2, q2) <= 0):
                return holds(cite, note)
            if cmp(m, q2) > 0:
                return fails(cite, note)
            return open_(cite, note)
        if q2 is INF:
            return holds(cite, note)
        if cmp(m, q2) > 0 or (cmp(m, q2) == 0 and _same_sp(a, b)):
            return fails(cite, note)
        return open_(cite, note)
    return open_(cite, note)


def _classical_rn(a, b) -> Verdict:
    cite = "Thm 6.5 (n-clan counterpart, ϱ = -n)"
    if cmp(b.p, a.p) < 0:
        return fails(cite, "p2 >= p1 required")
    c = cmp(_dd(a), _dd(b))
    if c < 0:
        return fails(cite)
    if c > 0:
        return holds(cite)
    if a.family is Family.B and b.family is Family.B:
        return _le(a.q, b.q, "q1", "q2", cite, "limiting line")
    if a.family is Family.F and b.family is Family.F:
        if cmp(a.p, b.p) < 0:
            if b.p is INF:
                return open_(cite, "limiting line into F with p = inf")
            return holds(cite, "limiting line with p1 < p2")
        return _le(a.q, b.q, "q1", "q2", cite, "s1 = s2, p1 = p2")
    return _mixed_equal(a, b, cite)


def _clan_rn(a, b) -> Verdict:
    ka, kb = _kind(a), _kind(b)
    same_rho = cmp(a.rho, b.rho) == 0
    cite = "Thm 6.5" if same_rho else "Thm 7.1"
    if not _ddh7(a, b):
        if same_rho:
            return fails(cite, "p2 >= p1 required")
        return fails("Thm 7.1, Eq. DDH-7", "|ϱ2| <= |ϱ1| and |ϱ1|/p1 >= |ϱ2|/p2 required")
    c = cmp(_dd(a), _dd(b))
    if c < 0:
        return fails(cite, "differential dimension must not increase")
    if ka == kb:
        if ka == _F:
            if c > 0:
                return holds(cite)
            if cmp(a.p, b.p) < 0:
                return holds(cite, "limiting line with p1 < p2")
            if _same_sp(a, b):
                return _le(a.q, b.q, "q1", "q2", cite, "s1 = s2, p1 = p2")
            return fails("Thm 7.1, Eq. DDH-8" if not same_rho else cite)
        if ka == _SUB_B or same_rho:
            if c > 0:
                return holds(cite)
            return _le(a.q, b.q, "q1", "q2", cite, "limiting line")
        # Λ^ϱ1 B -> Λ^ϱ2 B with ϱ1 != ϱ2
        cite = "Thm 7.1(iii)"
        if c > 0:
            return holds(cite)
        sc = cmp(a.s, b.s)
        if sc < 0:
            return fails(cite, "s1 >= s2 is necessary")
        if sc == 0:
            if a.q is None or b.q is None:
                return open_("Remark R6.16", "limiting case of Thm 7.1(iii)")
            if cmp(a.q, b.q) > 0:
                return fails(cite, "q1 <= q2 is necessary when s1 = s2")
        return open_("Remark R6.16", "limiting case of Thm 7.1(iii) is not settled")
    if c > 0:
        return holds(cite, "via the fine-index embeddings between the flavors")
    if same_rho:
        return _mixed_equal(a, b, cite)
    return open_("Remark R6.16", "mixed families across clans on the limiting line")


def _embed_rn(a, b) -> Verdict:
    ka, kb = _kind(a), _kind(b)
    if ka == _ZERO or kb == _ZERO:
        return _zero_open("embeddings")
    if ka == _CLASSICAL and kb == _CLASSICAL:
        return _classical_rn(a, b)
    if ka == _CLASSICAL:
        return open_("Thm 7.1", "classical sources into ϱ-clan targets are not covered")
    if kb == _CLASSICAL:
        if b.p is INF:
            if b.family is Family.B and b.q is INF and cmp(b.s, _dd(a)) <= 0:
                return holds("Remark after Prop 2.9: ϱ-A^s_{p,q} ⊂ C^{s-|ϱ|/p}")
            return open_("Remark R6.18", "classical targets with p = inf are not covered")
        return fails("Remark R6.18: ϱ-A ⊄ A^{s2}_{p2,q2} for -n < ϱ < 0")
    return _clan_rn(a, b)


def _embed_domain(a, b) -> Verdict:
    ka, kb = _kind(a), _kind(b)
    if ka == _ZERO or kb == _ZERO:
        return _zero_open("embeddings")
    if ka == _CLASSICAL and kb == _CLASSICAL:
        cite = "Prop 5.37(i), Eq. 5.87"
        t = a.n * _max(recip(a.p) - recip(b.p), Fraction(0))
        c = cmp(a.s - b.s, t)
        if c > 0:
            return holds(cite)
        if c < 0:
            return fails(cite)
        if a.family is Family.B and b.family is Family.B:
            if a.q is None or b.q is None:
                return holds_under(["q1 <= q2"], cite)
            if cmp(a.q, b.q) <= 0:
                return holds(cite, "limiting line, q1 <= q2")
        return open_(cite, "limiting line outside the stated case")
    if ka == _CLASSICAL:
        return open_("Thm 5.39a", "classical sources into ϱ-clan targets are not covered")
    compact = _compact_domain(a, b)
    if kb == _CLASSICAL or cmp(a.rho, b.rho) != 0:
        if compact.holds:
            return holds(compact.citation, "compact, hence continuous")
        return open_("Remark R6.20", "continuity between different clans is only settled "
                     "through compactness here")
    t = a.slope * _max(recip(a.p) - recip(b.p), Fraction(0))
    c = cmp(a.s - b.s, t)
    if c > 0:
        return holds("Thm 5.39(ii), Eq. 5.94", "compact, hence continuous")
    if c < 0:
        return fails("Thm 5.39(i), Eq. 5.93")
    if ka != kb:
        return open_("Thm 5.39", "mixed families on the limiting line")
    q1, q2 = a.q, b.q
    if ka == _SUP_B and cmp(a.p, b.p) < 0:
        if q1 is None or q2 is None:
            return open_("Remark R5.40", "limiting case Eq. DDH-3")
        bound = INF if q2 is INF else a.p / b.p * q2
        if cmp(q1, bound) <= 0:
            return holds("Remark R5.40, Eq. DDH-2", "q1 <= (p1/p2) q2")
        if cmp(q1, q2) > 0:
            return fails("Remark R5.40", "q1 <= q2 is necessary on Eq. DDH-3")
        return open_("Remark R5.40", "gap on Eq. DDH-3 (includes q1 = q2)")
    cite = "Thm 5.39(i), Eq. DDH-1" if ka == _F else "Thm 5.39(i), Eq. 5.93"
    if ka == _SUP_B:
        cite = "Thm 5.39 with Hölder's inequality (Remark R6.20)"
    if q1 is None or q2 is None:
        return holds_under(["q1 <= q2"], cite)
    if cmp(q1, q2) <= 0:
        return holds(cite, "limiting line" if cmp(q1, q2) == 0 else "limiting line, q1 < q2")
    return open_(cite, "q1 > q2 on the limiting line")


def _compact_domain(a, b) -> Verdict:
    ka, kb = _kind(a), _kind(b)
    if ka == _ZERO or kb == _ZERO:
        return _zero_open("compact embeddings")
    diff = a.s - b.s
    if ka == _CLASSICAL and kb == _CLASSICAL:
        t = a.n * _max(recip(a.p) - recip(b.p), Fraction(0))
        cite = "Prop 5.37(ii), Eq. 5.88"
    elif ka == _CLASSICAL:
        return open_("Thm 5.39a", "classical sources into ϱ-clan targets are not covered")
    elif kb == _CLASSICAL:
        t = a.slope * _max(recip(a.p) - recip(b.p), Fraction(0))
        cite = "Corollary after Thm 5.39a"
    elif cmp(a.rho, b.rho) == 0:
        t = a.slope * _max(recip(a.p) - recip(b.p), Fraction(0))
        cite = "Thm 5.39(ii), Eq. 5.94"
    elif cmp(a.slope, b.slope) <= 0:
        t = a.slope * _max(recip(a.p) - recip(b.p), Fraction(0))
        cite = "Thm 5.39a(i)"
    else:
        t = _max(a.slope * recip(a.p) - b.slope * recip(b.p), Fraction(0))
        cite = "Thm 5.39a(ii)"
    return (holds if cmp(diff, t) > 0 else fails)(cite)


def _is_same_space(a, b) -> bool:
    return a == b or b in equivalents(a)


def embeds(query: EmbeddingQuery) -> Verdict:
    """Decide the embedding described by ``query``."""
    src = _effective(query.source)
    tgt = query.target
    ground, mode = query.ground, query.mode
    if tgt.kind in (TargetKind.SPACE, TargetKind.HOLDER_ZYGMUND):
        if tgt.kind is TargetKind.SPACE:
            t = _effective(tgt.space)
        else:
            t = SpaceDescriptor(Family.B, Flavor.CLASSICAL, tgt.smoothness, INF, INF,
                                None, src.n)
        if src.n != t.n:
            raise ValueError(f"dimension mismatch: n={src.n} vs n={t.n}")
        if mode is Mode.COMPACT:
            if ground is Ground.RN:
                v = fails("Thm 6.5: there are no compact embeddings on R^n")
            else:
                v = _merge2(src, t, _compact_domain)
        elif _is_same_space(src, t):
            v = holds("Eqs. 2.42/2.55/2.57: identical spaces")
        elif ground is Ground.RN:
            v = _merge2(src, t, _embed_rn)
        else:
            v = _merge2(src, t, _embed_domain)
        return _finish(v, query.source, tgt.space)
    if mode is Mode.COMPACT:
        raise ValueError("compactness is only decided between spaces")
    if tgt.kind is TargetKind.L1LOC:
        return _finish(_merge(src, _l1loc), query.source)
    if ground is Ground.DOMAIN:
        raise ValueError(f"{tgt.kind.value} targets are decided on R^n only")
    if tgt.kind in (TargetKind.LINFTY, TargetKind.CONTINUOUS_C):
        v = _merge(src, _linfty)
    elif tgt.kind is TargetKind.LR:
        v = _merge(src, lambda e: _lr(e, tgt.r))
    else:
        v = _merge(src, _bmo)
    return _finish(v, query.source)


@dataclass(frozen=True)
class CompactnessExponents:
    entropy_exponent: object
    bound_type: str
    alpha: object = None

    def to_json(self) -> dict:
        return {"entropy_exponent": format_number(self.entropy_exponent),
                "bound_type": self.bound_type,
                "alpha": None if self.alpha is None else format_number(self.alpha)}


def compactness_exponents(query: EmbeddingQuery) -> CompactnessExponents:
    """Entropy-number exponent e_k ~ k^{-exponent} of a compact domain embedding."""
    if query.target.kind is not TargetKind.SPACE:
        raise ValueError("entropy numbers need a space target")
    q = replace(query, mode=Mode.COMPACT, ground=Ground.DOMAIN)
    v = embeds(q)
    if not v.holds:
        raise ValueError(f"embedding is not compact ({v.status.value}, {v.citation})")
    a, b = _effective(query.source), _effective(query.target.space)
    diff = a.s - b.s
    n = a.n
    gap = recip(a.p) - recip(b.p)
    # a classical target is the n-clan, so |ϱ1| < n puts it in the α case too
    if (cmp(a.slope, b.slope) < 0
            and cmp(a.slope * gap, diff) < 0 and cmp(diff, n * gap) <= 0):
        alpha = (diff - a.slope * gap) / (n - a.slope)
        return CompactnessExponents(diff / n, "TwoSidedUpToEps", alpha)
    return CompactnessExponents(diff / n, "Exact")


# ---------------------------------------------------------------------------
# membership of δ and χ_Q

def _delta(d: SpaceDescriptor) -> Verdict:
    k = _kind(d)
    if k == _ZERO:
        return (holds if cmp(d.s, -d.n) <= 0 else fails)(
            "Remark 5.19, Eq. 5.44: δ ∈ Λ^0 A^s_{p,q} iff s <= -n")
    if k == _CLASSICAL:
        cite = "Prop 5.16"
        if d.family is Family.F and d.p is INF:
            return (holds if cmp(d.s, -d.n) <= 0 else fails)(cite)
        th = d.n * (recip(d.p) - 1)
        c = cmp(d.s, th)
        if c < 0:
            return holds(cite)
        if c > 0 or d.family is Family.F:
            return fails(cite)
        return _q_inf(d.q, cite, "limiting case s = n(1/p - 1)")
    th = delta_threshold(d.slope, d.p, d.n)
    c = cmp(d.s, th)
    if k == _SUB_B:
        cite = "Thm 5.18, Eq. 5.37"
        if c < 0:
            return holds(cite)
        if c > 0:
            return fails(cite)
        return _q_inf(d.q, cite, "limiting case s = |ϱ|/p - n")
    cite = "Thm 5.18, Eqs. 5.36/5.37a"
    return (holds if c <= 0 else fails)(cite)


def _chi(d: SpaceDescriptor) -> Verdict:
    k = _kind(d)
    if k == _ZERO:
        return (holds if cmp(d.s, 0) <= 0 else fails)(
            "Remark 5.26, Eq. 5.60: χ_Q ∈ Λ^0 A^s_{p,q} iff s <= 0")
    if k == _CLASSICAL:
        cite = "Prop 5.22"
        c = cmp(d.s, recip(d.p))
        if c < 0:
            return holds(cite)
        if c > 0:
            return fails(cite)
        if d.family is Family.B:
            return _q_inf(d.q, cite, "limiting case s = 1/p")
        return (holds if d.p is INF else fails)(cite, "limiting case s = 1/p")
    th = chi_threshold(d.slope, d.p)
    c = cmp(d.s, th)
    big = cmp(d.slope, 1) >= 0
    if k == _SUB_B:
        cite = "Thm 5.24, Eqs. 5.49-5.50"
        if c < 0:
            return holds(cite)
        if c > 0:
            return fails(cite)
        return _q_inf(d.q, cite, "limiting case s = min(|ϱ|,1)/p")
    if k == _SUP_B:
        cite = "Thm 5.24, Eqs. 5.47-5.48"
        if c < 0:
            return holds(cite)
        if c > 0:
            return fails(cite)
        if big:
            return _q_inf(d.q, cite, "limiting case s = 1/p with |ϱ| >= 1")
        return holds(cite, "limiting case s = |ϱ|/p with |ϱ| < 1")
    cite = "Thm 5.24, Eqs. 5.49a-5.50a"
    if c < 0:
        return holds(cite)
    if c > 0:
        return fails(cite)
    if big:
        return fails("Thm 5.24, proof Step 3 (Eq. 5.57) and Eq. 2.54",
                     "limiting case s = 1/p with |ϱ| >= 1 is excluded for F")
    return holds(cite, "limiting case s = |ϱ|/p with |ϱ| < 1")


def member(element, d: SpaceDescriptor) -> Verdict:
    """Is δ (``Delta``) or the cube indicator χ_Q (``ChiQ``) in the space?"""
    element = Element(element)
    e = _effective(d)
    rule = _delta if element is Element.DELTA else _chi
    return _finish(_merge(e, rule), d)


def _functional(d: SpaceDescriptor) -> Verdict:
    k = _kind(d)
    th = functional_threshold(d.slope, d.p)
    cite = "Thm 5.29, Eqs. 5.69-5.70"
    c = cmp(d.s, th)
    if c > 0:
        return holds(cite)
    if c < 0:
        return fails(cite)
    if d.n == 1:
        cite = "Prop 5.27, Eq. 5.63"
        if k == _SUB_B:
            return _q_le(d.q, 1, cite, "breaking line, n = 1")
        return fails(cite, "breaking line, n = 1")
    return open_("Remark 5.30", "breaking line Eq. 5.71 is not settled for n >= 2")


def functional_chiQ(d: SpaceDescriptor) -> Verdict:
    """Is χ_Q a pointwise multiplier-type functional, i.e. is f ↦ ∫_Q f bounded?"""
    e = _effective(d)
    if e.classical:
        raise ValueError("functional_chiQ needs -n < rho < 0 (classical space given)")
    if _kind(e) == _ZERO:
        return _finish(_zero_open("the χ_Q functional"), d)
    if not e.rho_clan:
        raise ValueError("functional_chiQ needs -n < rho < 0")
    return _finish(_merge(e, _functional), d)


# ---------------------------------------------------------------------------
# structural properties

def _mult_algebra(d: SpaceDescriptor) -> Verdict:
    k = _kind(d)
    if k == _ZERO:
        return _zero_open("the multiplication algebra property")
    th = linfty_threshold(d.slope, d.p)
    c = cmp(d.s, th)
    if k == _CLASSICAL:
        cite = "Prop 5.11"
        if c > 0:
            return holds(cite)
        if c < 0:
            return fails(cite)
        if d.family is Family.B:
            if d.p is INF:
                return fails(cite, "limiting case s = 0 with p = inf")
            return _q_le(d.q, 1, cite, "limiting case s = n/p")
        if d.p is not INF and cmp(d.p, 1) <= 0:
            return holds(cite, "limiting case s = n/p with p <= 1")
        return fails(cite, "limiting case s = n/p")
    cite = "Thm 5.13"
    if c > 0:
        return holds(cite)
    if c < 0:
        return fails(cite)
    if k == _SUB_B:
        if d.q is None or cmp(d.q, 1) <= 0:
            return open_("Thm 5.13(ii)", "limiting case s = |ϱ|/p, q <= 1 is one-directional")
        return fails("Thm 5.13(ii)", "limiting case s = |ϱ|/p needs q <= 1")
    return fails(cite, "limiting case s = |ϱ|/p")


def _truncation(d: SpaceDescriptor) -> Verdict:
    k = _kind(d)
    if k == _ZERO:
        return _zero_open("truncation")
    l1 = _l1loc(d)
    if l1.fails:
        return fails(l1.citation, "truncation requires local integrability")
    if k == _CLASSICAL:
        if d.family is Family.F:
            return open_("Prop 5.31", "only B spaces are covered")
        cite = "Prop 5.31"
        lo, hi = sigma(d.n, d.p), 1 + recip(d.p)
        cl, ch = cmp(d.s, lo), cmp(d.s, hi)
        if cl > 0 and ch < 0:
            return holds(cite)
        if cl < 0 or ch > 0:
            return fails(cite)
        return open_(cite, "edge of the truncation band")
    if (k == _SUB_B and cmp(d.p, 1) >= 0 and d.q is not None and cmp(d.q, 1) >= 0):
        cite = "Remark 5.33, Eq. 5.80"
        hi = 1 + chi_threshold(d.slope, d.p)
        if cmp(d.s, 0) > 0 and cmp(d.s, hi) < 0:
            return holds(cite)
        return fails(cite)
    return open_("Conj 5.32", "truncation in the ϱ-clan is conjectured only")


def _r_sigma(s, p, sg) -> bool:
    """Is s in the open set R_σ of admissible Haar parameters?"""
    one = Fraction(1)
    ip = recip(p)
    if cmp(sg, 1) <= 0:
        return cmp(sg * ip - 1, s) < 0 and cmp(s, _min(one, sg * ip)) < 0
    lo = _max(ip - 1, sg * (ip - 1))
    return cmp(lo, s) < 0 and cmp(s, _min(one, ip)) < 0


def _haar(d: SpaceDescriptor) -> Verdict:
    k = _kind(d)
    if k == _ZERO:
        return _zero_open("the Haar basis property")
    one = Fraction(1)
    if k == _CLASSICAL:
        if d.family is Family.F or d.p is INF:
            return open_("Prop 6.1", "only B spaces with p < inf are covered")
        cite = "Prop 6.1"
        ip = recip(d.p)
        lo = _max(d.n * (ip - 1), ip - 1)
        hi = _min(ip, one)
        if cmp(lo, d.s) < 0 and cmp(d.s, hi) < 0:
            return holds(cite)
        if cmp(d.s, lo) < 0 or cmp(d.s, hi) > 0:
            return fails(cite, "outside the closure of the region Eq. 6.15")
        return open_(cite, "boundary of the region")
    if k == _F:
        return open_("Conj 6.3", "Haar bases for Λ^ϱ F are not settled")
    ip = recip(d.p)
    r = d.slope
    lo = _max(d.n * (ip - 1), ip - 1)
    hi = _min(_min(ip, r * ip), one)
    if cmp(lo, d.s) < 0 and cmp(d.s, hi) < 0:
        return holds("Remark 6.5, Eq. 6.18")
    if d.n >= 2 and cmp(r, 1) >= 0 and cmp(d.p, 1) >= 0 and _r_sigma(d.s, d.p, r):
        return holds("Remark 6.5, Eq. 6.25")
    if cmp(d.s, chi_threshold(r, d.p)) > 0:
        return fails("Thm 5.24", "χ_Q is not in the space")
    if cmp(d.s, functional_threshold(r, d.p)) < 0:
        return fails("Thm 5.29", "χ_Q does not act as a functional")
    return open_("Conj 6.3", "conjectured remainder of R_{|ϱ|}")


_ALWAYS = {
    Property.FATOU: "Thm 3.12",
    Property.SMOOTH_MULTIPLIER: "Thm 4.1",
    Property.DIFFEOMORPHISM: "Thm 4.5",
    Property.HALF_SPACE_EXTENSION: "Thm 4.9",
}


def check_property(d: SpaceDescriptor, which) -> Verdict:
    """Decide a structural property of the space (exported as ``property``)."""
    which = Property(which)
    e = _effective(d)
    if which in _ALWAYS:
        if _kind(e) == _ZERO:
            v = _zero_open(which.value)
        else:
            v = holds(_ALWAYS[which])
    elif which is Property.MULTIPLICATION_ALGEBRA:
        v = _merge(e, _mult_algebra)
    elif which is Property.TRUNCATION:
        v = _merge(e, _truncation)
    else:
        v = _merge(e, _haar)
    return _finish(v, d)


# ---------------------------------------------------------------------------
# traces

@dataclass(frozen=True)
class TraceResult:
    verdict: Verdict
    target: object = None
    extension_exists: bool = False

    def to_json(self) -> dict:
        t = None if self.target is None else self.target.to_json()
        return {"verdict": self.verdict.to_json(), "target": t,
                "extension_exists": self.extension_exists}


def trace(d: SpaceDescriptor) -> TraceResult:
    """Trace of the space on the hyperplane R^{n-1}."""
    if d.n < 2:
        raise ValueError("trace needs n >= 2")
    if not d.rho_clan:
        raise ValueError("trace needs -n < rho < 0")
    e = d
    if e.family is Family.F and e.flavor is Flavor.SUB:
        e = replace(e, flavor=Flavor.SUP)
    if e.family is Family.B and e.flavor is Flavor.SUB and e.q is INF:
        e = replace(e, flavor=Flavor.SUP)
    n, p, s, r = e.n, e.p, e.s, e.slope
    ip = recip(p)
    natural = ("Remark 4.14", "outside the proven hypotheses; conjectured region Eq. 4.62 "
               "s > min(|ϱ|,1)/p + σ^{max(|ϱ|,1)-1}_p")

    def ok(target, cite):
        return TraceResult(_finish(holds(cite), d), target, True)

    if cmp(r, 1) < 0:
        if cmp(s, r * ip) > 0:
            t = s - r * ip
            if e.family is Family.B and e.flavor is Flavor.SUB:
                return ok(SpaceDescriptor(Family.B, Flavor.CLASSICAL, t, INF, e.q, None, n - 1),
                          "Thm 4.12, Eq. 4.39")
            return ok(HolderZygmund(t, n - 1), "Thm 4.12, Eqs. 4.38/4.39a")
        return TraceResult(_finish(open_(*natural), d))
    t = s - ip
    above = cmp(t, sigma(n - 1, p)) > 0
    if cmp(r, 1) > 0:
        if above:
            rho = e.rho + 1
            if e.family is Family.F:
                tgt = SpaceDescriptor(Family.B, Flavor.SUP, t, p, p, rho, n - 1)
                return ok(tgt, "Thm 4.13, Eqs. 4.53/4.54a")
            tgt = SpaceDescriptor(Family.B, e.flavor, t, p, e.q, rho, n - 1)
            return ok(tgt, "Thm 4.13, Eqs. 4.52/4.54")
        return TraceResult(_finish(open_(*natural), d))
    # ϱ = -1
    if e.flavor is Flavor.SUB:
        return TraceResult(_finish(open_("Remark after Remark 4.14",
                                         "Λ_{-1} B with q < inf has no admissible trace space"), d))
    if above:
        if e.family is Family.F:
            return ok(SpaceDescriptor(Family.B, Flavor.SUP, t, p, p, 0, n - 1),
                      "Cor 4.15, Eq. 4.65")
        return ok(SpaceDescriptor(Family.B, Flavor.SUP, t, p, e.q, 0, n - 1),
                  "Cor 4.15, Eq. 4.64")
    if e.family is Family.B and e.q is INF and cmp(t, 0) > 0:
        return ok(HolderZygmund(t, n - 1), "Remark 4.16, Eq. 4.69")
    return TraceResult(_finish(open_(*natural), d))


# ---------------------------------------------------------------------------
# interpolation

class InterpolationMethod(str, enum.Enum):
    REAL = "Real"
    PLUS_MINUS = "PlusMinus"


def interpolate(d1: SpaceDescriptor, d2: SpaceDescriptor, theta, method, q=None):
    """Parameters of an interpolation space; returns ``(descriptor or None, verdict)``.

    ``method`` is ``"Real"`` (then ``q`` is the outer fine index) or ``"PlusMinus"``.
    """
    method = InterpolationMethod(method)
    theta = parse_number(theta)
    if not (cmp(theta, 0) > 0 and cmp(theta, 1) < 0):
        raise ValueError("theta must lie in (0, 1)")
    if d1.n != d2.n or cmp(d1.rho, d2.rho) != 0:
        return None, _finish(open_("Remark 3.6", "nothing is known across clans"), d1, d2)
    if _kind(d1) == _ZERO:
        return None, _finish(_zero_open("interpolation"), d1, d2)
    if not (d1.rho_clan or d1.classical):
        return None, _finish(open_("Prop 3.3", "only -n <= ϱ < 0 is covered"), d1, d2)
    s = (1 - theta) * d1.s + theta * d2.s
    if method is InterpolationMethod.REAL:
        if cmp(d1.p, d2.p) != 0:
            raise ValueError("real interpolation needs p1 = p2")
        if cmp(d1.s, d2.s) == 0:
            raise ValueError("real interpolation needs s1 != s2")
        if q is None:
            raise ValueError("real interpolation needs the outer index q")
        q = parse_number(q)
        flavor = Flavor.CLASSICAL if d1.classical else Flavor.SUB
        out = SpaceDescriptor(Family.B, flavor, s, d1.p, q, d1.rho, d1.n)
        cite = "Prop 3.3, Eq. 3.13" if d1.classical else "Prop 3.3 and Remark 3.4, Eq. 3.14"
        return out, _finish(holds(cite), d1, d2)
    k1, k2 = _kind(d1), _kind(d2)
    same = d1.family is d2.family and (k1 == k2 or (k1 == _CLASSICAL and k2 == _CLASSICAL))
    if not same or d1.q is None or d2.q is None:
        return None, _finish(open_("Thm 3.5", "the ±-method needs matching family and flavor"),
                             d1, d2)
    ip = (1 - theta) * recip(d1.p) + theta * recip(d2.p)
    iq = (1 - theta) * recip(d1.q) + theta * recip(d2.q)
    p = INF if cmp(ip, 0) == 0 else 1 / ip
    qq = INF if cmp(iq, 0) == 0 else 1 / iq
    out = replace(d1, s=s, p=p, q=qq)
    cite = "Remark 3.6, Eqs. 3.19-3.20" if d1.classical else "Thm 3.5, Eqs. 3.15-3.18"
    return out, _finish(holds(cite), d1, d2)


# ---------------------------------------------------------------------------
# growth envelopes

@dataclass(frozen=True)
class Envelope:
    kind: str
    exponent: object = None
    verdict: Verdict = None

    def to_json(self) -> dict:
        return {"kind": self.kind,
                "exponent": None if self.exponent is None else format_number(self.exponent),
                "verdict": None if self.verdict is None else self.verdict.to_json()}


def growth_envelope(d: SpaceDescriptor, ground=Ground.RN) -> Envelope:
    """Growth envelope E_G(t) as t -> 0 of a space inside L¹loc."""
    ground = Ground(ground)
    e = _effective(d)
    k = _kind(e)
    if k == _ZERO:
        return Envelope("Open", verdict=_finish(_zero_open("the growth envelope"), d))
    l1 = _merge(e, _l1loc)
    if l1.fails:
        raise ValueError("the space is not contained in L1loc")
    if not l1.holds:
        return Envelope("Open", verdict=_finish(open_(l1.citation, "local integrability "
                                                      "is not settled"), d))
    linf = _merge(e, _linfty)
    if linf.holds:
        return Envelope("Bounded", verdict=_finish(holds(linf.citation), d))
    undecided = not linf.fails
    if k == _CLASSICAL:
        cite = "Example envg-A"
        if e.p is INF or undecided:
            return Envelope("Open", verdict=_finish(open_(cite), d))
        th = e.n * recip(e.p)
        c = cmp(e.s, th)
        if c < 0:
            if cmp(e.s, sigma(e.n, e.p)) > 0:
                return Envelope("PowerLaw", -recip(e.p) + e.s / e.n,
                                _finish(holds(cite + "(i)"), d))
            return Envelope("Open", verdict=_finish(open_(cite, "limiting case s = σ^n_p"), d))
        if e.family is Family.B:
            return Envelope("LogLaw", 1 - recip(e.q), _finish(holds(cite + "(ii)"), d))
        return Envelope("LogLaw", 1 - recip(e.p), _finish(holds(cite + "(iii)"), d))
    if ground is Ground.RN:
        if undecided:
            return Envelope("Open", verdict=_finish(open_("Eq. eg_MA_rn"), d))
        return Envelope("InfiniteEverywhere",
                        verdict=_finish(holds("Eq. eg_MA_rn: E_G(t) = inf"), d))
    th = e.slope * recip(e.p)
    if cmp(e.s, th) < 0 and cmp(e.s, sigma(e.slope, e.p)) > 0:
        return Envelope("PowerLaw", -recip(e.p) + e.s / e.slope,
                        _finish(holds("Thm eg-rhoAs"), d))
    return Envelope("Open", verdict=_finish(open_("Remark after Thm eg-rhoAs",
                                                  "limiting lines are not settled"), d))


# ---------------------------------------------------------------------------
# coincidences

def spaces_equal(d1: SpaceDescriptor, d2: SpaceDescriptor) -> Verdict:
    """Do two descriptors name the same space?  Only proven coincidences count."""
    a, b = _effective(d1), _effective(d2)
    if a.n != b.n:
        raise ValueError("dimension mismatch")
    if _is_same_space(a, b):
        return _finish(holds("Eqs. 2.42/2.55/2.57"), d1, d2)
    ka, kb = _kind(a), _kind(b)
    if (a.rho_clan and b.rho_clan and cmp(a.rho, b.rho) == 0
            and a.q is not None and b.q is not None):
        cite = "Thm 2.16"
        if ka == kb and ka in (_SUB_B, _F):
            return _finish(fails(cite, "different parameters give different spaces"), d1, d2)
        if {ka, kb} == {_SUB_B, _F}:
            return _finish(fails(cite + "(ii)"), d1, d2)
        if {ka, kb} == {_SUB_B, _SUP_B} and _same_sp(a, b) and cmp(a.q, b.q) == 0:
            return _finish(fails("Eq. 2.56: the inclusion is strict for q < inf"), d1, d2)
    return _finish(open_("Conj 2.18", "no further coincidences are proven"), d1, d2)


# public name from the operation list; defined last so the builtin stays usable above
property = check_property  # noqa: A001
