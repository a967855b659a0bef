"""Extremal coefficient models and agreement experiments against the classifier.

The δ and χ_Q models are magnitude envelopes, not wavelet transforms of the
distributions themselves.  δ has coefficients of size 2^{jn} on the cube at
the origin.  χ_Q has coefficients of size 1 on the cubes of (0,1)ⁿ that touch
its boundary; interior cubes see vanishing moments.  (With the Haar system
the transform of the indicator of a dyadic interval is a single term, so the
envelope is the relevant object for smooth wavelets only.)
"""

from __future__ import annotations

import csv
import enum
import functools
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import classifier as C
from .params import (INF, Family, Flavor, SpaceDescriptor, cmp, equivalents,
                     format_number, recip)
from .seqnorm import (FROM_J_PLUS, CoefficientArray, GrowthReport, growth_analyze,
                      growth_series, sup_truncated, sub_level_terms)
from .verdict import Status

__all__ = [
    "ModelKind", "ModelSpec", "generate", "boundary_count", "AgreementRecord",
    "membership_experiment", "StrictnessReport", "strictness_experiment",
    "BatchSummary", "agreement_batch", "breaking_line", "DEFAULT_BAND",
]

DEFAULT_BAND = Fraction(1, 10)


class ModelKind(str, enum.Enum):
    DELTA = "DeltaModel"
    BOUNDARY = "BoundaryModel"
    SINGLE_CUBE = "SingleCube"
    RANDOM_SPARSE = "RandomSparse"


@dataclass(frozen=True)
class ModelSpec:
    kind: ModelKind
    n: int
    j_max: int
    j0: int = 0
    m0: Tuple[int, ...] = ()
    seed: int = 0
    density: float = 0.01

    def __post_init__(self):
        object.__setattr__(self, "kind", ModelKind(self.kind))
        if not isinstance(self.n, int) or self.n < 1:
            raise ValueError("n must be a positive integer")
        if not isinstance(self.j_max, int) or self.j_max < 0:
            raise ValueError("j_max must be a non-negative integer")
        if not (0 < self.density <= 1):
            raise ValueError("density must lie in (0, 1]")
        m0 = tuple(int(x) for x in self.m0) or (0,) * self.n
        if len(m0) != self.n:
            raise ValueError("m0 must have length n")
        object.__setattr__(self, "m0", m0)
        if self.kind is ModelKind.SINGLE_CUBE and not (0 <= self.j0 <= self.j_max):
            raise ValueError("j0 must lie in [0, j_max]")


def boundary_count(n: int, j: int) -> int:
    """Number of cubes of side 2^{-j} in (0,1)ⁿ touching the boundary."""
    side = 2 ** j
    return side ** n - max(side - 2, 0) ** n


def _boundary_cells(n: int, j: int) -> np.ndarray:
    side = 2 ** j
    if side <= 2:
        grids = np.meshgrid(*[np.arange(side)] * n, indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)
    faces = []
    for i in range(n):
        for edge in (0, side - 1):
            grids = np.meshgrid(*[np.arange(side)] * (n - 1), indexing="ij")
            rest = np.stack([g.ravel() for g in grids], axis=1) if n > 1 \
                else np.zeros((1, 0), dtype=np.int64)
            col = np.full((len(rest), 1), edge)
            faces.append(np.concatenate([rest[:, :i], col, rest[:, i:]], axis=1))
    return np.unique(np.concatenate(faces), axis=0)


def _random_sparse(spec: ModelSpec) -> CoefficientArray:
    n, L = spec.n, spec.j_max + 1
    sizes = [(2 ** n if j == 0 else 2 ** n - 1) * 2 ** (j * n) for j in range(L)]
    total = sum(sizes)
    k = max(1, int(math.ceil(spec.density * total)))
    rng = np.random.Generator(np.random.Philox(spec.seed))
    idx = np.sort(rng.choice(total, size=k, replace=False))
    vals = rng.uniform(-1.0, 1.0, size=k)
    offs = np.cumsum([0] + sizes)
    js = np.searchsorted(offs, idx, side="right") - 1
    local = idx - offs[js]
    cells = np.int64(2) ** (js * n)
    Gs = local // cells
    rem = local % cells
    ms = np.zeros((k, n), dtype=np.int64)
    side = np.int64(2) ** js
    for i in range(n - 1, -1, -1):
        ms[:, i] = rem % side
        rem //= side
    return CoefficientArray.from_arrays(n, spec.j_max, js, Gs, ms, vals)


@functools.lru_cache(maxsize=32)
def _generate(spec: ModelSpec) -> CoefficientArray:
    n, top = spec.n, spec.j_max
    if spec.kind is ModelKind.DELTA:
        return CoefficientArray.from_arrays(
            n, top, range(top + 1), [0] * (top + 1), np.zeros((top + 1, n)),
            [2.0 ** (j * n) for j in range(top + 1)])
    if spec.kind is ModelKind.SINGLE_CUBE:
        return CoefficientArray.from_arrays(n, top, [spec.j0], [0], [spec.m0], [1.0])
    if spec.kind is ModelKind.BOUNDARY:
        cells = [_boundary_cells(n, j) for j in range(top + 1)]
        js = np.concatenate([np.full(len(c), j) for j, c in enumerate(cells)])
        ms = np.concatenate(cells)
        return CoefficientArray.from_arrays(n, top, js, np.zeros(len(js)), ms,
                                            np.ones(len(js)))
    return _random_sparse(spec)


def generate(spec: ModelSpec) -> CoefficientArray:
    """Deterministic coefficient array for the model (cached, treat as read-only)."""
    return _generate(spec)


# ---------------------------------------------------------------------------
# membership experiments

def breaking_line(element, d: SpaceDescriptor):
    """Smoothness at which membership of δ or χ_Q switches."""
    element = C.Element(element)
    slope, p = d.slope, d.p
    if element is C.Element.DELTA:
        return C.delta_threshold(slope, p, d.n)
    return C.chi_threshold(slope, p)


def _b_form(d: SpaceDescriptor) -> Optional[SpaceDescriptor]:
    """A B-family descriptor of the same space, or None when there is none."""
    if d.family is Family.B:
        return d
    if d.classical:
        if d.q is not None and cmp(d.q, d.p) == 0:
            return SpaceDescriptor(Family.B, Flavor.CLASSICAL, d.s, d.p, d.q, None, d.n)
        return None
    for e in equivalents(d):
        if e.family is Family.B:
            return e
    return None


@dataclass
class AgreementRecord:
    element: str
    descriptor: SpaceDescriptor
    classifier_verdict: object
    numeric_verdict: str
    report: Optional[GrowthReport]
    agree: Optional[bool]
    excluded_reason: str = ""
    breaking_line: object = None
    truncations: Dict[int, float] = field(default_factory=dict)

    @property
    def status(self) -> str:
        if self.agree is None:
            return "excluded"
        return "agree" if self.agree else "disagree"

    def row(self) -> dict:
        d = self.descriptor
        return {
            "element": self.element, "family": d.family.value, "flavor": d.flavor.value,
            "n": d.n, "rho": str(format_number(d.rho)), "p": str(format_number(d.p)),
            "q": str(format_number(d.q)) if d.q is not None else "",
            "s": str(format_number(d.s)),
            "classifier": self.classifier_verdict.status.value,
            "numeric": self.numeric_verdict,
            "rate": "" if self.report is None else repr(self.report.fitted_rate),
            "status": self.status, "reason": self.excluded_reason,
        }


def _model_for(element: C.Element, n: int, j_max: int) -> ModelSpec:
    kind = ModelKind.DELTA if element is C.Element.DELTA else ModelKind.BOUNDARY
    return ModelSpec(kind, n, j_max)


def _series(a: CoefficientArray, d: SpaceDescriptor, convention: str):
    if d.classical:
        return growth_series(a, d.s, d.p, d.q, None, "Classical")
    flavor = "Sub" if d.flavor is Flavor.SUB else "Sup"
    return growth_series(a, d.s, d.p, d.q, d.rho, flavor, convention)


def membership_experiment(spec: ModelSpec, d: SpaceDescriptor,
                          j_max_list: Sequence[int] = (), band=DEFAULT_BAND,
                          convention: str = FROM_J_PLUS) -> AgreementRecord:
    """Compare the growth of the model's truncated norms with ``classifier.member``.

    The δ model is tested against Delta, the boundary model against ChiQ.
    """
    spec = ModelSpec(spec.kind, spec.n, spec.j_max, spec.j0, spec.m0, spec.seed, spec.density) \
        if not isinstance(spec, ModelSpec) else spec
    if spec.kind is ModelKind.DELTA:
        element = C.Element.DELTA
    elif spec.kind is ModelKind.BOUNDARY:
        element = C.Element.CHI_Q
    else:
        raise ValueError("membership experiments use DeltaModel or BoundaryModel")
    if spec.n != d.n:
        raise ValueError("model and space dimensions differ")
    verdict = C.member(element, d)
    line = breaking_line(element, d)
    rec = AgreementRecord(element.value, d, verdict, "Skipped", None, None, "",
                          line)
    b = _b_form(d)
    if b is None:
        rec.excluded_reason = "no B-family form"
        return rec
    if verdict.status not in (Status.HOLDS, Status.FAILS):
        rec.excluded_reason = f"classifier {verdict.status.value}"
    elif abs(float(d.s - line)) < float(band):
        rec.excluded_reason = "within the band around the breaking line"
    a = generate(spec)
    terms, cum = _series(a, b, convention)
    report = growth_analyze(terms, cumulative=cum)
    rec.report = report
    rec.numeric_verdict = report.verdict
    tops = sorted(set(int(k) for k in j_max_list if 0 <= int(k) <= spec.j_max)) or [spec.j_max]
    rec.truncations = {k: float(cum[k]) for k in tops}
    if rec.excluded_reason:
        return rec
    if report.verdict == "Inconclusive":
        rec.excluded_reason = "numerically inconclusive"
        return rec
    expected = "Finite" if verdict.holds else "Divergent"
    rec.agree = report.verdict == expected
    return rec


@dataclass
class BatchSummary:
    records: List[AgreementRecord]

    @property
    def total(self) -> int:
        return len(self.records)

    def count(self, status: str) -> int:
        return sum(1 for r in self.records if r.status == status)

    @property
    def agreement(self) -> float:
        decided = self.count("agree") + self.count("disagree")
        return 1.0 if decided == 0 else self.count("agree") / decided

    def to_json(self) -> dict:
        return {"total": self.total, "agree": self.count("agree"),
                "disagree": self.count("disagree"), "excluded": self.count("excluded")}

    def to_csv(self) -> str:
        buf = io.StringIO()
        rows = [r.row() for r in self.records]
        if rows:
            wr = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
            wr.writeheader()
            wr.writerows(rows)
        return buf.getvalue()


_P_CHOICES = (Fraction(1, 2), Fraction(2, 3), Fraction(1), Fraction(3, 2), Fraction(2),
              Fraction(4))
_Q_CHOICES = (Fraction(1, 2), Fraction(1), Fraction(2), INF)


def _rho_choices(n: int) -> List[Fraction]:
    base = [Fraction(-n) + Fraction(1, 4), Fraction(-3, 2), Fraction(-1), Fraction(-1, 2),
            Fraction(-1, 4)]
    return sorted({r for r in base if -n < r < 0})


def agreement_batch(element, count: int = 200, n_values: Sequence[int] = (1, 2, 3),
                    j_max: int = 16, seed: int = 0, band=DEFAULT_BAND,
                    spread=Fraction(2)) -> BatchSummary:
    """Random B-family tuples with s kept outside the band around the breaking line."""
    element = C.Element(element)
    rng = np.random.Generator(np.random.Philox(seed))
    records = []
    for _ in range(count):
        n = int(n_values[rng.integers(len(n_values))])
        flavor = (Flavor.SUB, Flavor.SUP, Flavor.CLASSICAL)[rng.integers(3)]
        p = _P_CHOICES[rng.integers(len(_P_CHOICES))]
        q = _Q_CHOICES[rng.integers(len(_Q_CHOICES))]
        rhos = _rho_choices(n)
        rho = None if flavor is Flavor.CLASSICAL else rhos[rng.integers(len(rhos))]
        probe = SpaceDescriptor(Family.B, flavor, 0, p, q, rho, n)
        line = breaking_line(element, probe)
        # offset in [band, spread] on either side, on a grid of 1/40
        steps = int(rng.integers(int(band * 40), int(spread * 40) + 1))
        sign = 1 if rng.integers(2) else -1
        s = line + sign * Fraction(steps, 40)
        d = SpaceDescriptor(Family.B, flavor, s, p, q, rho, n)
        records.append(membership_experiment(_model_for(element, n, j_max), d, band=band))
    return BatchSummary(records)


# ---------------------------------------------------------------------------
# strictness of Λ_ϱ B ⊂ Λ^ϱ B

@dataclass
class StrictnessReport:
    descriptor: SpaceDescriptor
    sub_terms: List[float]
    sub_cumulative: List[float]
    sub_report: GrowthReport
    sup_values: List[float]
    sup_limit: float

    @property
    def sub_unbounded(self) -> bool:
        c = self.sub_cumulative
        grows = all(b > a for a, b in zip(c, c[1:]))
        return grows and self.sub_report.verdict == "Inconclusive" \
            and abs(self.sub_report.fitted_rate) <= 0.02

    @property
    def sup_bounded(self) -> bool:
        return all(v <= self.sup_limit * (1 + 1e-12) for v in self.sup_values)

    @property
    def witness(self) -> bool:
        return self.sub_unbounded and self.sup_bounded

    def to_json(self) -> dict:
        return {
            "descriptor": self.descriptor.to_json(),
            "sub_rate": self.sub_report.fitted_rate,
            "sub_cumulative": self.sub_cumulative,
            "sup_values": self.sup_values,
            "sup_limit": self.sup_limit,
            "sub_unbounded": self.sub_unbounded,
            "sup_bounded": self.sup_bounded,
        }


def strictness_experiment(d: SpaceDescriptor, j_max: int = 16) -> StrictnessReport:
    """δ model on the limiting line s = |ϱ|/p - n, sub flavor against sup flavor."""
    if d.family is not Family.B or d.flavor is not Flavor.SUB or not d.rho_clan:
        raise ValueError("strictness needs a Sub-flavor B descriptor with -n < rho < 0")
    if d.q is None:
        raise ValueError("strictness needs a fine index q")
    if d.q is INF:
        raise ValueError("q = inf is rejected: the two flavors coincide there")
    s = C.delta_threshold(d.slope, d.p, d.n)
    d = SpaceDescriptor(d.family, d.flavor, s, d.p, d.q, d.rho, d.n)
    a = generate(ModelSpec(ModelKind.DELTA, d.n, j_max))
    terms, cum = growth_series(a, s, d.p, d.q, d.rho, "Sub")
    report = growth_analyze(terms, cumulative=cum)
    sup = sup_truncated(a, s, d.p, d.q, d.rho, FROM_J_PLUS)
    aq = float((d.n + d.rho) * recip(d.p) * d.q)
    limit = (1.0 - 2.0 ** (-aq)) ** (-1.0 / float(d.q))
    return StrictnessReport(d, [float(t) for t in terms], [float(c) for c in cum], report,
                            [float(v) for v in sup], limit)
