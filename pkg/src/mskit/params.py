"""Space descriptors and exact parameter calculus.

Numbers are kept as :class:`fractions.Fraction` whenever the caller supplies
an exact value (int, Fraction or an ``"a/b"`` string).  Floats are accepted
and compared against thresholds with a tolerance band (see :data:`TOLERANCE`).
Infinity is the explicit singleton :data:`INF`, never ``float('inf')``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional, Union

__all__ = [
    "INF", "TOLERANCE", "Family", "Flavor", "Target", "Number",
    "InvalidDescriptor", "SpaceDescriptor", "HolderZygmund",
    "parse_number", "format_number", "is_inf", "is_exact", "recip", "cmp",
    "sigma", "diff_dimension", "convert", "canonicalize", "equivalents",
    "lift", "rho_from_u",
]

#: Half-width of the band within which float inputs count as lying on a
#: breaking line.  Exact (rational) inputs never use it.
TOLERANCE = 1e-9


class _Infinity:
    """The value +infinity as a distinct state for p and q."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    def __str__(self):
        return "inf"

    def __float__(self):
        return math.inf

    def __hash__(self):
        return hash("mskit-inf")

    def __eq__(self, other):
        return other is self

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return other is self

    def __gt__(self, other):
        return other is not self

    def __ge__(self, other):
        return True

    def __reduce__(self):
        return (_Infinity, ())


INF = _Infinity()

Number = Union[Fraction, float, _Infinity]


class InvalidDescriptor(ValueError):
    """Raised when parameters violate a descriptor invariant."""


class Family(str, enum.Enum):
    B = "B"
    F = "F"


class Flavor(str, enum.Enum):
    SUB = "Sub"
    SUP = "Sup"
    CLASSICAL = "Classical"


class Target(str, enum.Enum):
    MORREY_U = "MorreyU"
    TAU = "Tau"
    HYBRID_R = "HybridR"


def is_inf(x) -> bool:
    return x is INF


def is_exact(x) -> bool:
    return isinstance(x, (Fraction, int)) or x is INF


def parse_number(x) -> Number:
    """Convert user input into a Fraction, float or INF.

    Integers, Fractions and strings of the form ``"a"`` or ``"a/b"`` stay
    exact; decimal strings and Python floats become floats.
    """
    if x is INF:
        return INF
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        if math.isinf(x) and x > 0:
            return INF
        if not math.isfinite(x):
            raise ValueError(f"not a finite number: {x!r}")
        return x
    if isinstance(x, str):
        t = x.strip().lower()
        if t in ("inf", "+inf", "infinity", "oo", "∞"):
            return INF
        if any(c in t for c in ".e") and "/" not in t:
            return parse_number(float(t))
        try:
            return Fraction(t)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"cannot parse number {x!r}") from exc
    raise TypeError(f"unsupported number type {type(x).__name__}")


def format_number(x) -> Union[str, float, int]:
    """JSON form: ints stay ints, other rationals become ``"num/den"``."""
    if x is INF:
        return "inf"
    if isinstance(x, Fraction):
        if x.denominator == 1:
            return int(x.numerator)
        return f"{x.numerator}/{x.denominator}"
    return x


def recip(x) -> Number:
    if x is INF:
        return Fraction(0)
    if isinstance(x, Fraction):
        return 1 / x
    return 1.0 / x


def cmp(a, b) -> int:
    """Three-way comparison; float operands use the :data:`TOLERANCE` band."""
    if a is INF or b is INF:
        if a is b:
            return 0
        return 1 if a is INF else -1
    if is_exact(a) and is_exact(b):
        return (a > b) - (a < b)
    d = float(a) - float(b)
    if abs(d) <= TOLERANCE:
        return 0
    return 1 if d > 0 else -1


def _min(a, b):
    return a if cmp(a, b) <= 0 else b


def _max(a, b):
    return a if cmp(a, b) >= 0 else b


@dataclass(frozen=True)
class SpaceDescriptor:
    """One space Λ_ϱ A^s_{p,q} (Sub), Λ^ϱ A^s_{p,q} (Sup) or A^s_{p,q}."""

    family: Family
    flavor: Flavor
    s: Number
    p: Number
    q: Optional[Number]
    rho: Number = None
    n: int = 1

    def __post_init__(self):
        fam = self.family if isinstance(self.family, Family) else Family(str(self.family).upper())
        fl = self.flavor
        if not isinstance(fl, Flavor):
            fl = {f.value.lower(): f for f in Flavor}.get(str(fl).lower())
            if fl is None:
                raise InvalidDescriptor(f"unknown flavor {self.flavor!r}")
        n = self.n
        if isinstance(n, Fraction) and n.denominator == 1:
            n = int(n)
        if not isinstance(n, int) or isinstance(n, bool) or n < 1:
            raise InvalidDescriptor(f"n must be an integer >= 1, got {self.n!r}")
        s, p = parse_number(self.s), parse_number(self.p)
        # q may be left unspecified; predicates then answer with conditions on q
        q = None if self.q is None else parse_number(self.q)
        rho = -Fraction(n) if self.rho is None and fl is Flavor.CLASSICAL else self.rho
        if rho is None:
            raise InvalidDescriptor("rho is required for Sub and Sup flavors")
        rho = parse_number(rho)
        if s is INF or rho is INF:
            raise InvalidDescriptor("s and rho must be finite")
        if p is not INF and p <= 0:
            raise InvalidDescriptor(f"p > 0 violated (p={p})")
        if q is not None and q is not INF and q <= 0:
            raise InvalidDescriptor(f"q > 0 violated (q={q})")
        if fl is Flavor.CLASSICAL:
            if cmp(rho, -n) != 0:
                raise InvalidDescriptor(f"Classical requires rho = -n (rho={rho}, n={n})")
            rho = Fraction(-n)
        else:
            if p is INF:
                raise InvalidDescriptor("p < infinity required for Sub and Sup flavors")
            if cmp(rho, -n) < 0:
                raise InvalidDescriptor(f"rho >= -n violated (rho={rho}, n={n})")
            if fl is Flavor.SUB and cmp(rho, 0) >= 0:
                raise InvalidDescriptor(f"Sub flavor requires rho in [-n, 0) (rho={rho})")
        for name, val in (("family", fam), ("flavor", fl), ("s", s), ("p", p),
                          ("q", q), ("rho", rho), ("n", n)):
            object.__setattr__(self, name, val)

    # convenient predicates
    @property
    def classical(self) -> bool:
        """True for the n-clan (ϱ = -n, any flavor)."""
        return self.flavor is Flavor.CLASSICAL or cmp(self.rho, -self.n) == 0

    @property
    def zero_clan(self) -> bool:
        return self.flavor is Flavor.SUP and cmp(self.rho, 0) == 0

    @property
    def rho_clan(self) -> bool:
        return cmp(self.rho, -self.n) > 0 and cmp(self.rho, 0) < 0

    @property
    def slope(self) -> Number:
        """|ϱ|, or n for classical spaces."""
        return Fraction(self.n) if self.classical else abs(self.rho)

    def to_json(self) -> dict:
        return {
            "family": self.family.value,
            "flavor": self.flavor.value,
            "s": format_number(self.s),
            "p": format_number(self.p),
            "q": None if self.q is None else format_number(self.q),
            "rho": format_number(self.rho),
            "n": self.n,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "SpaceDescriptor":
        missing = {"family", "flavor", "s", "p", "n"} - set(obj)
        if missing:
            raise InvalidDescriptor(f"missing fields: {sorted(missing)}")
        return cls(obj["family"], obj["flavor"], obj["s"], obj["p"], obj.get("q"),
                   obj.get("rho"), obj["n"])

    def label(self) -> str:
        if self.classical:
            pre = ""
        elif self.flavor is Flavor.SUB:
            pre = f"Λ_{{{self.rho}}}"
        else:
            pre = f"Λ^{{{self.rho}}}"
        q = "q" if self.q is None else self.q
        return (f"{pre}{self.family.value}^{{{self.s}}}_{{{self.p},{q}}}"
                f"(R^{self.n})")


@dataclass(frozen=True)
class HolderZygmund:
    """The Hölder-Zygmund space C^{smoothness}(ℝⁿ)."""

    smoothness: Number
    n: int

    def to_json(self) -> dict:
        return {"holder_zygmund": format_number(self.smoothness), "n": self.n}

    def label(self) -> str:
        return f"C^{{{self.smoothness}}}(R^{self.n})"


def sigma(t, p) -> Number:
    """σ^t_p = t (max(1/p, 1) - 1)."""
    t, p = parse_number(t), parse_number(p)
    if t is INF or cmp(t, 0) < 0:
        raise ValueError("sigma requires finite t >= 0")
    if p is not INF and p <= 0:
        raise ValueError("sigma requires p > 0")
    return t * (_max(recip(p), Fraction(1)) - 1)


def diff_dimension(d: SpaceDescriptor) -> Number:
    """Differential dimension s - |ϱ|/p (s - n/p for classical spaces)."""
    return d.s - d.slope * recip(d.p)


def convert(d: SpaceDescriptor, target) -> Number:
    """Translate ϱ into the Morrey u, the τ or the hybrid r parameter."""
    target = Target(target)
    if d.p is INF:
        raise ValueError("conversions need p < infinity")
    if target is Target.MORREY_U:
        if cmp(d.rho, 0) >= 0:
            raise ValueError("MorreyU needs rho < 0")
        return -d.n * d.p / d.rho
    if target is Target.TAU:
        return (1 + d.rho / d.n) / d.p
    return d.rho / d.p


def rho_from_u(u, p, n: int) -> Number:
    """Inverse of the MorreyU conversion: ϱ = -np/u."""
    return -n * parse_number(p) / parse_number(u)


def _is_zero(x) -> bool:
    return cmp(x, 0) == 0


def canonicalize(d):
    """Return ``(representative, citation, note)`` for the coincidence class of d.

    Classical spaces are recognised from ϱ = -n; Λ^ϱ with ϱ > 0 becomes a
    Hölder-Zygmund marker; F spaces use the Λ^ϱ form; Λ_ϱ B_{p,∞} becomes
    Λ^ϱ B_{p,∞}; Λ^ϱ B_{p,p} becomes Λ^ϱ F_{p,p}.
    """
    if isinstance(d, HolderZygmund):
        return d, "Prop 2.9(ii)", ""
    note = ""
    if d.flavor is not Flavor.CLASSICAL and d.classical:
        return (replace(d, flavor=Flavor.CLASSICAL),
                "Eq. 2.32: rho = -n gives the classical space", note)
    if d.flavor is Flavor.SUP and cmp(d.rho, 0) > 0:
        return (HolderZygmund(d.s + d.rho / d.p, d.n),
                "Prop 2.9(ii): Λ^ϱ A^s_{p,q} = C^{s+ϱ/p}", note)
    if d.zero_clan:
        if d.q is INF and d.family is Family.B:
            note = "Remark 2.10: q = inf at rho = 0 is read as the alias B^s_{inf,inf}"
        return d, "Def 2.11(iii)", note
    if d.classical:
        return d, "Eq. 2.38", note
    if d.family is Family.F and d.flavor is Flavor.SUB:
        return (replace(d, flavor=Flavor.SUP),
                "Eq. 2.42: Λ_ϱ F^s_{p,q} = Λ^ϱ F^s_{p,q}", note)
    if d.family is Family.B and d.flavor is Flavor.SUB and d.q is INF:
        return (replace(d, flavor=Flavor.SUP),
                "Eq. 2.57: Λ_ϱ B^s_{p,inf} = Λ^ϱ B^s_{p,inf}", note)
    if (d.family is Family.B and d.flavor is Flavor.SUP and d.q is not None
            and cmp(d.q, d.p) == 0):
        return (replace(d, family=Family.F, q=d.p),
                "Eq. 2.55: Λ^ϱ B^s_{p,p} = Λ^ϱ F^s_{p,p}", note)
    return d, "Def 2.11(ii)", note


def equivalents(d: SpaceDescriptor) -> list:
    """All descriptors naming the same space as d under the proven coincidences.

    The result is ordered deterministically with d first.
    """
    seen = [d]
    frontier = [d]
    while frontier:
        cur = frontier.pop()
        nxt = []
        if cur.rho_clan:
            if cur.family is Family.F:
                other = Flavor.SUP if cur.flavor is Flavor.SUB else Flavor.SUB
                nxt.append(replace(cur, flavor=other))
            if cur.family is Family.B and cur.q is INF:
                other = Flavor.SUP if cur.flavor is Flavor.SUB else Flavor.SUB
                nxt.append(replace(cur, flavor=other))
            if cur.flavor is Flavor.SUP and cur.q is not None and cmp(cur.q, cur.p) == 0:
                other = Family.F if cur.family is Family.B else Family.B
                nxt.append(replace(cur, family=other))
        for e in nxt:
            if e not in seen:
                seen.append(e)
                frontier.append(e)
    return seen


def lift(d: SpaceDescriptor, sigma_shift) -> SpaceDescriptor:
    """Shift the smoothness: the lift I_σ maps A^s onto A^{s+σ}."""
    return replace(d, s=d.s + parse_number(sigma_shift))
