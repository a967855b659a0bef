"""Decision engine and dyadic sequence-norm toolkit for Morrey smoothness spaces."""

from .params import (  # noqa: F401
    INF, TOLERANCE, Family, Flavor, HolderZygmund, InvalidDescriptor, SpaceDescriptor,
    Target, canonicalize, convert, diff_dimension, equivalents, lift, parse_number,
    rho_from_u, sigma,
)
from .verdict import Status, Verdict  # noqa: F401
from .classifier import (  # noqa: F401
    EmbeddingQuery, Element, Ground, Mode, Property, TargetKind, TargetSpace,
    check_property, compactness_exponents, embeds, functional_chiQ, growth_envelope,
    interpolate, member, spaces_equal, trace,
)

__version__ = "0.1.0"
