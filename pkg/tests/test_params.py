import re
from fractions import Fraction as Fr

import pytest
from hypothesis import given, strategies as st

from mskit.params import (
    INF, Family, Flavor, HolderZygmund, InvalidDescriptor, SpaceDescriptor, canonicalize,
    convert, diff_dimension, equivalents, format_number, lift, parse_number, rho_from_u,
    sigma,
)

D = SpaceDescriptor

rationals = st.fractions(min_value=-4, max_value=4, max_denominator=12)
positive = st.fractions(min_value=Fr(1, 12), max_value=6, max_denominator=12)


@st.composite
def descriptors(draw, flavors=("Sub", "Sup", "Classical")):
    n = draw(st.integers(1, 3))
    flavor = draw(st.sampled_from(flavors))
    family = draw(st.sampled_from("BF"))
    s = draw(rationals)
    p = draw(positive)
    q = draw(st.one_of(positive, st.just(INF)))
    if flavor == "Classical":
        rho = None
    else:
        rho = draw(st.fractions(min_value=-n, max_value=0, max_denominator=8))
        if flavor == "Sub" and rho == 0:
            rho = Fr(-1, 8)
    return D(family, flavor, s, p, q, rho, n)


# -- sigma ---------------------------------------------------------------

@pytest.mark.parametrize("t,p,want", [(3, 2, 0), (2, "1/2", 2), (0, "1/10", 0)])
def test_sigma_examples(t, p, want):
    assert sigma(t, p) == want


def test_sigma_at_p_infinity():
    assert sigma(2, INF) == 0


@given(st.fractions(min_value=0, max_value=5), st.fractions(min_value=1, max_value=50))
def test_sigma_vanishes_for_p_at_least_one(t, p):
    assert sigma(t, p) == 0


def test_sigma_rejects_negative_t():
    with pytest.raises(ValueError):
        sigma(-1, 2)


# -- differential dimension -------------------------------------------------

def test_diff_dimension_examples():
    assert diff_dimension(D("B", "Sup", 1, 2, 2, -1, 3)) == Fr(1, 2)
    assert diff_dimension(D("B", "Classical", 2, 1, 1, None, 2)) == 0
    for p in (Fr(1, 3), Fr(2), Fr(7, 5)):
        d = D("F", "Sup", Fr(3, 2) / p, p, 2, Fr(-3, 2), 3)
        assert diff_dimension(d) == 0


@given(descriptors(flavors=("Sub", "Sup")))
def test_diff_dimension_same_for_both_f_names(d):
    if d.family is Family.F and d.rho_clan:
        for e in equivalents(d):
            assert diff_dimension(e) == diff_dimension(d)


# -- conversions -------------------------------------------------------------

def test_convert_examples():
    assert convert(D("B", "Sup", 0, 2, 2, -3, 3), "MorreyU") == 2
    assert convert(D("B", "Sup", 0, 1, 2, -1, 2), "Tau") == Fr(1, 2)
    assert convert(D("B", "Sup", 0, 2, 2, -1, 2), "HybridR") == Fr(-1, 2)


def test_convert_rejects_u_for_nonnegative_rho():
    with pytest.raises(ValueError):
        convert(D("B", "Sup", 0, 2, 2, 0, 2), "MorreyU")


@given(st.integers(1, 4), positive, st.fractions(min_value=Fr(1, 100), max_value=1))
def test_morrey_u_round_trip(n, p, frac):
    rho = -n * frac
    u = convert(D("B", "Sup", 0, p, 1, rho, n), "MorreyU")
    assert rho_from_u(u, p, n) == rho


# -- canonical forms -----------------------------------------------------------

def test_canonicalize_examples():
    rep, cite, _ = canonicalize(D("F", "Sub", 1, 2, 3, Fr(-3, 2), 3))
    assert rep == D("F", "Sup", 1, 2, 3, Fr(-3, 2), 3)
    assert "2.42" in cite
    rep, cite, _ = canonicalize(D("B", "Sub", 1, 2, INF, -1, 2))
    assert rep == D("B", "Sup", 1, 2, INF, -1, 2)
    assert "2.57" in cite
    rep, _, _ = canonicalize(D("B", "Sup", 1, 2, 2, 2, 2))
    assert rep == HolderZygmund(2, 2)


def test_canonicalize_classical_and_bpp():
    rep, _, _ = canonicalize(D("B", "Sup", 1, 2, 2, -2, 2))
    assert rep.flavor is Flavor.CLASSICAL
    rep, _, _ = canonicalize(D("B", "Sup", 1, 2, 2, -1, 2))
    assert rep.family is Family.F


def test_zero_clan_alias_is_flagged():
    _, _, note = canonicalize(D("B", "Sup", 1, 2, INF, 0, 2))
    assert "alias" in note


@given(descriptors())
def test_canonicalize_idempotent(d):
    rep = canonicalize(d)[0]
    assert canonicalize(rep)[0] == rep


@given(descriptors(flavors=("Sub", "Sup")))
def test_equivalents_closed_and_canonical_inside(d):
    eq = equivalents(d)
    assert eq[0] == d
    for e in eq:
        assert set(equivalents(e)) == set(eq)
    if d.rho_clan:
        assert canonicalize(d)[0] in eq


# -- lift ------------------------------------------------------------------------

def test_lift_examples():
    d = D("B", "Sub", 0, 1, 1, -1, 2)
    assert lift(d, 2).s == 2
    assert lift(d, 0) == d


@given(descriptors(), rationals)
def test_lift_group_property(d, sig):
    assert lift(lift(d, sig), -sig) == d


# -- descriptor validation and serialisation ----------------------------------

@pytest.mark.parametrize("args,fragment", [
    (("B", "Sub", 0, 2, 1, 0, 2), "rho in [-n, 0)"),
    (("B", "Sup", 0, 2, 1, -3, 2), "rho >= -n"),
    (("B", "Classical", 0, 2, 1, -1, 2), "rho = -n"),
    (("B", "Sup", 0, INF, 1, -1, 2), "p < infinity"),
    (("B", "Sup", 0, 0, 1, -1, 2), "p > 0"),
    (("B", "Sup", 0, 1, -1, -1, 2), "q > 0"),
    (("B", "Sup", 0, 1, 1, -1, 0), "n must be"),
    (("B", "Sup", 0, 1, 1, None, 2), "rho is required"),
])
def test_invalid_descriptors_name_the_invariant(args, fragment):
    with pytest.raises(InvalidDescriptor, match=re.escape(fragment)):
        D(*args)


def test_classical_allows_p_infinity():
    d = D("B", "Classical", 0, INF, INF, None, 1)
    assert d.p is INF and d.rho == -1


@given(descriptors())
def test_json_round_trip(d):
    assert D.from_json(d.to_json()) == d


def test_json_uses_fraction_strings_and_inf():
    obj = D("B", "Sub", Fr(-3, 4), 2, INF, Fr(-1, 2), 1).to_json()
    assert obj["s"] == "-3/4" and obj["q"] == "inf" and obj["p"] == 2


def test_parse_number_forms():
    assert parse_number("3/5") == Fr(3, 5)
    assert parse_number("inf") is INF
    assert parse_number(float("inf")) is INF
    assert isinstance(parse_number("0.5"), float)
    assert format_number(Fr(6, 3)) == 2
    with pytest.raises(ValueError):
        parse_number("abc")
