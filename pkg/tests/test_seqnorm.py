import math
from fractions import Fraction as Fr

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from mskit.params import INF
from mskit.seqnorm import (
    FROM_J_PLUS, FROM_ZERO, CoefficientArray, CoefficientFileError, dtype, growth_analyze,
    growth_series, lq, norm_classic, norm_sub_flavor, norm_sup_flavor, sub_level_terms,
)

import brute
from arrays import PS, QS, SS, arrays, generator, random_array, random_params, rhos

REL = 1e-12


def close(x, y, rel=REL):
    return abs(x - y) <= rel * max(abs(x), abs(y), 1e-300)


def bq(q):
    return brute.INF if q is INF else q


def single(j, n=1, m=None, v=1.0, j_max=None):
    a = CoefficientArray(n, j if j_max is None else j_max)
    a.add(j, m or [0] * n, v)
    return a


def norms(a, s, p, q, rho):
    return (norm_classic(a, s, p, q), norm_sub_flavor(a, s, p, q, rho),
            norm_sup_flavor(a, s, p, q, rho), norm_sup_flavor(a, s, p, q, rho, FROM_ZERO))


# -- worked examples ------------------------------------------------------------

def test_classic_examples():
    assert norm_classic(single(0), 0, 2, 2) == 1
    for q in (Fr(1, 2), 1, 2, INF):
        assert close(norm_classic(single(5), 1, 2, q), 2 ** 2.5)
    a = CoefficientArray(1, 1)
    a.add(0, [0], 1)
    a.add(1, [0], 1)
    assert norm_classic(a, 0, 1, 1) == 1.5


@pytest.mark.parametrize("j0", [0, 1, 3, 7])
@pytest.mark.parametrize("n,rho", [(1, Fr(-1, 2)), (2, Fr(-1)), (3, Fr(-5, 2))])
@pytest.mark.parametrize("s,p,q", [(Fr(1, 2), Fr(2), Fr(1)), (Fr(-1), Fr(1, 2), INF),
                                   (Fr(0), Fr(3, 2), Fr(2))])
def test_single_entry_closed_form(j0, n, rho, s, p, q):
    a = single(j0, n)
    want = 2.0 ** float(j0 * (s + rho / p))
    assert close(norm_sub_flavor(a, s, p, q, rho), want)
    assert close(norm_sup_flavor(a, s, p, q, rho), want)
    # brute force over J in [-32, j_max] with a generous window
    assert close(brute.sup(list(a.entries.items()), n, j0, s, p, bq(q), rho, extra=4), want)


def test_empty_array_is_zero():
    a = CoefficientArray(2, 4)
    for f in norms(a, 1, 2, 2, -1):
        assert f == 0


@pytest.mark.parametrize("seed", range(20))
def test_classical_slope_reduces_to_classic_inside_unit_cube(seed):
    rng = generator(seed)
    a = random_array(rng, origin=False, j_max=int(rng.integers(0, 7)))
    s, p, q, _ = random_params(rng, a.n)
    assert close(norm_sup_flavor(a, s, p, q, -a.n, FROM_ZERO), norm_classic(a, s, p, q))


def test_delta_model_sub_terms_are_exact_powers():
    n, rho, p, s = 1, Fr(-1, 2), Fr(2), Fr(-1)
    a = CoefficientArray(n, 12)
    for j in range(13):
        a.add(j, [0], 2.0 ** (j * n))
    terms = sub_level_terms(a, s, p, rho)
    eps = 8 * np.finfo(np.longdouble).eps
    for j, t in enumerate(terms):
        e = j * (s + n + rho / p)
        want = np.longdouble(2) ** (np.longdouble(e.numerator) / e.denominator)
        assert abs(t / want - 1) <= eps


def test_inputs_validated():
    a = single(1)
    with pytest.raises(ValueError):
        norm_sub_flavor(a, 0, 2, 2, Fr(1, 2))
    with pytest.raises(ValueError):
        norm_sup_flavor(a, 0, 2, 2, Fr(-3, 2))
    with pytest.raises(ValueError):
        norm_sup_flavor(a, 0, 2, 2, Fr(-1, 2), "FromSomewhere")
    with pytest.raises(ValueError):
        norm_classic(a, 0, 0, 2)


def test_lq_edges():
    assert lq(np.array([3.0]), Fr(1, 3)) == 3.0
    assert lq(np.array([1.0, 2.0, 2.0]), INF) == 2.0
    assert lq(np.zeros(0), 2) == 0
    assert lq(np.array([3.0, 4.0]), 2) == 5.0


# -- brute force -----------------------------------------------------------------

EXACT = [(1, Fr(1, 2), Fr(-1, 2)), (2, Fr(1), Fr(-1))]


@pytest.mark.parametrize("seed", range(40))
def test_exact_agreement_with_exhaustive_search(seed):
    rng = generator(1000 + seed)
    n, p, rho = EXACT[seed % 2]
    a = random_array(rng, n=n, j_max=int(rng.integers(0, 5)), size=int(rng.integers(1, 7)),
                     squares=True)
    ent = [(k, Fr(v)) for k, v in a.entries.items()]
    for s in (Fr(-1), Fr(0), Fr(1)):
        for q in (Fr(1), INF):
            E = brute.Exact
            assert norm_classic(a, s, p, q) == float(brute.classic(ent, n, a.j_max, s, p, bq(q), E))
            assert norm_sub_flavor(a, s, p, q, rho) == float(
                brute.sub(ent, n, a.j_max, s, p, bq(q), rho, E))
            for fz, conv in ((False, FROM_J_PLUS), (True, FROM_ZERO)):
                want = brute.sup(ent, n, a.j_max, s, p, bq(q), rho, fz, E, extra=2)
                assert norm_sup_flavor(a, s, p, q, rho, conv) == float(want)


@pytest.mark.parametrize("seed", range(60))
def test_double_agreement_with_exhaustive_search(seed):
    rng = generator(2000 + seed)
    a = random_array(rng, j_max=int(rng.integers(0, 5)), size=int(rng.integers(1, 8)))
    s, p, q, rho = random_params(rng, a.n)
    ent = list(a.entries.items())
    assert close(norm_classic(a, s, p, q), brute.classic(ent, a.n, a.j_max, s, p, bq(q)))
    assert close(norm_sub_flavor(a, s, p, q, rho), brute.sub(ent, a.n, a.j_max, s, p, bq(q), rho))
    for fz, conv in ((False, FROM_J_PLUS), (True, FROM_ZERO)):
        want = brute.sup(ent, a.n, a.j_max, s, p, bq(q), rho, fz, extra=3)
        assert close(norm_sup_flavor(a, s, p, q, rho, conv), want)


@pytest.mark.parametrize("seed", range(10))
def test_cubes_below_the_covering_level_never_matter(seed):
    rng = generator(3000 + seed)
    a = random_array(rng, j_max=3, size=5)
    s, p, q, rho = random_params(rng, a.n)
    ent = list(a.entries.items())
    low = a.covering_level()
    wide = range(low - 6, a.j_max + 1)
    # re-run the brute force with an artificially deep window
    orig = brute._window
    try:
        brute._window = lambda e, j, x: wide
        deep = brute.sup(ent, a.n, a.j_max, s, p, bq(q), rho, True)
    finally:
        brute._window = orig
    assert close(norm_sup_flavor(a, s, p, q, rho, FROM_ZERO), deep)


def test_support_around_the_origin_terminates():
    a = CoefficientArray(2, 3)
    a.add(3, [-1, -1], 1.0)
    a.add(3, [0, 0], 2.0)
    a.add(0, [-1, 0], 1.0)
    assert a.covering_level() <= 0
    v = norm_sup_flavor(a, 0, 2, 2, -1)
    assert close(v, brute.sup(list(a.entries.items()), 2, 3, 0, 2, 2, -1))


# -- properties --------------------------------------------------------------------

@st.composite
def params(draw, n):
    p = draw(st.sampled_from(PS))
    q = draw(st.sampled_from(QS))
    s = draw(st.sampled_from(SS))
    rho = draw(st.sampled_from([r for r in rhos(n) if -n < r < 0]))
    return s, p, q, rho


@st.composite
def array_and_params(draw, **kw):
    a = draw(arrays(**kw))
    return a, draw(params(a.n))


@settings(max_examples=200, deadline=None)
@given(array_and_params())
def test_sup_flavor_never_exceeds_sub_flavor(ap):
    a, (s, p, q, rho) = ap
    assume(q is not INF)
    assert norm_sup_flavor(a, s, p, q, rho) <= norm_sub_flavor(a, s, p, q, rho)


@settings(max_examples=200, deadline=None)
@given(array_and_params())
def test_flavors_coincide_at_q_infinity(ap):
    a, (s, p, _, rho) = ap
    assert norm_sup_flavor(a, s, p, INF, rho, FROM_ZERO) == norm_sub_flavor(a, s, p, INF, rho)


@settings(max_examples=150, deadline=None)
@given(array_and_params(), st.sampled_from([Fr(1, 3), Fr(-1, 2), Fr(2), Fr(-5, 4)]))
def test_lift_identity(ap, sig):
    a, (s, p, q, rho) = ap
    b = a.copy_with({k: v * 2.0 ** (-k[0] * float(sig)) for k, v in a.entries.items()})
    for x, y in zip(norms(a, s, p, q, rho), norms(b, s + sig, p, q, rho)):
        assert close(x, y)


@settings(max_examples=150, deadline=None)
@given(array_and_params())
def test_larger_q_never_increases_the_norm(ap):
    a, (s, p, _, rho) = ap
    rows = [norms(a, s, p, q, rho) for q in QS]
    for lo, hi in zip(rows, rows[1:]):
        assert all(y <= x for x, y in zip(lo, hi))


@settings(max_examples=150, deadline=None)
@given(array_and_params(), st.floats(-8, 8, allow_nan=False).filter(lambda c: c != 0))
def test_homogeneity(ap, c):
    a, (s, p, q, rho) = ap
    for x, y in zip(norms(a, s, p, q, rho), norms(a.scaled(c), s, p, q, rho)):
        assert close(y, abs(c) * x, 1e-11)


@settings(max_examples=150, deadline=None)
@given(st.data())
def test_quasi_triangle(data):
    a = data.draw(arrays())
    b = data.draw(arrays(n_values=(a.n,)))
    s, p, q, rho = data.draw(params(a.n))
    top = max(a.j_max, b.j_max)
    a, b = a.copy_with(a.entries, top), b.copy_with(b.entries, top)
    total = a.copy_with(a.entries)
    for (j, g, m), v in b.entries.items():
        total.add(j, m, v, g)
    C = max(1, 2 ** float(1 / p - 1)) * max(1, 0 if q is INF else 2 ** float(1 / q - 1))
    for x, y, z in zip(norms(total, s, p, q, rho), norms(a, s, p, q, rho), norms(b, s, p, q, rho)):
        assert x <= C * (y + z) * (1 + 1e-12)


@settings(max_examples=150, deadline=None)
@given(array_and_params(origin=False), st.lists(st.integers(-3, 3), min_size=3, max_size=3))
def test_translation_by_an_integer_vector(ap, shift):
    a, (s, p, q, rho) = ap
    b = a.translated(shift[:a.n])
    for x, y in zip(norms(a, s, p, q, rho), norms(b, s, p, q, rho)):
        assert close(x, y)


def test_translation_moves_cells_geometrically():
    a = single(2, n=2, m=[1, 3])
    assert list(a.translated([1, -1]).entries) == [(2, 0, (5, -1))]


def test_insertion_order_is_irrelevant():
    rng = generator(7)
    a = random_array(rng, n=2, j_max=5, size=12)
    items = list(a.entries.items())
    b = CoefficientArray(2, 5)
    for (j, g, m), v in reversed(items):
        b.add(j, m, v, g)
    assert norms(a, 0, Fr(1, 2), 2, -1) == norms(b, 0, Fr(1, 2), 2, -1)


# -- files -------------------------------------------------------------------------

def test_jsonl_round_trip(tmp_path):
    a = random_array(generator(3), n=2, j_max=4, size=6)
    path = tmp_path / "a.jsonl"
    a.save(path)
    assert CoefficientArray.load(path).entries == a.entries


@pytest.mark.parametrize("text,line", [
    ('{"n": 1, "j_max": 2}\n{"j": 0, "m": [0], "v": 1}\nnot json\n', 3),
    ('{"j": 0}\n', 1),
    ('{"n": 1, "j_max": 2}\n\n{"j": 5, "m": [0], "v": 1}\n', 3),
    ('{"n": 1, "j_max": 2}\n{"j": 1, "m": [0, 1], "v": 1}\n', 2),
    ('{"n": 1, "j_max": 2}\n{"j": 1, "m": [0]}\n', 2),
    ('{"n": 1, "j_max": 2}\n{"j": 1, "G": 1, "m": [0], "v": 1}\n', 2),
    ('', 1),
])
def test_file_errors_carry_line_numbers(text, line):
    with pytest.raises(CoefficientFileError) as info:
        CoefficientArray.from_jsonl(text)
    assert info.value.line == line and str(info.value).startswith(f"line {line}:")


def test_g_tag_cardinality():
    a = CoefficientArray(2, 2)
    a.add(0, [0, 0], 1, 3)
    with pytest.raises(ValueError):
        a.add(1, [0, 0], 1, 3)


# -- growth analysis ---------------------------------------------------------------

def test_growth_examples():
    r = growth_analyze([2 ** (-0.25 * j) for j in range(17)])
    assert r.verdict == "Finite" and abs(r.fitted_rate + 0.25) < 1e-9 and r.r_squared > 0.999
    assert growth_analyze([2 ** (0.5 * j) for j in range(17)]).verdict == "Divergent"
    assert growth_analyze([3.0] * 17).verdict == "Inconclusive"
    assert growth_analyze([1, 2, 4, 8, 16]).verdict == "Inconclusive"
    assert growth_analyze([1, 2, 3, 0, 0, 0, 0, 0]).verdict == "Finite"


def test_noisy_growth_is_not_called_divergent():
    rng = generator(0)
    terms = [2 ** (0.05 * j + float(rng.normal(0, 3))) for j in range(21)]
    r = growth_analyze(terms)
    assert r.verdict != "Divergent" or r.r_squared >= 0.98


def test_growth_report_csv():
    terms, cum = growth_series(single(3, j_max=6), 0, 2, 2, Fr(-1, 2))
    r = growth_analyze(terms, cumulative=cum)
    rows = r.to_csv().splitlines()
    assert rows[0] == "level,term,cumulative" and len(rows) == 8


def test_precision_toggle(monkeypatch):
    assert dtype() is np.longdouble
    monkeypatch.setenv("MSKIT_PRECISION", "double")
    assert dtype() is np.float64
    a = single(4, n=2)
    assert close(norm_sub_flavor(a, Fr(1, 3), 2, 2, Fr(-1, 2)), 2 ** (4 * (1 / 3 - 1 / 4)))
