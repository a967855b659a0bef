"""Random coefficient arrays and parameter draws shared by several test files."""

from fractions import Fraction as Fr

import numpy as np
from hypothesis import strategies as st

from mskit.params import INF
from mskit.seqnorm import CoefficientArray

PS = (Fr(1, 3), Fr(1, 2), Fr(2, 3), Fr(1), Fr(3, 2), Fr(2), Fr(4))
QS = (Fr(1, 2), Fr(1), Fr(2), Fr(3), INF)
SS = (Fr(-1), Fr(-1, 3), Fr(0), Fr(1, 2), Fr(1))


def rhos(n):
    return [r for r in (Fr(-n), -n + Fr(1, 4), Fr(-3, 2), Fr(-1), Fr(-1, 2), Fr(-1, 4), Fr(0))
            if -n <= r <= 0]


def random_array(rng, n=None, j_max=None, size=None, origin=True, squares=False):
    """Sparse array with a few entries; ``origin`` lets the support cross 0."""
    n = int(rng.integers(1, 3)) if n is None else n
    j_max = int(rng.integers(0, 9)) if j_max is None else j_max
    size = int(rng.integers(1, 13)) if size is None else size
    a = CoefficientArray(n, j_max)
    for _ in range(size):
        j = int(rng.integers(0, j_max + 1))
        lo = -2 if origin else 0
        m = [int(x) for x in rng.integers(lo, 2 ** j + (2 if origin else 0), n)]
        g = int(rng.integers(0, 2 ** n - 1))
        if (j, g, tuple(m)) in a.entries:
            continue
        if squares:
            v = float(int(rng.integers(1, 6)) ** 2)
        else:
            v = float(rng.uniform(-1, 1))
        a.add(j, m, v, g)
    return a


def random_params(rng, n, finite_q=False):
    p = PS[int(rng.integers(len(PS)))]
    qs = QS[:-1] if finite_q else QS
    q = qs[int(rng.integers(len(qs)))]
    s = SS[int(rng.integers(len(SS)))]
    rs = [r for r in rhos(n) if -n < r < 0]
    rho = rs[int(rng.integers(len(rs)))]
    return s, p, q, rho


def generator(seed):
    return np.random.Generator(np.random.Philox(seed))


@st.composite
def arrays(draw, max_j=6, n_values=(1, 2), origin=True):
    n = draw(st.sampled_from(n_values))
    j_max = draw(st.integers(0, max_j))
    a = CoefficientArray(n, j_max)
    k = draw(st.integers(0, 10))
    for _ in range(k):
        j = draw(st.integers(0, j_max))
        lo = -2 if origin else 0
        hi = 2 ** j - 1 + (2 if origin else 0)
        m = draw(st.lists(st.integers(lo, hi), min_size=n, max_size=n))
        g = draw(st.integers(0, 2 ** n - 2))
        v = draw(st.floats(-4, 4, allow_nan=False, allow_infinity=False))
        a.add(j, m, v, g)
    return a
