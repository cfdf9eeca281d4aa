import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from legapprox import expressions as ex
from legapprox.errors import ExpressionError


def test_parse_basic():
    e = ex.parse("-y + 0.05*w**2")
    assert sp.simplify(e - (-ex.y + 0.05 * ex.w ** 2)) == 0


def test_conj_pushed_to_leaves():
    e = ex.parse("conj(z*w)")
    assert e.free_symbols == {ex.zbar, ex.bar(ex.w)}


def test_complex_literal_and_constants():
    e = ex.parse("2j*z + pi")
    assert complex(e.subs(ex.z, 1)) == pytest.approx(complex(sp.pi.evalf(), 2))


@pytest.mark.parametrize("bad", ["z**w", "import os", "foo(z)", "z +", "__import__('os')", "q*2", "zeta3"])
def test_rejects(bad):
    with pytest.raises(ExpressionError):
        ex.parse(bad)


def test_higher_fiber_variables():
    e = ex.parse("zeta3*zeta4", n=2)
    assert {s.name for s in e.free_symbols} == {"zeta3", "zeta4"}


@settings(max_examples=40, deadline=None)
@given(a=st.integers(-5, 5), b=st.integers(-5, 5), k=st.integers(0, 4))
def test_round_trip(a, b, k):
    e = ex.parse(f"{a}*z**{k} + {b}*w*y")
    assert sp.simplify(ex.parse(ex.to_text(e)) - e) == 0
