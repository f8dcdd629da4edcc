import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from semifix.errors import DomainError, FormatError, InvalidParameterError
from semifix.triangle import (
    CLOSED_FORM, NUMERIC_SUP, c_alpha, check_axioms, custom, eval_phi, from_json,
    make_builtin, nested_bound, psi, psi_inverse,
)

BUILTINS = [
    make_builtin("sum"),
    make_builtin("max"),
    make_builtin("scaled_sum", K=1.0),
    make_builtin("scaled_sum", K=2.0),
    make_builtin("scaled_sum", K=4.0),
    make_builtin("power", q=0.5),
    make_builtin("power", q=1.0),
    make_builtin("power", q=2.0),
    make_builtin("power", q=3.0),
]
ids = [tf.describe() for tf in BUILTINS]


def test_make_builtin_examples():
    assert eval_phi(make_builtin("sum"), 2, 3) == 5
    assert eval_phi(make_builtin("max"), 2, 3) == 3
    assert eval_phi(make_builtin("power", q=2), 3, 4) == 5.0


@pytest.mark.parametrize("family,K,q", [("scaled_sum", 0.5, None), ("scaled_sum", None, None),
                                        ("power", None, 0.0), ("power", None, -1.0), ("nope", None, None)])
def test_make_builtin_rejects_bad_parameters(family, K, q):
    with pytest.raises(InvalidParameterError):
        make_builtin(family, K=K, q=q)


def test_eval_phi_examples():
    assert eval_phi(make_builtin("sum"), 0, 0) == 0
    assert eval_phi(make_builtin("scaled_sum", K=2), 1, 1) == 4
    assert eval_phi(make_builtin("power", q=0.5), 1, 1) == 4.0


@pytest.mark.parametrize("u,v", [(-1.0, 0.0), (0.0, math.inf), (math.nan, 1.0), (1.0, -1e-300)])
def test_eval_phi_domain(u, v):
    with pytest.raises(DomainError):
        eval_phi(make_builtin("sum"), u, v)


def test_builtin_flags_and_json_round_trip():
    for tf in BUILTINS:
        assert tf.homogeneous and tf.continuous_at_origin and tf.continuous_everywhere
        again = from_json(tf.to_json())
        assert again.family == tf.family and again.K == tf.K and again.q == tf.q
    with pytest.raises(FormatError):
        from_json({"family": "power"})
    with pytest.raises(FormatError):
        from_json({"K": 2})


@pytest.mark.parametrize("tf", BUILTINS, ids=ids)
def test_check_axioms_builtins_pass(tf):
    assert check_axioms(tf, 1000, 1).passed


def test_check_axioms_zero_witness():
    v = check_axioms(custom(lambda u, v: u + v + 1), 50, 3)
    assert not v.passed
    assert v.violations[0].axiom == "zero"
    assert (v.violations[0].u, v.violations[0].v) == (0.0, 0.0)


def test_check_axioms_homogeneity_failure():
    v = check_axioms(custom(lambda u, v: u + v * v, homogeneous=True), 1000, 1)
    assert not v.passed
    homog = [w for w in v.violations if w.axiom == "homogeneity"]
    assert v.counts["homogeneity"] > 0 and homog
    assert all(w.k != 1.0 and w.v > 0.0 for w in homog)


def test_check_axioms_is_deterministic():
    tf = custom(lambda u, v: u + v * v, homogeneous=True)
    assert check_axioms(tf, 300, 9) == check_axioms(tf, 300, 9)


@given(u=st.floats(0, 1e6), v=st.floats(0, 1e6), k=st.floats(0, 1e6, allow_subnormal=False))
@settings(max_examples=300)
def test_homogeneity_property(u, v, k):
    for tf in BUILTINS:
        lhs = eval_phi(tf, k * u, k * v)
        rhs = k * eval_phi(tf, u, v)
        if tf.family == "max":
            assert lhs == rhs
        else:
            assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-300)


@given(u=st.floats(0, 1e6), v=st.floats(0, 1e6), w=st.floats(0, 1e6))
def test_symmetry_and_monotonicity_property(u, v, w):
    lo, hi = sorted((u, w))
    for tf in BUILTINS:
        assert eval_phi(tf, u, v) == eval_phi(tf, v, u)
        assert eval_phi(tf, lo, v) <= eval_phi(tf, hi, v) * (1 + 1e-15)


def _geometric_oracle(alpha, p, q=1.0, K=1.0):
    # K + K^2 a + ... + K^p a^(p-1) + K^p a^p for scaled sums; sum of a^(iq) for powers
    if K != 1.0:
        return sum(K ** (i + 1) * alpha**i for i in range(p)) + K**p * alpha**p
    return sum(alpha ** (i * q) for i in range(p + 1)) ** (1.0 / q)


def test_nested_bound_examples():
    assert nested_bound(make_builtin("max"), 0.5, 10) == 1.0
    assert nested_bound(make_builtin("sum"), 0.5, 3) == 1.875
    assert nested_bound(make_builtin("power", q=2), 0.5, 2) == pytest.approx(math.sqrt(1 + 0.25 + 0.0625), rel=1e-15)
    assert nested_bound(make_builtin("power", q=2), 0.5, 2) == pytest.approx(1.14564, abs=1e-5)


@pytest.mark.parametrize("alpha", [0.1, 0.45, 0.8])
@pytest.mark.parametrize("p", [1, 2, 7, 30])
def test_nested_bound_matches_direct_sums(alpha, p):
    assert nested_bound(make_builtin("sum"), alpha, p) == pytest.approx(_geometric_oracle(alpha, p), rel=1e-13)
    for q in (0.5, 2.0, 3.0):
        got = nested_bound(make_builtin("power", q=q), alpha, p)
        assert got == pytest.approx(_geometric_oracle(alpha, p, q=q), rel=1e-13)
    got = nested_bound(make_builtin("scaled_sum", K=1.5), alpha, p)
    assert got == pytest.approx(_geometric_oracle(alpha, p, K=1.5), rel=1e-13)


def test_c_alpha_examples():
    assert c_alpha(make_builtin("sum"), 0.5).value == 2.0
    assert c_alpha(make_builtin("sum"), 0.5).method == CLOSED_FORM
    assert c_alpha(make_builtin("scaled_sum", K=2), 0.25).value == 4.0
    v = c_alpha(make_builtin("scaled_sum", K=2), 0.6)
    assert not v.bounded and v.method == CLOSED_FORM


def test_c_alpha_power_closed_form():
    assert c_alpha(make_builtin("power", q=0.5), 0.25).value == pytest.approx(4.0, rel=1e-15)
    assert c_alpha(make_builtin("max"), 0.9).value == 1.0


@pytest.mark.parametrize("tf", [make_builtin("sum"), make_builtin("max")]
                         + [make_builtin("power", q=q) for q in (0.5, 1, 2, 3)])
@pytest.mark.parametrize("alpha", [0.1, 0.5, 0.8])
def test_numeric_sup_below_closed_form_within_tail(tf, alpha):
    closed = c_alpha(tf, alpha).value
    num = c_alpha(tf, alpha, numeric=True)
    assert num.method == NUMERIC_SUP and num.bounded
    assert num.value <= closed + 1e-12
    if tf.family == "sum":
        assert closed - num.value <= alpha**65 / (1 - alpha) + 1e-12


def test_numeric_sup_detects_growth():
    # increments grow by alpha*K = 1.2 per depth
    v = c_alpha(make_builtin("scaled_sum", K=2), 0.6, numeric=True)
    assert not v.bounded and v.method == NUMERIC_SUP
    # a custom phi without closed form goes down the numeric path automatically
    v = c_alpha(custom(lambda u, w: 3 * (u + w)), 0.5)
    assert not v.bounded
    v = c_alpha(custom(lambda u, w: max(u, w)), 0.5)
    assert v.bounded and v.value == 1.0 and v.p_used == 64


def test_c_alpha_value_at_least_one():
    for tf in BUILTINS:
        for alpha in (0.0, 0.2, 0.7):
            v = c_alpha(tf, alpha)
            if v.bounded:
                assert v.value >= 1.0
                if tf.family == "scaled_sum":
                    assert v.value >= tf.K


def test_psi_examples():
    assert psi(make_builtin("max"), 0.3) == 1.0
    assert psi(make_builtin("sum"), 2) == 3.0
    assert psi(make_builtin("power", q=2), 1) == pytest.approx(math.sqrt(2), rel=1e-15)


def test_psi_inverse_examples():
    mx = make_builtin("max")
    assert psi_inverse(mx, 2) == 2
    assert psi_inverse(mx, 0.5) == 0
    assert psi_inverse(make_builtin("power", q=2), math.sqrt(2)) == pytest.approx(1.0, abs=1e-12)
    # 2 - 2^-51 is the smallest float with 2 - 2^-51 + 1 == 3
    assert psi_inverse(make_builtin("sum"), 3) == pytest.approx(2.0, abs=1e-15)
    assert psi_inverse(make_builtin("sum"), 3) + 1.0 == 3.0


@pytest.mark.parametrize("tf", BUILTINS, ids=ids)
def test_psi_inverse_is_float_exact(tf):
    rng = np.random.default_rng(4)
    for t in np.concatenate([rng.uniform(0, 3, 200), 10 ** rng.uniform(-8, 6, 200)]):
        tau = psi(tf, float(t))
        r = psi_inverse(tf, tau)
        assert r <= t and psi(tf, r) >= tau
        if r > 0:
            assert psi(tf, float(np.nextafter(r, 0.0))) < tau


def test_psi_inverse_bisection_matches_closed_form():
    # generic phi(u, v) = u + v goes through bisection; Psi(t) = t + 1
    generic = custom(lambda u, v: u + v)
    for tau in (0.0, 0.5, 1.0, 3.0, 17.25, 1e6):
        assert psi_inverse(generic, tau) == pytest.approx(max(tau - 1, 0.0), abs=1e-9)
        assert psi_inverse(generic, tau) <= max(tau - 1, 0.0)


def test_psi_inverse_unattainable_level():
    bounded = custom(lambda u, v: min(u + v, 5.0))
    assert psi_inverse(bounded, 4.0) == pytest.approx(3.0, abs=1e-9)
    assert psi_inverse(bounded, 6.0) == math.inf
    with pytest.raises(DomainError):
        psi_inverse(bounded, math.inf)


def _grid_inverse(psi_fn, tau, grid):
    # brute-force infimum over a grid: first grid point with psi >= tau
    for t in grid:
        if psi_fn(t) >= tau:
            return t
    return math.inf


@pytest.mark.parametrize("tf", BUILTINS, ids=ids)
def test_psi_inverse_against_grid_oracle(tf):
    grid = np.linspace(0.0, 20.0, 200_001)
    step = grid[1] - grid[0]
    for tau in (0.3, 1.0, 1.7, 4.0, 9.5):
        oracle = _grid_inverse(lambda t: tf.evaluator(float(t), 1.0), tau, grid)
        assert abs(psi_inverse(tf, tau) - oracle) <= step + 1e-12


@pytest.mark.parametrize("tf", BUILTINS, ids=ids)
def test_psi_inverse_galois_property(tf):
    for tau in (0.5, 1.0, 2.0, 10.0, 1234.5):
        t = psi_inverse(tf, tau)
        assert psi(tf, t + 1e-6) >= tau
