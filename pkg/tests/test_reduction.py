import math

import numpy as np
import pytest

from hopred import (
    HoppingModel,
    TwoStateModel,
    factorize_two_state,
    reduce_one_state_vd,
    reduce_one_state_vt,
    reduce_two_state,
    rotate,
    transport_stats,
    two_state_aggregates,
)
from hopred.errors import (
    DegenerateVelocity,
    Infeasible,
    InfeasibleAggregates,
    NoRealFactorization,
    ReductionError,
)
from hopred.reduction import one_state_stats, two_state_stats

from conftest import random_model, rel


# -- (V, T) ----------------------------------------------------------------

def test_vt_reference(reference):
    rep = reduce_one_state_vt(reference)
    assert rep.reduced.forward_rate == pytest.approx(12 / 13, rel=1e-15)
    assert rep.reduced.backward_rate == pytest.approx(1 / 13, rel=1e-15)
    assert set(rep.preserved) == {"V", "T"}
    D_orig, D_red = rep.discarded["D"]
    assert D_orig == pytest.approx(1713 / 4394, rel=1e-14)
    # D_r = L^2 (1 + Gamma) / (2 R_N)
    assert D_red == pytest.approx((1 + 1 / 12) / (2 * 13 / 12), rel=1e-15)


def test_vt_identity_on_one_state(one_state):
    r = reduce_one_state_vt(one_state).reduced
    assert (r.forward_rate, r.backward_rate) == pytest.approx((2.0, 1.0), rel=1e-15)


def test_vt_unbiased_is_symmetric():
    r = reduce_one_state_vt(HoppingModel([1.0, 3.0, 2.0], [3.0, 1.0, 2.0], 1.0)).reduced
    assert r.forward_rate == pytest.approx(r.backward_rate, rel=1e-15)


def test_vt_preservation_property():
    rng = np.random.default_rng(1)
    for _ in range(300):
        m = random_model(rng, zero_backward=0.1)
        st = transport_stats(m)
        r = reduce_one_state_vt(m).reduced
        L = m.step_length
        assert abs((r.forward_rate - r.backward_rate) * L - st.velocity) <= \
            1e-12 * max(abs(st.velocity), r.forward_rate * L)
        assert rel(1 / (r.forward_rate + r.backward_rate), st.period_mfpt) < 1e-12


# -- (V, D) ----------------------------------------------------------------

def test_vd_reference_is_infeasible(reference):
    # 2x2 system: u_r - w_r = V/L = 11/13, u_r + w_r = 2D/L^2 = 1713/2197
    with pytest.raises(Infeasible) as info:
        reduce_one_state_vd(reference)
    assert info.value.forward_rate == pytest.approx(1786 / 2197, rel=1e-13)
    assert info.value.backward_rate == pytest.approx(-73 / 2197, rel=1e-12)
    assert info.value.backward_rate < 0


def test_vd_identity_on_one_state(one_state):
    r = reduce_one_state_vd(one_state).reduced
    assert (r.forward_rate, r.backward_rate) == pytest.approx((2.0, 1.0), rel=1e-13)


def test_vd_unbiased_is_symmetric():
    m = HoppingModel([1.0, 3.0, 2.0], [3.0, 1.0, 2.0], 1.0)
    rep = reduce_one_state_vd(m)
    assert rep.reduced.forward_rate == pytest.approx(rep.reduced.backward_rate, rel=1e-12)
    assert rep.reduced.forward_rate == pytest.approx(transport_stats(m).diffusion, rel=1e-12)


def test_vd_matches_linear_system_and_preserves():
    rng = np.random.default_rng(2)
    feasible = infeasible = 0
    for _ in range(400):
        m = random_model(rng, n_max=12)
        st = transport_stats(m)
        L = m.step_length
        u_lin = (st.velocity / L + 2 * st.diffusion / L**2) / 2
        w_lin = (2 * st.diffusion / L**2 - st.velocity / L) / 2
        try:
            rep = reduce_one_state_vd(m)
        except Infeasible as exc:
            infeasible += 1
            assert exc.backward_rate < 0 or exc.forward_rate <= 0
            scale = abs(u_lin) + abs(w_lin)
            assert abs(exc.backward_rate - w_lin) <= 1e-9 * scale
            assert abs(exc.forward_rate - u_lin) <= 1e-9 * scale
            # both rates nonnegative requires 2D/L^2 >= |V|/L
            assert abs(st.randomness) < 1
            continue
        feasible += 1
        r = rep.reduced
        assert rel(r.forward_rate, u_lin) < 1e-9
        assert rep.preservation_error["V"] < 1e-10 or abs(st.velocity) < 1e-12
        assert rep.preservation_error["D"] < 1e-10
        assert st.randomness is None or abs(st.randomness) >= 1 - 1e-9
    assert feasible > 20 and infeasible > 20


def test_vd_never_clamps():
    m = HoppingModel([5.0, 5.0, 5.0, 5.0], [0.0, 0.0, 0.0, 0.0], 1.0)
    with pytest.raises(Infeasible) as info:
        reduce_one_state_vd(m)
    assert info.value.backward_rate < 0


# -- (V, T, D) -------------------------------------------------------------

def test_two_state_reference(reference):
    agg = two_state_aggregates(reference)
    assert (agg.u, agg.w, agg.sigma) == pytest.approx((6.0, 0.5, 6.5), rel=1e-14)
    rep = reduce_two_state(reference)
    r = rep.reduced
    assert r.w_r0 == r.w_r1 == pytest.approx(math.sqrt(0.5), rel=1e-15)
    assert r.u_r0 >= r.u_r1
    assert r.u_r0 * r.u_r1 == pytest.approx(6.0, rel=1e-12)
    assert r.u_r0 + r.u_r1 == pytest.approx(6.5 - math.sqrt(2), rel=1e-12)
    assert max(rep.preservation_error.values()) < 1e-10


def test_two_state_statistics_formulas(reference):
    V, T, D = two_state_stats(6.0, 0.5, 6.5)
    assert (V, T, D) == pytest.approx((11 / 13, 1.0, 1713 / 4394), rel=1e-14)


def test_one_state_stats():
    assert one_state_stats(reduce_one_state_vt(HoppingModel([2.0], [1.0], 1.0)).reduced) == \
        pytest.approx((1.0, 1 / 3, 1.5))


def test_one_state_has_no_two_state_refinement(one_state):
    with pytest.raises(InfeasibleAggregates):
        reduce_two_state(one_state)


def test_unbiased_model_is_degenerate():
    with pytest.raises(DegenerateVelocity):
        reduce_two_state(HoppingModel([1.0, 2.0], [2.0, 1.0], 1.0))


def test_vtd_preservation_property():
    rng = np.random.default_rng(3)
    ok = flagged = 0
    for _ in range(300):
        m = random_model(rng, N=int(rng.integers(2, 33)))
        st = transport_stats(m)
        try:
            agg = two_state_aggregates(m)
        except ReductionError:
            flagged += 1
            continue
        V, T, D = two_state_stats(agg.u, agg.w, agg.sigma, m.step_length)
        assert rel(V, st.velocity) < 1e-10
        assert rel(T, st.period_mfpt) < 1e-10
        assert rel(D, st.diffusion) < 1e-10
        try:
            rep = reduce_two_state(m)
        except NoRealFactorization:
            flagged += 1
            continue
        ok += 1
        assert max(rep.preservation_error.values()) < 1e-10
    assert ok > 200


def test_aggregates_match_printed_expressions_in_high_precision():
    from mpmath import mp, mpf, fprod

    rng = np.random.default_rng(7)
    with mp.workdps(60):
        for _ in range(40):
            m = random_model(rng, N=int(rng.integers(2, 16)))
            U = [mpf(x) for x in m.u]
            W = [mpf(x) for x in m.w]
            N = len(U)

            def arc(j, step):
                tot, prod = mpf(1), mpf(1)
                for k in range(1, N):
                    i = (j + step * k) % N
                    prod *= (W[i] / U[i]) if step > 0 else (W[(i + 1) % N] / U[i])
                    tot += prod
                return tot / U[j]

            r = [arc(j, 1) for j in range(N)]
            s = [arc(j, -1) for j in range(N)]
            R = sum(r)
            S = sum(s[j] * sum((k + 1) * r[(k + j + 1) % N] for k in range(N)) for j in range(N))
            G = sum(U[j] * r[j] * s[j] for j in range(N))
            g = 1 - fprod(W[j] / U[j] for j in range(N))
            den = (N + g) * R**2 - G * R - g * S
            u_ref = N * g * g / den
            agg = two_state_aggregates(m)
            assert rel(agg.u, float(u_ref)) < 1e-13
            assert rel(agg.sigma, float(R * u_ref)) < 1e-13


def test_printed_expressions_agree_when_well_conditioned(reference):
    from hopred.reduction import _two_state_aggregates_printed
    a = two_state_aggregates(reference)
    b = _two_state_aggregates_printed(reference)
    assert (a.u, a.w, a.sigma) == pytest.approx((b.u, b.w, b.sigma), rel=1e-13)


def test_two_state_round_trip():
    rng = np.random.default_rng(4)
    for _ in range(500):
        u0, u1, w0, w1 = np.exp(rng.uniform(np.log(1e-2), np.log(1e2), 4))
        t = TwoStateModel(u0, u1, w0, w1, 1.0)
        if abs(1 - t.w / t.u) < 1e-6:
            continue
        agg = two_state_aggregates(t.to_hopping())
        assert rel(agg.u, t.u) < 1e-12
        assert rel(agg.w, t.w) < 1e-12
        assert rel(agg.sigma, t.sigma) < 1e-12


def test_reductions_ignore_labelling():
    rng = np.random.default_rng(5)
    for _ in range(30):
        m = random_model(rng, N=int(rng.integers(2, 9)))
        base = reduce_one_state_vt(m).reduced
        for k in range(1, m.period_count):
            r = reduce_one_state_vt(rotate(m, k)).reduced
            assert rel(r.forward_rate, base.forward_rate) < 1e-12
            assert rel(r.backward_rate, base.backward_rate) < 1e-12
        try:
            agg = two_state_aggregates(m)
        except ReductionError:
            continue
        for k in range(1, m.period_count):
            other = two_state_aggregates(rotate(m, k))
            assert rel(other.u, agg.u) < 1e-10 and rel(other.sigma, agg.sigma) < 1e-10


# -- factorization --------------------------------------------------------

def test_factorize_reference():
    t = factorize_two_state(6.0, 0.5, 6.5)
    s = 6.5 - math.sqrt(2)
    disc = math.sqrt(s * s - 24)
    assert t.u_r0 == pytest.approx((s + disc) / 2, rel=1e-14)
    assert t.u_r1 == pytest.approx((s - disc) / 2, rel=1e-14)
    assert t.w_r0 == t.w_r1 == pytest.approx(math.sqrt(0.5), rel=1e-15)
    assert (t.u, t.w, t.sigma) == pytest.approx((6.0, 0.5, 6.5), rel=1e-12)


def test_factorize_boundary_case():
    t = factorize_two_state(1.0, 0.0, 2.0)
    assert (t.u_r0, t.u_r1, t.w_r0, t.w_r1) == (1.0, 1.0, 0.0, 0.0)


def test_factorize_violating_amgm():
    with pytest.raises(NoRealFactorization):
        factorize_two_state(4.0, 1.0, 5.0)


def test_factorize_policy_alias():
    a = factorize_two_state(6.0, 0.5, 6.5, "symmetric")
    b = factorize_two_state(6.0, 0.5, 6.5, "symmetric-backward")
    assert a == b


def test_factorize_free_policy():
    t = factorize_two_state(6.0, 0.5, 6.5, "free", free_parameter=2.0)
    assert t.u_r0 == 2.0 and t.u_r1 == 3.0
    assert sorted([t.w_r0, t.w_r1]) == pytest.approx([0.5, 1.0], rel=1e-14)
    with pytest.raises(NoRealFactorization):
        factorize_two_state(6.0, 0.5, 6.5, "free", free_parameter=0.5)
    with pytest.raises(NoRealFactorization):
        factorize_two_state(6.0, 0.5, 6.5, "free")


def test_factorization_soundness():
    rng = np.random.default_rng(6)
    for _ in range(300):
        u, w = np.exp(rng.uniform(-4, 4, 2))
        sigma = (2 * math.sqrt(u) + 2 * math.sqrt(w)) * float(np.exp(rng.uniform(0, 2)))
        t = factorize_two_state(u, w, sigma)
        assert rel(t.u, u) < 1e-12 and rel(t.w, w) < 1e-12 and rel(t.sigma, sigma) < 1e-12
        assert t.u_r0 >= t.u_r1 > 0 and t.w_r0 >= 0


def test_free_policy_round_trip(reference):
    rep = reduce_two_state(reference, policy="free", free_parameter=2.0)
    assert rep.reduced.u_r0 == 2.0
    assert max(rep.preservation_error.values()) < 1e-10
