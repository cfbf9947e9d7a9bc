from fractions import Fraction

import pytest

from ietkz.combinatorics import CombinatorialData
from ietkz.diophantine import (
    KIND_A,
    KIND_A_PRIME,
    KIND_B,
    KIND_C,
    KIND_D,
    dual_roth_profiles,
    length_diagnostics,
    restricted_operator_norm,
    roth_profiles,
)
from ietkz.errors import HorizontalDegenerate, InsufficientTrajectory
from ietkz.induction import Steps, make_state, run, run_window
from ietkz.numerics import Quadratic, sum_norm, to_float

ROT2 = CombinatorialData.from_rows(["A", "B"], ["B", "A"])
REV3 = CombinatorialData.from_rows(["A", "B", "C"], ["C", "B", "A"])

PHI = Quadratic(Fraction(1, 2), Fraction(1, 2), 5)
ONE = Quadratic(1, 0, 5)


def golden_forward(steps=30):
    return run(make_state(ROT2, (PHI, ONE)), "forward", Steps(steps))


def golden_window(back=24, fwd=24):
    st = make_state(ROT2, (PHI, ONE), (ONE, ONE - PHI))
    return run_window(st, back=back, fwd=fwd)


def rev3_window(back=26, fwd=26):
    tau = (
        Fraction(2) + Fraction(3049, 10007),
        Fraction(1, 11),
        Fraction(-2) + Fraction(5, 10007),
    )
    st = make_state(REV3, (Fraction(104729), Fraction(75541), Fraction(42649)), tau)
    return run_window(st, back=back, fwd=fwd)


def test_kind_a_ratios_decay_for_bounded_type():
    prof = roth_profiles(golden_forward(30), KIND_A, tol=0.2)
    assert len(prof.blocks) == 15
    ratios = [b.ratio for b in prof.blocks]
    assert all(r >= 0 for r in ratios)
    assert prof.tail_ratio <= 0.2
    assert prof.passes


def test_kind_a_prime_at_most_kind_a_ratio_scale():
    traj = golden_forward(30)
    pa = roth_profiles(traj, KIND_A)
    pap = roth_profiles(traj, KIND_A_PRIME)
    # for d=2 the cone gate equals positivity; both profiles are bounded
    assert pap.passes and pa.passes


def test_kind_b_gap_positive_and_approaching_two_for_golden():
    prof = roth_profiles(golden_forward(26), KIND_B, tol=0.2)
    gaps = [g.gap for g in prof.gaps]
    assert all(g > 0 for g in gaps[3:])
    assert gaps[-1] == pytest.approx(2.0, abs=0.35)  # det-1 2x2: second sv is 1/first
    assert prof.passes


def test_restricted_norm_transpose_and_contraction():
    traj = golden_forward(16)
    B = traj.matrix(0, 12)
    assert sum_norm(B) == sum_norm(B.T)
    lam0 = traj.state(0).lam
    restr = restricted_operator_norm(B, lam0)
    # the zero-integral direction contracts while the norm grows
    assert to_float(restr) < 1.0 < traj.norm(0, 12)


def test_kind_c_and_d_profiles():
    traj = rev3_window()
    pd = roth_profiles(traj, KIND_D)
    assert pd.stable_dim == pd.genus == 1
    assert pd.passes
    pc = roth_profiles(traj, KIND_C, tol=0.35)
    assert pc.coherence
    assert pc.tail_ratio is not None


def test_dual_profile_bounded_type_golden():
    traj = golden_window(back=30, fwd=2)
    prof = dual_roth_profiles(traj, tol=0.25)
    assert prof.tail_ratio is not None and prof.tail_ratio <= 0.25
    assert prof.theta_estimate is not None and prof.theta_estimate > 0
    assert prof.passes
    # block norms stay bounded for the periodic backward path
    block_norms = [b.block_norm for b in prof.blocks]
    assert max(block_norms) == min(block_norms)


def test_dual_profile_rational_sample_degenerates_honestly():
    # exact rational suspension data meets a horizontal connection almost
    # immediately; the error carries the partial trajectory
    st = make_state(ROT2, (Fraction(5), Fraction(3)), (Fraction(1), Fraction(-1, 2)))
    with pytest.raises(HorizontalDegenerate) as err:
        run(st, "backward", Steps(20))
    assert err.value.trajectory is not None


def test_dual_profile_needs_blocks():
    traj = golden_window(back=3, fwd=2)
    with pytest.raises(InsufficientTrajectory):
        dual_roth_profiles(traj)


def test_length_diagnostics_forward_golden():
    traj = golden_forward(24)
    rep = length_diagnostics(traj, tau_tol=0.3)
    assert rep.partition_exact
    # bounded type: the implied upper constants stay in a bounded band
    cs = [r["c_upper"] for r in rep.rows[4:]]
    assert max(cs) / min(cs) < 50
    # sandwich lower inequality is exact everywhere
    assert all(row["exact_first"] for row in rep.series["sandwich"])
    assert not rep.violations


def test_series_ratios_bounded_by_three_times_first_term():
    traj = golden_forward(30)
    rep = length_diagnostics(traj, tau_tol=0.5)
    tail = rep.series["tail_over_first"]
    # drop the last entries where the tail is truncated by the horizon
    usable = tail[: max(1, len(tail) - 3)]
    assert all(row["ratio"] <= 3.0 for row in usable)
    head = rep.series["head_over_last"]
    assert all(row["ratio"] <= 3.0 for row in head)


def test_p6_rows_present_when_multiple_singularities():
    traj = rev3_window(back=2, fwd=26)
    rep = length_diagnostics(traj, tau_tol=0.5)
    assert rep.p6_rows, "s=2 class should produce lower-bound rows"
    for row in rep.p6_rows:
        assert row["k"] >= row["l"]


def test_length_diagnostics_backward():
    traj = golden_window(back=24, fwd=2)
    rep = length_diagnostics(traj, tau_tol=0.4, direction="backward")
    assert rep.partition_exact
    # dual lengths shrink like the inverse norm: implied constants bounded
    lows = [r["c_lower"] for r in rep.rows[4:]]
    ups = [r["c_upper"] for r in rep.rows[4:]]
    assert max(ups) / min(ups) < 100
    assert all(x > 0 for x in lows)
    aux = rep.series["aux_entry_bound"]
    assert aux and all(row["min_entry_ratio"] > 0 for row in aux[3:])


def test_profile_rows_export_shape():
    prof = roth_profiles(golden_forward(16), KIND_A)
    rows = prof.rows()
    assert rows and set(rows[0]) == {"k_or_n", "lhs", "rhs", "ratio"}
