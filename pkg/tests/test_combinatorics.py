import numpy as np
import pytest

from ietkz.combinatorics import (
    BOTTOM,
    TOP,
    CombinatorialData,
    all_irreducible,
    arrow,
    build_diagram,
    complete_blocks,
    completeness,
    diagram_to_json,
    elementary_matrix,
    incoming_arrow,
    omega_matrix,
    path_matrix,
    rauzy_move,
    singular_structure,
    validate_pi,
)
from ietkz.errors import NonConsecutivePath, NotBijection, Reducible
from ietkz.numerics import exact_det, identity_matrix, sum_norm

ROT2 = CombinatorialData.from_rows(["A", "B"], ["B", "A"])
REV3 = CombinatorialData.from_rows(["A", "B", "C"], ["C", "B", "A"])
REV4 = CombinatorialData.from_rows(["A", "B", "C", "D"], ["D", "C", "B", "A"])


def test_validate_accepts_rotation():
    validate_pi(ROT2)


def test_validate_rejects_identity():
    with pytest.raises(Reducible) as err:
        validate_pi(CombinatorialData.from_rows(["A", "B"], ["A", "B"]))
    assert err.value.k == 1


def test_validate_rejects_non_bijection():
    with pytest.raises(NotBijection):
        validate_pi(CombinatorialData(("A", "B"), ("A", "A"), ("B", "A")))


def test_validate_reverse4_checks_all_prefixes():
    validate_pi(REV4)
    # a reducible d=4 example splitting at k=2
    with pytest.raises(Reducible):
        validate_pi(CombinatorialData.from_rows(["A", "B", "C", "D"], ["B", "A", "D", "C"]))


def test_omega_rotation():
    om = omega_matrix(ROT2)
    assert om.tolist() == [[0, 1], [-1, 0]]


def test_omega_reverse4_upper_triangle_positive():
    om = omega_matrix(REV4)
    for i in range(4):
        for j in range(4):
            expected = 1 if i < j else (-1 if i > j else 0)
            assert om[i, j] == expected


def test_omega_derived_d3_example():
    # bottom row (B, C, A) means pi_b(A)=3, pi_b(B)=1, pi_b(C)=2
    pi = CombinatorialData.from_rows(["A", "B", "C"], ["B", "C", "A"])
    om = omega_matrix(pi)
    assert om[0, 1] == 1 and om[0, 2] == 1 and om[1, 2] == 0
    # antisymmetry against the brute definition
    assert (om + om.T == np.zeros((3, 3), dtype=object)).all()


def test_rotation_moves_fix_the_vertex():
    assert rauzy_move(ROT2, TOP) == ROT2
    assert rauzy_move(ROT2, BOTTOM) == ROT2


def test_inverse_round_trips():
    for pi in (ROT2, REV3, REV4):
        for kind in (TOP, BOTTOM):
            fwd = rauzy_move(pi, kind)
            assert rauzy_move(fwd, kind, inverse=True) == pi
            inv = rauzy_move(pi, kind, inverse=True)
            assert rauzy_move(inv, kind) == pi


def test_bottom_move_reverse4_hand_trace():
    # bottom move reinserts the top-last letter right after the bottom-last
    # letter in the top row: A B C D -> A D B C, bottom unchanged.
    got = rauzy_move(REV4, BOTTOM)
    assert got.top == ("A", "D", "B", "C")
    assert got.bottom == ("D", "C", "B", "A")


def test_diagram_sizes():
    assert len(build_diagram(ROT2)) == 1
    assert len(build_diagram(REV3)) == 3
    assert len(build_diagram(REV4)) == 7


def test_diagram_rotation_self_loops():
    diag = build_diagram(ROT2)
    assert len(diag.arrows) == 2
    assert all(a.source == a.target == ROT2 for a in diag.arrows)


def test_diagram_closure_matches_brute_enumeration_d3():
    # union of classes of all irreducible vertices partitions that set
    seen = set()
    sizes = []
    for pi in all_irreducible(3):
        if pi.key() in seen:
            continue
        diag = build_diagram(pi)
        sizes.append(len(diag))
        for v in diag.vertices:
            assert v.key() not in seen
            seen.add(v.key())
    total = sum(1 for _ in all_irreducible(3))
    assert sum(sizes) == total


def test_degree_two_in_and_out():
    for pi in build_diagram(REV4).vertices:
        assert incoming_arrow(pi, TOP).target == pi
        assert incoming_arrow(pi, BOTTOM).target == pi
        assert arrow(pi, TOP).source == pi


def test_single_arrow_matrix_is_elementary():
    a = arrow(REV3, TOP)  # winner C (top-last), loser A (bottom-last)
    B = elementary_matrix(a)
    expect = identity_matrix(3)
    expect[REV3.index("A"), REV3.index("C")] = 1
    assert (B == expect).all()
    assert (path_matrix([a]) == expect).all()


def test_empty_path_matrix_is_identity():
    assert (path_matrix([], d=3) == identity_matrix(3)).all()


def test_path_matrix_requires_consecutive_arrows():
    a = arrow(REV3, TOP)
    b = arrow(REV3, BOTTOM)
    if a.target != b.source:
        with pytest.raises(NonConsecutivePath):
            path_matrix([a, b])


def test_fibonacci_entries_for_alternating_rotation_path():
    path = []
    cur = ROT2
    kinds = [BOTTOM, TOP] * 5
    for kind in kinds:
        a = arrow(cur, kind)
        path.append(a)
        cur = a.target
    B = path_matrix(path)
    assert exact_det(B) == 1
    # alternating arrows give Fibonacci growth of the norm
    norms = [int(sum_norm(path_matrix(path[:k], d=2))) for k in range(1, 11)]
    for x, y, z in zip(norms, norms[1:], norms[2:]):
        assert z == y + x


def test_symplectic_relation_all_arrows_small_d():
    for d in (2, 3, 4):
        seen = set()
        for pi in all_irreducible(d):
            if pi.key() in seen:
                continue
            diag = build_diagram(pi)
            seen.update(v.key() for v in diag.vertices)
            for a in diag.arrows:
                B = elementary_matrix(a)
                lhs = B @ omega_matrix(a.source) @ B.T
                assert (lhs == omega_matrix(a.target)).all()


def test_monotone_entries_under_extension():
    cur = REV4
    path = []
    prev = identity_matrix(4)
    for kind in [TOP, BOTTOM, TOP, TOP, BOTTOM, TOP, BOTTOM, BOTTOM]:
        a = arrow(cur, kind)
        path.append(a)
        cur = a.target
        B = path_matrix(path)
        assert all(x >= y for x, y in zip(B.ravel(), prev.ravel()))
        assert all(x >= 0 for x in B.ravel())
        assert exact_det(B) == 1
        prev = B


def test_completeness_examples():
    # two arrows of distinct types on the rotation class: both letters win once
    a1 = arrow(ROT2, TOP)
    a2 = arrow(a1.target, BOTTOM)
    assert completeness([a1, a2]) == 1
    assert completeness([a1, a2, a1, a2]) == 2
    # a path where B never wins has completeness 0
    assert completeness([arrow(ROT2, TOP)]) == 0
    assert complete_blocks([a1, a2, a1]) == [2]


def test_positive_matrix_for_complete_enough_paths():
    # any (2d-3)-complete path with d >= 3 has strictly positive matrix
    import random

    rng = random.Random(5)
    for seed_pi in (REV3, REV4):
        d = seed_pi.d
        cur = seed_pi
        path = []
        while completeness(path) < 2 * d - 3:
            a = arrow(cur, rng.choice([TOP, BOTTOM]))
            path.append(a)
            cur = a.target
        B = path_matrix(path)
        assert all(x > 0 for x in B.ravel())


def test_singular_structure_examples():
    s2 = singular_structure(ROT2)
    assert (s2.s, s2.g) == (1, 1)
    s4 = singular_structure(REV4)
    assert (s4.s, s4.g) == (1, 2)
    s3 = singular_structure(REV3)
    assert (s3.s, s3.g) == (2, 1)


def test_singular_structure_invariants_d_up_to_5():
    for d in (2, 3, 4, 5):
        for pi in all_irreducible(d, top_identity_only=True):
            st = singular_structure(pi)  # raises ConsistencyFailure on mismatch
            assert pi.d == 2 * st.g + st.s - 1


def test_diagram_json_shape():
    js = diagram_to_json(build_diagram(REV3))
    assert len(js["vertices"]) == 3
    assert {a["type"] for a in js["arrows"]} == {TOP, BOTTOM}
    assert all(set(a) == {"src", "dst", "type", "winner", "loser"} for a in js["arrows"])
