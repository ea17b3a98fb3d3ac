from itertools import combinations
from math import comb

import pytest

from steinercodes.designs import verify_design
from steinercodes.errors import AdmissibilityError, ParameterError, Undecided
from steinercodes.exactcover import (
    ExactCoverInstance,
    SolverBudget,
    base_blocks,
    build_orbit_catalog,
    construct_cyclic_steiner,
    cyclic_instance,
    is_cyclic,
    is_exact_cover,
    orbit,
    solve_exact_cover,
)


def all_exact_covers(instance):
    """Oracle: try every subset of rows."""
    n = len(instance.rows)
    found = []
    for size in range(n + 1):
        for chosen in combinations(range(n), size):
            if is_exact_cover(instance, chosen):
                found.append(set(chosen))
    return found


def test_small_instance_matches_enumeration():
    inst = ExactCoverInstance(3, [(0, 1), (2,), (0, 2), (1,)])
    assert all_exact_covers(inst) == [{0, 1}, {2, 3}]
    result = solve_exact_cover(inst)
    assert result.status == "solved"
    assert set(result.rows) in all_exact_covers(inst)


def test_empty_instance():
    result = solve_exact_cover(ExactCoverInstance(0, []))
    assert result.status == "solved" and result.rows == []


def test_infeasible_instance():
    result = solve_exact_cover(ExactCoverInstance(2, [(0,)]))
    assert result.status == "infeasible"


def test_budget_gives_undecided_not_infeasible():
    # 12 columns, every pair of adjacent columns a row: many branches before success
    inst = ExactCoverInstance(13, [(i, i + 1) for i in range(12)] + [(i,) for i in range(0, 12, 2)])
    result = solve_exact_cover(inst, SolverBudget(max_nodes=1))
    assert result.status == "undecided"


@pytest.mark.parametrize("rows", [[()], [(0, 0)], [(5,)]])
def test_malformed_instances(rows):
    with pytest.raises(ParameterError):
        ExactCoverInstance(3, rows)


def test_seed_changes_row_order_but_result_is_always_a_cover():
    inst = ExactCoverInstance(4, [(0, 1), (2, 3), (0, 2), (1, 3), (0, 3), (1, 2)])
    for seed in range(5):
        r = solve_exact_cover(inst, SolverBudget(seed=seed))
        assert is_exact_cover(inst, r.rows)
        assert r.rows == solve_exact_cover(inst, SolverBudget(seed=seed)).rows


def test_orbit_catalog_z7():
    cat = build_orbit_catalog(2, 7, 3)
    assert len(cat.k_orbits) == 5
    assert all(n == 7 for _, n in cat.k_orbits)
    assert sum(n for _, n in cat.t_orbits) == comb(7, 2)


def test_orbit_catalog_short_orbit():
    cat = build_orbit_catalog(2, 4, 3)
    assert cat.k_orbits == [((0, 1, 2), 4)]
    assert len(orbit((0, 2), 4)) == 2


def test_orbit_catalog_z26():
    cat = build_orbit_catalog(3, 26, 4)
    assert sum(n for _, n in cat.k_orbits) == comb(26, 4) == 14950
    assert sum(n for _, n in cat.t_orbits) == comb(26, 3)
    assert all(26 % n == 0 for _, n in cat.k_orbits + cat.t_orbits)
    short = [rep for rep, n in cat.k_orbits if n < 26]
    assert all(n == 13 for rep, n in cat.k_orbits if n < 26) and short
    inst, _ = cyclic_instance(cat)
    assert inst.num_columns == 100


def test_filtered_orbits_never_double_cover():
    cat = build_orbit_catalog(3, 26, 4)
    inst, kept = cyclic_instance(cat)
    for i in kept:
        assert all(c == 1 for c in cat.incidence[i].values())


def test_cyclic_fano():
    d = construct_cyclic_steiner(2, 7, 3)
    assert verify_design(d).is_valid and d.b == 7
    assert is_cyclic(d)
    assert len(base_blocks(d)) == 1
    (base,) = base_blocks(d)
    diffs = sorted({(a - b) % 7 for a in base for b in base if a != b})
    assert diffs == [1, 2, 3, 4, 5, 6]


def test_cyclic_sts13():
    d = construct_cyclic_steiner(2, 13, 3)
    assert d.b == 26 and verify_design(d).is_valid and is_cyclic(d)
    assert len(base_blocks(d)) == 2


def test_cyclic_sqs10_uses_short_orbits():
    d = construct_cyclic_steiner(3, 10, 4)
    assert d.b == 30 and verify_design(d).is_valid and is_cyclic(d)


def test_cyclic_sqs26(sqs26):
    assert sqs26.b == 650
    assert verify_design(sqs26).is_valid
    assert is_cyclic(sqs26)


def test_cyclic_search_is_reproducible():
    a = construct_cyclic_steiner(2, 19, 3, SolverBudget(seed=3))
    b = construct_cyclic_steiner(2, 19, 3, SolverBudget(seed=3))
    assert a == b


def test_cyclic_inadmissible_parameters():
    with pytest.raises(AdmissibilityError):
        construct_cyclic_steiner(2, 8, 3)


def test_cyclic_infeasible_is_reported():
    # STS(9) exists but no cyclic one does
    with pytest.raises(AdmissibilityError, match="cyclic"):
        construct_cyclic_steiner(2, 9, 3)


def test_cyclic_budget_exhaustion():
    with pytest.raises(Undecided):
        construct_cyclic_steiner(3, 26, 4, SolverBudget(max_nodes=1))
