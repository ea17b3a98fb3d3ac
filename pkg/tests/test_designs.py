import random
from itertools import combinations
from math import comb

import pytest

from steinercodes.designs import (
    Design,
    construct_boolean_sqs,
    construct_sts,
    cube_census,
    double_sqs,
    format_design,
    lambda_s,
    one_factorization,
    parse_design,
    read_design,
    verify_design,
    write_design,
)
from steinercodes.errors import AdmissibilityError, DesignError, ParameterError

FANO = ((0, 1, 2), (0, 3, 4), (0, 5, 6), (1, 3, 5), (1, 4, 6), (2, 3, 6), (2, 4, 5))


def brute_count(blocks, subset):
    return sum(1 for b in blocks if set(subset) <= set(b))


def test_fano_is_valid():
    report = verify_design(Design(2, 7, 3, 1, FANO))
    assert report.is_valid
    assert report.lambda_profile == [7, 3, 1]
    assert all(report.identity_checks.values())
    # oracle: every pair lies in exactly one block
    assert all(brute_count(FANO, p) == 1 for p in combinations(range(7), 2))


def test_fano_minus_block_reports_three_uncovered_pairs():
    report = verify_design(Design(2, 7, 3, 1, FANO[1:]))
    assert not report.is_valid
    assert sorted(report.violations) == [((0, 1), 0), ((0, 2), 0), ((1, 2), 0)]


@pytest.mark.parametrize(
    "blocks, needle",
    [
        (((0, 1), (0, 2, 3)), "block 0"),
        (((0, 1, 9),), "outside"),
        (((0, 1, 2), (0, 1, 2)), "repeats block 0"),
        (((2, 1, 0),), "increasing"),
    ],
)
def test_structural_errors_name_the_block(blocks, needle):
    with pytest.raises(DesignError, match=needle):
        Design(2, 7, 3, 1, blocks)


def test_boolean_sqs8_against_enumeration():
    d = construct_boolean_sqs(3)
    zero_sum = [s for s in combinations(range(8), 4) if s[0] ^ s[1] ^ s[2] ^ s[3] == 0]
    assert list(d.blocks) == zero_sum
    assert d.b == 14
    assert verify_design(d).lambda_profile == [14, 7, 3, 1]
    assert (0, 1, 2, 3) in d.block_set()


def test_cube_census():
    assert cube_census(construct_boolean_sqs(3)) == {"face": 6, "opposite-edges": 6, "tetrahedron": 2}


def test_boolean_sqs_bad_dimension():
    with pytest.raises(ParameterError):
        construct_boolean_sqs(2)


@pytest.mark.parametrize("v", [7, 9, 13, 15, 19, 21, 25, 27, 31, 33, 37, 39])
def test_sts_orders(v):
    d = construct_sts(v)
    assert d.b == v * (v - 1) // 6
    assert verify_design(d).is_valid
    assert list(d.blocks) == sorted(d.blocks)


def test_sts_canonical_first_block():
    assert construct_sts(7).blocks[0] == (0, 1, 2)
    assert construct_sts(13).b == 26


@pytest.mark.parametrize("v", [8, 5, 11, 1, 3])
def test_sts_inadmissible(v):
    with pytest.raises(AdmissibilityError, match="mod 6"):
        construct_sts(v)


def test_one_factorization_small():
    f = one_factorization(4)
    assert len(f) == 3 and all(len(m) == 2 for m in f)


@pytest.mark.parametrize("v", [2, 4, 8, 10, 26])
def test_one_factorization_covers_each_pair_once(v):
    factors = one_factorization(v)
    assert len(factors) == v - 1
    for m in factors:
        assert sorted(x for e in m for x in e) == list(range(v))
    pairs = [e for m in factors for e in m]
    assert sorted(pairs) == list(combinations(range(v), 2))


def test_one_factorization_odd():
    with pytest.raises(ParameterError):
        one_factorization(5)


def test_doubling_counts(sqs8, sqs16):
    assert sqs16.b == 2 * 14 + 7 * 4**2 == 140
    assert verify_design(sqs16).is_valid
    sqs32 = double_sqs(sqs16)
    assert sqs32.b == 2 * 140 + 15 * 8**2 == 1240
    assert verify_design(sqs32).is_valid


def test_doubling_rejects_triple_systems(fano):
    with pytest.raises(ParameterError):
        double_sqs(fano)


def _designs_under_test(fano, sqs8, sqs16, sqs26):
    return [fano, construct_sts(13), construct_sts(25), sqs8, sqs16, sqs26]


def test_counting_identities(fano, sqs8, sqs16, sqs26):
    for d in _designs_under_test(fano, sqs8, sqs16, sqs26):
        r = lambda_s(d, 1)
        assert d.b * d.k == d.v * r
        assert comb(d.v, d.t) * d.lam == d.b * comb(d.k, d.t)
        assert r * (d.k - 1) == lambda_s(d, 2) * (d.v - 1)


def test_lambda_s_matches_brute_force_small(fano, sqs8, sqs16):
    for d in [fano, sqs8, sqs16]:
        for s in range(d.t + 1):
            expected = lambda_s(d, s)
            for subset in combinations(range(d.v), s):
                assert brute_count(d.blocks, subset) == expected


def test_lambda_s_sqs26_sampled(sqs26):
    rng = random.Random(7)
    assert lambda_s(sqs26, 0) == 650
    assert lambda_s(sqs26, 1) == 100
    assert lambda_s(sqs26, 2) == 12
    assert lambda_s(sqs26, 3) == 1
    for s in range(4):
        for _ in range(40):
            subset = rng.sample(range(26), s)
            assert brute_count(sqs26.blocks, subset) == lambda_s(sqs26, s)


def test_lambda_s_out_of_range(fano):
    with pytest.raises(ParameterError):
        lambda_s(fano, 3)


def test_design_file_round_trip(tmp_path, sqs16):
    path = tmp_path / "d.txt"
    write_design(sqs16, path, comments=["doubled"])
    assert read_design(path) == sqs16
    assert path.read_text().startswith("# doubled\n3 16 4 1 140\n")


def test_design_reader_accepts_any_block_order():
    text = "2 7 3 1 7\n" + "\n".join(" ".join(map(str, b)) for b in reversed(FANO))
    d = parse_design(text)
    assert d.canonical().blocks == FANO
    assert format_design(d) == format_design(d.canonical())


def test_design_reader_rejects_duplicates_and_counts():
    with pytest.raises(DesignError, match="repeats"):
        parse_design("2 7 3 1 2\n0 1 2\n0 1 2\n")
    with pytest.raises(DesignError, match="announces"):
        parse_design("2 7 3 1 3\n0 1 2\n")
