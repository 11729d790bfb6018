import math
from fractions import Fraction

import pytest

from maxlab.errors import DomainError
from maxlab.services.counterexamples import (
    RecordFamily,
    RecordFunction,
    Setting,
    build_sequence,
    build_thm3,
    build_thm4,
    build_thm5,
    build_thm6,
    first_strict_record,
    reproduce_setting,
    scan_strict_record,
    search_by_verification,
)
from maxlab.services.functions import DiscreteBVFunction
from maxlab.services.scalar import ScalarMode, compare

HALF = Fraction(1, 2)


def test_record_function_values():
    rf = RecordFunction(RecordFamily.L, 1, HALF)
    assert rf(0) == Fraction(3, 2)
    assert compare(rf(3), Fraction(3, 2)) == 0
    assert compare(rf(4), Fraction(3, 2)) > 0


def test_record_function_rejects_bad_parameters():
    with pytest.raises(DomainError):
        RecordFunction(RecordFamily.L, 0, HALF)
    with pytest.raises(DomainError):
        RecordFunction(RecordFamily.L, 1, 0)


def test_first_record_of_l1():
    rf = RecordFunction(RecordFamily.L, 1, HALF)
    assert first_strict_record(rf, 0) == 4
    assert scan_strict_record(rf, 0) == 4


@pytest.mark.parametrize("family", [RecordFamily.L, RecordFamily.F, RecordFamily.G])
@pytest.mark.parametrize("beta", [HALF, Fraction(1, 3), Fraction(3, 4)])
def test_galloping_search_matches_scan(family, beta):
    for j in range(1, 5):
        rf = RecordFunction(family, j, beta)
        for lower in (0, 3, 17):
            assert first_strict_record(rf, lower) == scan_strict_record(rf, lower)


def test_continuous_families_are_not_searched_discretely():
    with pytest.raises(DomainError):
        first_strict_record(RecordFunction(RecordFamily.F_CONT, 1, HALF), 0)


def test_sequence_heights():
    thm5 = build_sequence(Setting.THM5, HALF, 4)
    assert thm5.heights[0] == 4
    assert all(b > a for a, b in zip(thm5.heights, thm5.heights[1:]))
    assert build_sequence(Setting.THM3, HALF, 1).heights == (5,)
    f, h = build_thm5(1, HALF)
    assert h == 4
    assert f == DiscreteBVFunction.from_runs(0, [(Fraction(3, 2), 1), (HALF, 4)])


def test_verification_search_agrees_with_unimodal_search():
    for setting in Setting:
        unimodal = build_sequence(setting, HALF, 3).heights
        verified = build_sequence(setting, HALF, 3, strategy="verify").heights
        assert verified == unimodal
    assert search_by_verification(Setting.THM5, 1, HALF, 0) == 4


def test_f64_heights_match_rational():
    rational = build_sequence(Setting.THM5, HALF, 3).heights
    assert build_sequence(Setting.THM5, 0.5, 3, mode=ScalarMode.F64).heights == rational


def test_build_sequence_validation():
    with pytest.raises(DomainError):
        build_sequence(Setting.THM5, HALF, 0)
    with pytest.raises(DomainError):
        build_sequence(Setting.THM5, 0, 2)
    with pytest.raises(DomainError):
        build_sequence(Setting.THM5, HALF, 2, strategy="guess")


def test_reproduce_thm5_gap_persists():
    report = reproduce_setting(Setting.THM5, HALF, 4)
    assert report.verdict == "pass"
    assert [row["j"] for row in report.rows] == [1, 2, 3, 4]
    for row in report.rows:
        assert row["value_0"] == pytest.approx(row["value_1"], rel=1e-12)
        assert row["derivative_gap"] == pytest.approx(1 - 2 ** -0.5, abs=1e-12)
        assert row["bv_distance"] == f"1/{row['j']}"


def test_reproduce_thm6_derivative_vanishes():
    report = reproduce_setting(Setting.THM6, HALF, 4)
    assert report.verdict == "pass"
    sizes = [abs(row["derivative"]) for row in report.rows]
    assert all(b < a for a, b in zip(sizes, sizes[1:]))
    assert report.rows[0]["base_derivative"] == pytest.approx(3 ** -0.5 - 1, abs=1e-12)
    for row in report.rows:
        assert row["derivative"] == pytest.approx(row["formula"], rel=1e-9)


def test_reproduce_thm3_two_point_bound():
    report = reproduce_setting(Setting.THM3, HALF, 3)
    assert report.verdict == "pass"
    closed = math.sqrt((1 - 2 ** -0.5) ** 2 / 2)
    for row in report.rows:
        assert row["varq_lower_bound"] == pytest.approx(closed, abs=1e-12)
        assert row["varq_lower_bound"] == pytest.approx(0.2071, abs=1e-4)


def test_reproduce_thm4_difference_vanishes():
    report = reproduce_setting(Setting.THM4, HALF, 3)
    assert report.verdict == "pass"
    sizes = [abs(row["derivative"]) for row in report.rows]
    assert all(b < a for a, b in zip(sizes, sizes[1:]))
    assert {c["name"] for c in report.summary["sequence_checks"]} == {"heights-increasing", "derivative-decreasing"}


@pytest.mark.parametrize("beta", [Fraction(1, 3), Fraction(2, 3)])
def test_reproduce_other_orders(beta):
    assert reproduce_setting(Setting.THM5, beta, 3).verdict == "pass"
    assert reproduce_setting(Setting.THM6, beta, 2).verdict == "pass"


def test_uncentered_step_member():
    f, h = build_thm3(1, HALF)
    assert h == 5
    assert tuple(f.breakpoints) == (0, 1, 5)
    assert tuple(f.piece_values) == (0, Fraction(3, 2), HALF, 0)
    assert f.integral_abs(0, 5) == Fraction(7, 2)


def test_centered_step_heights_leave_room_at_two():
    assert build_thm4(1, HALF)[1] == 11
    heights = build_sequence(Setting.THM4, HALF, 3).heights
    assert all(h - 2 > 2 and h >= 5 for h in heights)
    assert build_sequence(Setting.THM4, HALF, 3, strategy="verify").heights == heights


def test_centered_discrete_member_and_derivative():
    f, h = build_thm6(1, HALF)
    assert h == 26
    assert f == DiscreteBVFunction.from_runs(0, [(Fraction(3, 2), 1), (HALF, 26)])
    row = reproduce_setting(Setting.THM6, HALF, 1).rows[0]
    assert row["h"] == 26
    assert row["value_0"] == pytest.approx(14.5 * 53 ** -0.5, rel=1e-12)
    assert row["value_1"] == pytest.approx(14.5 * 51 ** -0.5, rel=1e-12)
    assert row["derivative"] == pytest.approx(14.5 * (51 ** -0.5 - 53 ** -0.5), rel=1e-9)
