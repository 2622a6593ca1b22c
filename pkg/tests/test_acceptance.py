"""The ten acceptance criteria at their stated tolerances, one PASS/FAIL line each."""

import pytest

from afinv import acceptance

CHECKS = [
    acceptance.check_tree_table,
    acceptance.check_catalan,
    acceptance.check_q1_q2,
    acceptance.check_composition_order,
    acceptance.check_oracle_agreement,
    acceptance.check_lagrange_triple,
    acceptance.check_isochronicity,
    acceptance.check_quadrature,
    acceptance.check_dynamics,
    acceptance.check_decoupling,
]


@pytest.mark.parametrize("check", CHECKS, ids=[c.__name__.removeprefix("check_") for c in CHECKS])
def test_criterion(check, capsys):
    result = check()
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed, result.line()


def test_numbering_covers_all_criteria():
    assert sorted(c().number for c in (acceptance.check_tree_table, acceptance.check_decoupling)) == [1, 10]
    assert len(CHECKS) == 10
