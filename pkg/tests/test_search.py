import json

import pytest

from app.errors import InvalidInputError
from app.models.search import (
    Solution,
    admissible_pairs,
    coprime_pairs,
    diff,
    enumerate_solutions,
    run_search,
    table_rows,
    to_csv,
    to_json,
    verify,
)


@pytest.mark.parametrize(
    "row, expected",
    [
        ((1, 7, 5, 2, 1, 5), True),
        ((1, 23, 45, 2, 1, 11), True),
        ((1, 7, 5, 2, 1, 6), False),
        ((1, 7, 6, 2, 1, 5), False),
        ((1, 7, 0, 2, 1, 3), False),
    ],
)
def test_verify(row, expected):
    assert verify(Solution(*row)) is expected


def test_verify_rejects_shared_factors():
    # 2*4^2 + 2^5 = 4^3 but gcd(C1*x, q, y) = 2
    assert 2 * 16 + 2 ** 5 == 4 ** 3
    assert not verify(Solution(2, 2, 4, 4, 5, 3))


def test_enumerate_matches_the_table_for_1_7():
    found = enumerate_solutions(1, 7, 1000, 6)
    expected = table_rows(C1=1, q=7, x_max=1000, alpha_max=6)
    assert diff(found, expected).empty
    assert Solution(1, 7, 181, 8, 1, 5) in found
    assert Solution(1, 7, 181, 32, 1, 3) in found


def test_enumerate_orders_by_alpha_then_x():
    found = enumerate_solutions(1, 7, 1000, 6)
    keys = [(s.alpha, s.x) for s in found]
    assert keys == sorted(keys)


def test_enumerate_rejects_empty_bounds():
    with pytest.raises(InvalidInputError):
        enumerate_solutions(1, 7, 0, 5)


def test_pairs():
    assert len(coprime_pairs()) == 101
    assert len(admissible_pairs(parity="odd")) == 18
    assert len(admissible_pairs(parity="even")) == 13
    assert (1, 7) in admissible_pairs(parity="odd")
    with pytest.raises(InvalidInputError):
        admissible_pairs(parity="both")


def test_table_rows_are_valid_solutions():
    rows = table_rows()
    assert rows
    assert all(row.verify() for row in rows)


def test_diff_reports_both_directions():
    a, b, c = Solution(1, 7, 5, 2, 1, 5), Solution(1, 7, 11, 2, 1, 7), Solution(1, 23, 3, 2, 1, 5)
    result = diff([a, b], [b, c])
    assert result.missing == (c,)
    assert result.extra == (a,)
    assert not result.empty


def test_run_search_resumes_from_checkpoint(tmp_path):
    checkpoint = tmp_path / "search-checkpoint.json"
    pairs = [(1, 7), (1, 23)]
    first = run_search(pairs, 1000, 4, checkpoint=checkpoint, batch=3)
    assert first.units_done == first.units_total == 8
    assert not first.cancelled
    saved = json.loads(checkpoint.read_text(encoding="utf-8"))
    assert saved["cursor"] == 8

    again = run_search(pairs, 1000, 4, checkpoint=checkpoint, batch=3)
    assert again.solutions == first.solutions
    assert Solution(1, 23, 45, 2, 1, 11) in first.solutions
    assert Solution(1, 23, 3, 2, 1, 5) in first.solutions


def test_checkpoint_of_other_search_is_ignored(tmp_path):
    checkpoint = tmp_path / "search-checkpoint.json"
    run_search([(1, 7)], 100, 2, checkpoint=checkpoint)
    result = run_search([(1, 23)], 100, 2, checkpoint=checkpoint)
    assert all(s.C1 == 1 and s.q == 23 for s in result.solutions)


def test_output_formats():
    rows = [Solution(1, 7, 5, 2, 1, 5)]
    assert to_csv(rows) == "C1,q,x,y,alpha,n\n1,7,5,2,1,5\n"
    assert json.loads(to_json(rows)) == {"columns": ["C1", "q", "x", "y", "alpha", "n"], "rows": [[1, 7, 5, 2, 1, 5]]}
