import json
from fractions import Fraction

import pytest

from bacsum.errors import DuplicateRatingError, NoDataError, RatingValidationError
from bacsum.evaluation import aggregate, load_ratings, parse_ratings, render_json, render_table

HEADER = "packet_file_id,method,rater_id,ca,ci\n"


def test_four_rows():
    records = parse_ratings(HEADER + "p1,m1,r1,5,3\np1,m2,r1,4,4\np2,m1,r1,5,2\np2,m4,r2,3,5\n")
    assert len(records) == 4 and records[3].method == "m4" and records[3].ci == 5


def test_out_of_range_names_row():
    with pytest.raises(RatingValidationError, match="row 3") as info:
        parse_ratings(HEADER + "p1,m1,r1,5,3\np2,m1,r1,6,3\n")
    assert info.value.row == 3


@pytest.mark.parametrize("body, row", [
    ("p1,m9,r1,5,3\n", 2), ("p1,m1,r1,x,3\n", 2), ("p1,m1,r1,5\n", 2), (",m1,r1,5,3\n", 2),
])
def test_malformed_rows(body, row):
    with pytest.raises(RatingValidationError) as info:
        parse_ratings(HEADER + body)
    assert info.value.row == row


def test_bad_header():
    with pytest.raises(RatingValidationError):
        parse_ratings("file,method,rater,ca,ci\n")
    with pytest.raises(RatingValidationError):
        parse_ratings("")


def test_duplicate_key():
    with pytest.raises(DuplicateRatingError, match="row 3 repeats the rating on row 2"):
        parse_ratings(HEADER + "p1,m1,r1,5,3\np1,m1,r1,4,3\n")


def test_constant_input():
    records = parse_ratings(HEADER + "".join(f"p{i},m1,r1,5,3\n" for i in range(7)))
    (score,) = aggregate(records)
    assert (score.method, score.mean_ca, score.mean_ci, score.n) == ("m1", 5.0, 3.0, 7)


def test_method_4_means():
    # 100 ratings: CI sum 363 (63 fours, 37 threes), CA sum 489 (89 fives, 11 fours)
    ci = [4] * 63 + [3] * 37
    ca = [5] * 89 + [4] * 11
    records = parse_ratings(HEADER + "".join(f"p{i},m4,r{i % 3},{ca[i]},{ci[i]}\n" for i in range(100)))
    (score,) = aggregate(records)
    assert (round(score.mean_ci, 2), round(score.mean_ca, 2)) == (3.63, 4.89)
    assert score.mean_ci == 3.63 and score.mean_ca == 4.89


def test_mixed_methods_against_resummation():
    import random
    rng = random.Random(4)
    rows, raw = [], {}
    for m in ("m3", "m1", "m2"):
        for i in range(rng.randint(5, 40)):
            ca, ci = rng.randint(1, 5), rng.randint(1, 5)
            raw.setdefault(m, []).append((ca, ci))
            rows.append(f"p{i},{m},r1,{ca},{ci}\n")
    scores = aggregate(parse_ratings(HEADER + "".join(rows)))
    assert [s.method for s in scores] == ["m1", "m2", "m3"]
    for s in scores:
        pairs = raw[s.method]
        assert abs(s.mean_ca - float(Fraction(sum(p[0] for p in pairs), len(pairs)))) <= 1e-9
        assert abs(s.mean_ci - float(Fraction(sum(p[1] for p in pairs), len(pairs)))) <= 1e-9


def test_no_data():
    with pytest.raises(NoDataError):
        aggregate([])


def test_render():
    scores = aggregate(parse_ratings(HEADER + "p1,m2,r1,5,3\np2,m2,r1,4,3\n"))
    table = render_table(scores)
    assert table.splitlines()[1].split() == ["Method", "2", "3.00", "4.50", "2"]
    report = json.loads(render_json(scores))
    assert report["schema"] == "bacsum.eval/1"
    assert report["methods"][0]["mean_ca"] == 4.5 and report["methods"][0]["n"] == 2


def test_load_ratings_bom(tmp_path):
    path = tmp_path / "r.csv"
    path.write_bytes(b"\xef\xbb\xbf" + (HEADER + "p1,m1,r1,5,3\n").encode())
    assert len(load_ratings(path)) == 1


from hypothesis import given, settings
from hypothesis import strategies as st

from bacsum.evaluation import RatingRecord

_records = st.lists(
    st.builds(RatingRecord, st.sampled_from(["p1", "p2", "p3"]), st.sampled_from(["m1", "m2", "m3", "m4"]),
              st.sampled_from(["r1", "r2"]), st.integers(1, 5), st.integers(1, 5)),
    min_size=1, max_size=60,
)


@settings(max_examples=200, deadline=None)
@given(_records, st.randoms(use_true_random=False))
def test_aggregate_permutation_invariant_and_bounded(records, rnd):
    shuffled = list(records)
    rnd.shuffle(shuffled)
    assert aggregate(records) == aggregate(shuffled)
    for s in aggregate(records):
        ca = [r.ca for r in records if r.method == s.method]
        ci = [r.ci for r in records if r.method == s.method]
        assert min(ca) <= s.mean_ca <= max(ca) and min(ci) <= s.mean_ci <= max(ci)
