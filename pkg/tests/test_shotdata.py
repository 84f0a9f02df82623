import numpy as np
import pytest

from depthks.shotdata import (
    PlayerShotChart,
    RejectedRow,
    build_charts,
    demo_shots_path,
    filter_players,
    format_rejection_report,
    load_shot_csv,
    read_exclusions,
)

HEADER = "PLAYER_ID,PLAYER_NAME,LOC_X,LOC_Y,SHOT_MADE_FLAG,SEASON"


def write_csv(tmp_path, rows, header=HEADER, name="shots.csv"):
    path = tmp_path / name
    path.write_text("\n".join([header] + rows) + "\n")
    return path


class TestLoadShotCsv:
    def test_happy_path(self, tmp_path):
        path = write_csv(
            tmp_path,
            [
                "p1,Alice Guard,10,55,1,2018-19",
                "p1,Alice Guard,-240,0,0,2018-19",
                "p2,Bob Wing,0,419,1,2018-19",
            ],
        )
        records, rejected = load_shot_csv(path)
        assert rejected == []
        assert [r.player_id for r in records] == ["p1", "p1", "p2"]
        assert records[0].made and not records[1].made
        assert records[0].x == 10.0 and records[0].y == 55.0
        assert records[0].season == "2018-19"

    def test_season_optional(self, tmp_path):
        path = write_csv(
            tmp_path,
            ["p1,Alice,0,0,1"],
            header="PLAYER_ID,PLAYER_NAME,LOC_X,LOC_Y,SHOT_MADE_FLAG",
        )
        records, rejected = load_shot_csv(path)
        assert records[0].season == ""

    def test_column_remap(self, tmp_path):
        path = write_csv(
            tmp_path,
            ["7,Carol,5,5,1"],
            header="pid,who,px,py,hit",
        )
        records, _ = load_shot_csv(
            path,
            columns={"player_id": "pid", "player_name": "who", "x": "px", "y": "py", "made": "hit"},
        )
        assert records[0].player_id == "7"
        assert records[0].player_name == "Carol"

    def test_unknown_remap_key(self, tmp_path):
        path = write_csv(tmp_path, ["p1,A,0,0,1,s"])
        with pytest.raises(ValueError, match="unknown column mapping keys"):
            load_shot_csv(path, columns={"quarter": "Q"})

    def test_missing_column(self, tmp_path):
        path = write_csv(tmp_path, ["p1,A,0,0"], header="PLAYER_ID,PLAYER_NAME,LOC_X,LOC_Y")
        with pytest.raises(ValueError, match="SHOT_MADE_FLAG"):
            load_shot_csv(path)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("")
        with pytest.raises(ValueError, match="empty CSV"):
            load_shot_csv(path)

    @pytest.mark.parametrize(
        "row,reason",
        [
            ("p1,A,abc,0,1,s", "invalid coordinates"),
            ("p1,A,nan,0,1,s", "invalid coordinates"),
            ("p1,A,250.5,0,1,s", "x out of range"),
            ("p1,A,-251,0,1,s", "x out of range"),
            ("p1,A,0,420.5,1,s", "y out of range"),
            ("p1,A,0,-50.5,1,s", "y out of range"),
            ("p1,A,0,0,2,s", "invalid made flag"),
            ("p1,A,0,0,,s", "invalid made flag"),
            ("p1,A,0,0,true,s", "invalid made flag"),
        ],
    )
    def test_rejection_reasons(self, tmp_path, row, reason):
        path = write_csv(tmp_path, [row])
        records, rejected = load_shot_csv(path)
        assert records == []
        assert rejected == [RejectedRow(1, reason)]

    def test_coordinate_check_takes_precedence(self, tmp_path):
        # a row can be wrong in several ways; the first check wins
        path = write_csv(tmp_path, ["p1,A,oops,0,9,s"])
        _, rejected = load_shot_csv(path)
        assert rejected[0].reason == "invalid coordinates"

    def test_row_numbers_one_based_and_lossless(self, tmp_path):
        path = write_csv(
            tmp_path,
            [
                "p1,A,0,0,1,s",
                "p1,A,999,0,1,s",
                "p1,A,0,0,0,s",
                "p1,A,0,0,x,s",
            ],
        )
        records, rejected = load_shot_csv(path)
        assert len(records) + len(rejected) == 4
        assert [r.row for r in rejected] == [2, 4]

    def test_court_boundary_inclusive(self, tmp_path):
        path = write_csv(
            tmp_path,
            ["p1,A,-250,-50,1,s", "p1,A,250,420,0,s"],
        )
        records, rejected = load_shot_csv(path)
        assert len(records) == 2 and rejected == []


class TestRejectionReport:
    def test_format(self):
        report = format_rejection_report(
            [RejectedRow(2, "x out of range"), RejectedRow(9, "invalid made flag")]
        )
        assert report == "row 2: x out of range\nrow 9: invalid made flag"

    def test_empty(self):
        assert format_rejection_report([]) == ""


class TestBuildCharts:
    def test_grouping_and_split(self, tmp_path):
        path = write_csv(
            tmp_path,
            [
                "p2,Bob,1,1,1,s",
                "p1,Alice,2,2,0,s",
                "p2,Bob,3,3,0,s",
                "p1,Alice,4,4,1,s",
                "p1,Alice,5,5,0,s",
            ],
        )
        records, _ = load_shot_csv(path)
        charts = build_charts(records)
        assert [c.player_id for c in charts] == ["p1", "p2"]  # sorted
        p1 = charts[0]
        assert p1.player_name == "Alice"
        assert len(p1.made) == 1 and len(p1.missed) == 2
        assert p1.total_attempts == 3

    def test_player_with_no_misses(self):
        from depthks.shotdata import ShotRecord

        charts = build_charts([ShotRecord("p", "P", 1.0, 2.0, True)])
        assert len(charts[0].missed) == 0
        assert charts[0].missed.points.shape == (0, 2)


class TestFilterPlayers:
    @staticmethod
    def chart(pid, n_made, n_missed):
        from depthks.geometry import PointPattern

        return PlayerShotChart(
            pid,
            pid.upper(),
            PointPattern(np.zeros((n_made, 2))),
            PointPattern(np.ones((n_missed, 2))),
        )

    def test_cutoff_is_strict(self):
        charts = [self.chart("a", 200, 200), self.chart("b", 200, 201)]
        kept = filter_players(charts, min_attempts=400)
        assert [c.player_id for c in kept] == ["b"]

    def test_made_basis(self):
        charts = [self.chart("a", 401, 0), self.chart("b", 400, 300)]
        kept = filter_players(charts, min_attempts=400, count_basis="made")
        assert [c.player_id for c in kept] == ["a"]

    def test_exclusions(self):
        charts = [self.chart("a", 300, 300), self.chart("b", 300, 300)]
        kept = filter_players(charts, min_attempts=100, exclusions={"a"})
        assert [c.player_id for c in kept] == ["b"]

    def test_bad_basis(self):
        with pytest.raises(ValueError, match="count_basis"):
            filter_players([], count_basis="misses")


class TestReadExclusions:
    def test_parse(self, tmp_path):
        path = tmp_path / "excl.txt"
        path.write_text("# rookies\np7\n\n p9  # traded mid-season\n")
        assert read_exclusions(path) == frozenset({"p7", "p9"})


class TestBundledFixture:
    def test_loads_cleanly(self):
        records, rejected = load_shot_csv(demo_shots_path())
        assert rejected == []
        charts = build_charts(records)
        assert len(charts) == 3
        for chart in charts:
            assert chart.total_attempts > 400
            assert len(chart.made) >= 2 and len(chart.missed) >= 2
