import json

import numpy as np
import pytest

from ldpfair.data import validate
from ldpfair.errors import ConfigError, IngestError
from ldpfair.ingest import (
    BinningSpec,
    ColumnSpec,
    IngestConfig,
    OutcomeSpec,
    RowFilter,
    adult_config,
    compas_config,
    config_from_dict,
    load,
    load_config,
    report_to_json,
)
from ldpfair.synth import ThresholdSpec


def write_csv(path, header, rows):
    lines = [",".join(header)] + [",".join(str(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def toy_config(csv_path, threshold=ThresholdSpec("absolute", 5.0), filters=()):
    return IngestConfig(
        path=str(csv_path),
        attributes=(
            ColumnSpec("race", "race", "protected", categories=("black", "white")),
            ColumnSpec("age", "age", "sensitive", binning=BinningSpec(edges=(25.0, 45.0))),
        ),
        outcome=OutcomeSpec(name="y", column="score", threshold=threshold),
        filters=tuple(filters),
        name="toy",
    )


@pytest.fixture
def toy_csv(tmp_path):
    path = tmp_path / "toy.csv"
    write_csv(
        path,
        ["race", "age", "score"],
        [
            ["black", "24", "3"],
            ["white", "25", "7"],
            ["white", "30", "9"],
            ["black", "50", "2"],
        ],
    )
    return path


class TestLoad:
    def test_filtered_rows_are_counted(self, tmp_path):
        path = tmp_path / "f.csv"
        write_csv(path, ["race", "age", "score"], [["black", "20", "1"], ["green", "30", "2"], ["white", "40", "9"]])
        config = toy_config(path, filters=[RowFilter(column="race", keep=("black", "white"))])
        dataset, report = load(config)
        assert dataset.n == 2
        assert report.records_in == 3
        assert report.filtered == 1
        assert report.errored == 0
        assert report.records_in == report.records_out + report.filtered + report.errored

    def test_left_open_right_closed_binning(self, toy_csv):
        dataset, report = load(toy_config(toy_csv))
        # edges [25, 45]: value 25 is still in the first bucket (<= edge),
        # 30 in the middle, 50 in the last
        np.testing.assert_array_equal(dataset.column("age"), [0, 0, 1, 2])
        age = dataset.schema.attribute("age")
        assert age.domain == ("<=25", "(25, 45]", ">45")

    def test_outcome_strictly_greater_than_threshold(self, toy_csv):
        dataset, report = load(toy_config(toy_csv, threshold=ThresholdSpec("absolute", 7.0)))
        # score 7 is not above the cut
        np.testing.assert_array_equal(dataset.column("y"), [0, 0, 1, 0])
        assert report.threshold == 7.0

    def test_unknown_category_is_row_error_not_new_domain(self, tmp_path):
        path = tmp_path / "u.csv"
        write_csv(path, ["race", "age", "score"], [["black", "20", "1"], ["martian", "30", "2"]])
        dataset, report = load(toy_config(path))
        assert dataset.n == 1
        assert report.errored == 1
        assert "martian" in report.errors[0].message
        assert dataset.schema.attribute("race").domain == ("black", "white")

    def test_malformed_numeric_is_row_error(self, tmp_path):
        path = tmp_path / "m.csv"
        write_csv(path, ["race", "age", "score"], [["black", "twenty", "1"], ["white", "30", "2"]])
        dataset, report = load(toy_config(path))
        assert dataset.n == 1
        assert report.errored == 1

    def test_missing_file_is_fatal(self, tmp_path):
        with pytest.raises(IngestError):
            load(toy_config(tmp_path / "nope.csv"))

    def test_missing_column_is_fatal(self, tmp_path):
        path = tmp_path / "h.csv"
        write_csv(path, ["race", "score"], [["black", "1"]])
        with pytest.raises(IngestError, match="age"):
            load(toy_config(path))

    def test_idempotence_byte_identical(self, toy_csv):
        a, _ = load(toy_config(toy_csv))
        b, _ = load(toy_config(toy_csv))
        for name in a.columns:
            assert a.column(name).tobytes() == b.column(name).tobytes()

    def test_loaded_dataset_passes_validate(self, toy_csv):
        dataset, _ = load(toy_config(toy_csv))
        assert validate(dataset) == []

    def test_quantile_threshold_and_bins(self, tmp_path):
        path = tmp_path / "q.csv"
        rows = [["black" if i % 2 else "white", str(i), str(i)] for i in range(1, 31)]
        write_csv(path, ["race", "age", "score"], rows)
        config = IngestConfig(
            path=str(path),
            attributes=(
                ColumnSpec("race", "race", "protected", categories=("black", "white")),
                ColumnSpec("age", "age", "sensitive", binning=BinningSpec(quantile_bins=3)),
            ),
            outcome=OutcomeSpec(name="y", column="score", threshold=ThresholdSpec("quantile", 0.5)),
        )
        dataset, report = load(config)
        counts = np.bincount(dataset.column("age"))
        assert len(counts) == 3
        assert counts.sum() == 30
        assert max(counts) - min(counts) <= 2  # near-equal population buckets
        assert dataset.column("y").mean() == 0.5

    def test_degenerate_quantile_outcome_is_fatal(self, tmp_path):
        path = tmp_path / "d.csv"
        write_csv(path, ["race", "age", "score"], [["black", "1", "5"], ["white", "2", "5"]])
        with pytest.raises(IngestError):
            load(toy_config(path, threshold=ThresholdSpec("quantile", 0.5)))

    def test_range_filter_and_error_cap(self, tmp_path):
        path = tmp_path / "r.csv"
        write_csv(
            path,
            ["race", "age", "score", "days"],
            [["black", "20", "1", "0"], ["white", "30", "2", "99"], ["white", "40", "3", "oops"]],
        )
        config = IngestConfig(
            path=str(path),
            attributes=(
                ColumnSpec("race", "race", "protected", categories=("black", "white")),
                ColumnSpec("age", "age", "sensitive", binning=BinningSpec(edges=(25.0,))),
            ),
            outcome=OutcomeSpec(name="y", column="score", threshold=ThresholdSpec("absolute", 1.5)),
            filters=(RowFilter(column="days", min=-30.0, max=30.0),),
        )
        dataset, report = load(config)
        assert dataset.n == 1
        assert report.filtered == 1
        assert report.errored == 1
        doc = json.loads(report_to_json(report))
        assert doc["records_in"] == 3


class TestConfigDocuments:
    def test_yaml_round_trip(self, tmp_path, toy_csv):
        doc = {
            "csv": str(toy_csv),
            "name": "toy",
            "attributes": [
                {"name": "race", "role": "protected", "categories": ["black", "white"]},
                {"name": "age", "role": "sensitive", "bins": {"edges": [25, 45]}},
            ],
            "outcome": {"name": "y", "column": "score", "threshold": 5.0},
            "filters": [{"column": "race", "keep": ["black", "white"]}],
            "privileged_index": 0,
        }
        config_path = tmp_path / "ingest.yaml"
        import yaml

        config_path.write_text(yaml.safe_dump(doc), encoding="utf-8")
        config = load_config(str(config_path))
        dataset, _ = load(config)
        assert dataset.schema.privileged_index == 0
        assert dataset.n == 4

    def test_relative_csv_path_resolves_against_document(self, tmp_path):
        write_csv(tmp_path / "data.csv", ["race", "age", "score"], [["black", "20", "9"]])
        doc = {
            "csv": "data.csv",
            "attributes": [
                {"name": "race", "role": "protected", "categories": ["black", "white"]},
                {"name": "age", "role": "sensitive", "bins": {"edges": [25]}},
            ],
            "outcome": {"column": "score", "threshold": 5.0},
        }
        import yaml

        (tmp_path / "cfg.yaml").write_text(yaml.safe_dump(doc), encoding="utf-8")
        config = load_config(str(tmp_path / "cfg.yaml"))
        dataset, _ = load(config)
        assert dataset.n == 1

    def test_malformed_documents_rejected(self):
        with pytest.raises(ConfigError):
            config_from_dict({"no_csv": True})
        with pytest.raises(ConfigError):
            config_from_dict({"csv": "x.csv", "attributes": [{"name": "a"}], "outcome": {"column": "s", "threshold": 1}})
        with pytest.raises(ConfigError):
            BinningSpec(edges=(3.0, 3.0))
        with pytest.raises(ConfigError):
            BinningSpec()
        with pytest.raises(ConfigError):
            RowFilter(column="x")

    def test_builtin_benchmark_configs_construct(self):
        compas = compas_config("compas.csv", regime="Q2")
        assert compas.outcome.threshold.value == 3.0
        assert compas.sensitive_order == ("race", "sex", "age")
        adult = adult_config("adult.csv", regime="Q3")
        assert adult.outcome.threshold.value == 50_000.0
        assert adult.privileged_index == 1
        with pytest.raises(ConfigError):
            compas_config("x.csv", regime="Q9")
