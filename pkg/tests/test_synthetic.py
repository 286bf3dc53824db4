import json

from bugloc.corpus import ingest_dataset, load_snapshot, validate_ground_truth
from bugloc.synthetic import write_planted_corpus


def test_layout_and_determinism(tmp_path):
    a = write_planted_corpus(tmp_path / "a", seed=7)
    b = write_planted_corpus(tmp_path / "b", seed=7)
    assert a.repo_name == "plantedapp"
    assert (a.snapshots_root / a.repo_name / a.version_id).is_dir()
    assert a.corpus_path.read_text() == b.corpus_path.read_text()
    snap_a = load_snapshot(a.snapshots_root / a.repo_name / a.version_id, a.version_id)
    snap_b = load_snapshot(b.snapshots_root / b.repo_name / b.version_id, b.version_id)
    assert snap_a.files == snap_b.files
    assert write_planted_corpus(tmp_path / "c", seed=8).corpus_path.read_text() != a.corpus_path.read_text()


def test_reports_parse_and_ground_truth_is_present(tmp_path):
    fixture = write_planted_corpus(tmp_path, seed=7)
    corpus = ingest_dataset(fixture.corpus_path)
    assert len(corpus.reports) == 10
    assert corpus.diagnostics == []
    snap = load_snapshot(
        fixture.snapshots_root / fixture.repo_name / fixture.version_id, fixture.version_id
    )
    assert len(snap.files) == 12
    for report in corpus.reports:
        assert report.repo_name == fixture.repo_name
        assert report.sha_before == fixture.version_id
        assert validate_ground_truth(report, snap).usable


def test_each_report_names_a_distinct_file(tmp_path):
    fixture = write_planted_corpus(tmp_path, seed=7)
    rows = [json.loads(line) for line in fixture.corpus_path.read_text().splitlines()]
    fixed = [f for row in rows for f in row["fixed_files"]]
    assert len(fixed) == len(set(fixed)) == 10
