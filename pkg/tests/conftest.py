"""Shared fixtures: tiny snapshots and bug-report records used across tests."""

import json

import pytest

JAVA_SAMPLE = """\
public class FontController {
    private int size;

    public void resize(int points) {
        size = points;
        redraw();
    }

    public void redraw() {
        paint(size);
    }
}
"""

PYTHON_SAMPLE = """\
class Renderer:
    def draw(self):
        return 1

    def clear(self):
        return 0


def helper():
    return 2
"""


def make_record(**overrides):
    record = {
        "id": "BUG-1",
        "repo_name": "demo",
        "title": "Crash when resizing fonts",
        "body": "Resizing the editor font crashes the controller.",
        "fixed_files": ["src/FontController.java"],
        "sha_before": "aaa111",
        "sha_after": "bbb222",
        "status": "closed",
    }
    record.update(overrides)
    return record


@pytest.fixture
def java_source():
    return JAVA_SAMPLE


@pytest.fixture
def snapshot_dir(tmp_path):
    """A two-file repository tree usable as a snapshot root."""
    src = tmp_path / "repo" / "src"
    src.mkdir(parents=True)
    (src / "FontController.java").write_text(JAVA_SAMPLE, encoding="utf-8")
    (src / "render.py").write_text(PYTHON_SAMPLE, encoding="utf-8")
    return tmp_path / "repo"


@pytest.fixture
def corpus_file(tmp_path):
    path = tmp_path / "bugs.jsonl"
    rows = [
        make_record(),
        make_record(id="BUG-2", title="Renderer never clears", body="clear() leaves stale pixels",
                    fixed_files=["src/render.py"]),
    ]
    path.write_text("\n".join(json.dumps(r) for r in rows) + "\n", encoding="utf-8")
    return path
