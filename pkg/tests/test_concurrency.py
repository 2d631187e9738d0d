"""Tests for concurrency safety: locking around batch output files."""

import json
import sys
import threading
import time
from pathlib import Path
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

import pytest
from pseudoellipse.cli import run
from pseudoellipse.filelock import file_lock, safe_write

REQUESTS = Path(__file__).parent.parent / "fixtures" / "requests.ndjson"


@pytest.fixture(autouse=True)
def _isolated(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv("HOME", str(tmp_path))
    monkeypatch.delenv("PSMAP_SEED", raising=False)
    monkeypatch.delenv("PSMAP_FIXTURES", raising=False)


class TestFileLock:
    def test_basic_lock(self, tmp_path):
        f = tmp_path / "out.ndjson"
        f.write_text("{}\n")
        with file_lock(f):
            f.write_text('{"exists": true}\n')
        assert f.read_text() == '{"exists": true}\n'

    def test_lock_cleans_up(self, tmp_path):
        f = tmp_path / "out.ndjson"
        f.write_text("")
        with file_lock(f):
            assert (tmp_path / "out.ndjson.lock").exists()
        assert not (tmp_path / "out.ndjson.lock").exists()

    def test_concurrent_writes(self, tmp_path):
        """Two threads rewriting one file: every read sees a whole result set."""
        f = tmp_path / "out.ndjson"
        f.write_text("")
        errors = []

        def writer(thread_id):
            try:
                for i in range(20):
                    lines = "".join(json.dumps({"thread": thread_id, "line": k}) + "\n"
                                    for k in range(i + 1))
                    safe_write(f, lines)
                    time.sleep(0.001)
            except Exception as e:
                errors.append(e)

        t1 = threading.Thread(target=writer, args=(1,))
        t2 = threading.Thread(target=writer, args=(2,))
        t1.start()
        t2.start()
        t1.join()
        t2.join()

        assert not errors
        rows = [json.loads(line) for line in f.read_text().splitlines()]
        assert len(rows) == 20
        assert len({row["thread"] for row in rows}) == 1

    def test_safe_write_atomic(self, tmp_path):
        f = tmp_path / "out.ndjson"
        safe_write(f, '{"p": [2, 4, 6]}\n')
        assert f.read_text() == '{"p": [2, 4, 6]}\n'
        assert not (tmp_path / "out.ndjson.tmp").exists()
        assert not list(tmp_path.glob("*.lock"))

    def test_lock_timeout(self, tmp_path):
        """A second writer gives up waiting instead of deadlocking."""
        f = tmp_path / "out.ndjson"
        f.write_text("")
        lock_acquired = threading.Event()
        release = threading.Event()

        def holder():
            with file_lock(f, timeout=10.0):
                lock_acquired.set()
                release.wait(timeout=5.0)

        t = threading.Thread(target=holder)
        t.start()
        lock_acquired.wait()

        start = time.monotonic()
        with file_lock(f, timeout=0.2):
            pass
        elapsed = time.monotonic() - start

        release.set()
        t.join()
        assert elapsed < 2.0


class TestIntegrationLocking:
    """Batch output goes through the locked atomic writer."""

    def test_batch_output_leaves_no_temp_files(self, tmp_path, capsys):
        out = tmp_path / "results.ndjson"
        assert run(["batch", str(REQUESTS), "--output", str(out)]) == 0
        summary = json.loads(capsys.readouterr().out)
        assert summary == {"output": str(out), "lines": 5, "errors": 0}
        assert len(out.read_text().splitlines()) == 5
        assert not list(tmp_path.glob("*.tmp"))
        assert not list(tmp_path.glob("*.lock"))

    def test_concurrent_batch_runs(self, tmp_path):
        out = tmp_path / "results.ndjson"
        codes = []

        def batch():
            codes.append(run(["-q", "batch", str(REQUESTS), "--output", str(out)]))

        threads = [threading.Thread(target=batch) for _ in range(2)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()

        assert codes == [0, 0]
        rows = [json.loads(line) for line in out.read_text().splitlines()]
        assert len(rows) == 5
        assert rows[0]["exists"] is True
        assert rows[1]["exists"] is False

    def test_worker_threads_keep_line_order(self, tmp_path):
        serial, parallel = tmp_path / "serial.ndjson", tmp_path / "parallel.ndjson"
        assert run(["batch", str(REQUESTS), "--jobs", "1", "--output", str(serial)]) == 0
        assert run(["batch", str(REQUESTS), "--jobs", "4", "--output", str(parallel)]) == 0
        assert serial.read_text() == parallel.read_text()
