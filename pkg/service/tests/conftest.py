import socket
import threading
import time

import pytest
import uvicorn

from pairsvc.server import GeometricStub, create_app


def free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


class ServerThread:
    def __init__(self, app, port):
        self.port = port
        config = uvicorn.Config(app, host="127.0.0.1", port=port, log_level="error")
        self.server = uvicorn.Server(config)
        self.thread = threading.Thread(target=self.server.run, daemon=True)

    def __enter__(self):
        self.thread.start()
        deadline = time.time() + 10
        while not self.server.started:
            if time.time() > deadline:
                raise RuntimeError("server did not start")
            time.sleep(0.02)
        return f"http://127.0.0.1:{self.port}"

    def __exit__(self, *exc):
        self.server.should_exit = True
        self.thread.join(timeout=10)


@pytest.fixture
def stub_endpoint():
    app = create_app(GeometricStub(), model_version="stub-test")
    with ServerThread(app, free_port()) as endpoint:
        yield endpoint


@pytest.fixture
def tiny_manifest(tmp_path):
    """A small real manifest exported from synthetic tables."""
    from wordgrid.relations import export_training_pairs
    from wordgrid.synth import SynthConfig, make_corpus, render_table_image

    tables = make_corpus(77, 6, SynthConfig(max_rows=4, max_cols=4))
    images = {t.table_id: render_table_image(t) for t in tables}
    summary = export_training_pairs(tables, images, tmp_path / "export", balance=0.5, seed=0)
    assert summary.records > 0
    return tmp_path / "export" / "manifest.jsonl"
