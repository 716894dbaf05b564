"""Remote classifier client against a local HTTP stub."""

import base64
import io
import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest
from PIL import Image

from wordgrid.errors import ProtocolError, TransportError, ValidationError
from wordgrid.model import WordBox
from wordgrid.pairgen import LEFT, WordPair
from wordgrid.relations import RelationLabel, RemoteClassifier, remote_classify


class _StubHandler(BaseHTTPRequestHandler):
    script = None  # list of label dicts to cycle through, or a callable

    def log_message(self, *args):
        pass

    def do_GET(self):
        if self.path == "/healthz":
            body = json.dumps({"status": "ok", "model_version": "stub-1"}).encode()
            self.send_response(200)
            self.send_header("Content-Type", "application/json")
            self.end_headers()
            self.wfile.write(body)
        else:
            self.send_response(404)
            self.end_headers()

    def do_POST(self):
        length = int(self.headers.get("Content-Length", 0))
        payload = json.loads(self.rfile.read(length))
        labels = type(self).script(payload)
        body = json.dumps({"labels": labels}).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.end_headers()
        self.wfile.write(body)


@pytest.fixture
def stub_server():
    server = HTTPServer(("127.0.0.1", 0), _StubHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield server, f"http://127.0.0.1:{server.server_port}"
    server.shutdown()


def two_words():
    return [
        WordBox(id=0, x_min=5, y_min=5, x_max=45, y_max=25),
        WordBox(id=1, x_min=60, y_min=5, x_max=100, y_max=25),
        WordBox(id=2, x_min=5, y_min=40, x_max=45, y_max=60),
    ]


def blank_image():
    return Image.new("RGB", (120, 80), "white")


class TestRemoteClassifier:
    def test_health(self, stub_server):
        _, endpoint = stub_server
        assert RemoteClassifier(endpoint).health()["status"] == "ok"

    def test_batch_order_preserved(self, stub_server):
        server, endpoint = stub_server
        _StubHandler.script = staticmethod(
            lambda payload: [
                {"label": "same_row", "confidence": 0.9},
                {"label": "none", "confidence": 0.7},
            ][: len(payload["pairs"])]
        )
        pairs = [WordPair(1, 0, LEFT), WordPair(2, 0, "top")]
        labeled = remote_classify(pairs, blank_image(), two_words(), endpoint)
        assert [lp.label for lp in labeled] == [RelationLabel.SAME_ROW, RelationLabel.NONE]
        assert [lp.pair for lp in labeled] == pairs
        assert labeled[0].confidence == 0.9

    def test_order_preserved_across_batches(self, stub_server):
        server, endpoint = stub_server
        calls = []

        def script(payload):
            calls.append(len(payload["pairs"]))
            return [{"label": "same_row", "confidence": 0.5} for _ in payload["pairs"]]

        _StubHandler.script = staticmethod(script)
        pairs = [WordPair(1, 0, LEFT)] * 5
        client = RemoteClassifier(endpoint, batch_size=2)
        labeled = client.classify_pairs(pairs, blank_image(), two_words())
        assert len(labeled) == 5
        assert calls == [2, 2, 1]

    def test_empty_labels_for_nonempty_batch(self, stub_server):
        _, endpoint = stub_server
        _StubHandler.script = staticmethod(lambda payload: [])
        with pytest.raises(ProtocolError):
            remote_classify([WordPair(1, 0, LEFT)], blank_image(), two_words(), endpoint)

    def test_unknown_label_named(self, stub_server):
        _, endpoint = stub_server
        _StubHandler.script = staticmethod(
            lambda payload: [{"label": "same_diagonal", "confidence": 1.0}]
        )
        with pytest.raises(ProtocolError, match="same_diagonal"):
            remote_classify([WordPair(1, 0, LEFT)], blank_image(), two_words(), endpoint)

    def test_unreachable_service(self):
        with pytest.raises(TransportError):
            remote_classify(
                [WordPair(1, 0, LEFT)], blank_image(), two_words(),
                "http://127.0.0.1:9", timeout=0.5,
            )

    def test_empty_batch_rejected(self, stub_server):
        _, endpoint = stub_server
        with pytest.raises(ValidationError):
            RemoteClassifier(endpoint).classify_pairs([], blank_image(), two_words())

    def test_request_carries_rendered_png(self, stub_server):
        _, endpoint = stub_server
        seen = {}

        def script(payload):
            seen["pairs"] = payload["pairs"]
            return [{"label": "none", "confidence": 1.0} for _ in payload["pairs"]]

        _StubHandler.script = staticmethod(script)
        remote_classify([WordPair(1, 0, LEFT)], blank_image(), two_words(), endpoint)
        raw = base64.b64decode(seen["pairs"][0]["image_png_base64"])
        image = Image.open(io.BytesIO(raw))
        assert image.size == (224, 224)
