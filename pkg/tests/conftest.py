import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest


class StubServer:
    """Scriptable HTTP stub: enqueue (status, payload) pairs per route."""

    def __init__(self):
        self.responses: dict[str, list[tuple[int, dict]]] = {}
        self.requests: list[dict] = []
        self._lock = threading.Lock()
        self._httpd: ThreadingHTTPServer | None = None

    def enqueue(self, route: str, status: int, payload: dict, repeat: int = 1):
        with self._lock:
            self.responses.setdefault(route, []).extend([(status, payload)] * repeat)

    def pop(self, route: str) -> tuple[int, dict]:
        with self._lock:
            queue = self.responses.get(route, [])
            if queue:
                return queue.pop(0)
        return 500, {"error": f"no scripted response for {route}"}

    def record(self, request: dict):
        with self._lock:
            self.requests.append(request)

    @property
    def url(self) -> str:
        host, port = self._httpd.server_address
        return f"http://{host}:{port}"

    def start(self):
        stub = self

        class Handler(BaseHTTPRequestHandler):
            def _respond(self, body):
                stub.record(
                    {
                        "method": self.command,
                        "path": self.path,
                        "headers": {k.lower(): v for k, v in self.headers.items()},
                        "body": body,
                    }
                )
                status, payload = stub.pop(self.path)
                data = json.dumps(payload).encode()
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                self.wfile.write(data)

            def do_POST(self):
                length = int(self.headers.get("Content-Length", 0))
                raw = self.rfile.read(length)
                try:
                    body = json.loads(raw) if raw else None
                except json.JSONDecodeError:
                    body = raw.decode(errors="replace")
                self._respond(body)

            def do_GET(self):
                self._respond(None)

            def log_message(self, *args):
                pass

        self._httpd = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        thread = threading.Thread(target=self._httpd.serve_forever, daemon=True)
        thread.start()
        return self

    def stop(self):
        if self._httpd is not None:
            self._httpd.shutdown()
            self._httpd.server_close()


@pytest.fixture
def stub_server():
    server = StubServer().start()
    yield server
    server.stop()


def chat_reply(text: str) -> dict:
    """Chat-completion-shaped payload carrying one assistant message."""
    return {"choices": [{"message": {"content": text}}]}
