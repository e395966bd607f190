"""Shared test helpers."""
import json
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np
from agentpower.radio_env import Scenario


def make_scenario(gains, p_init=None, targets=None, p_max=10.0, bandwidth=10.0, mu=None):
    g = np.asarray(gains, dtype=float)
    n = g.shape[0]
    return Scenario(
        n_pairs=n,
        gains=g,
        positions=np.zeros((n, 2, 2)),
        area_side_m=10.0,
        p_init=np.ones(n) if p_init is None else p_init,
        p_max=p_max,
        bandwidth_khz=bandwidth,
        mu=np.ones(n) if mu is None else mu,
        targets_kbps=np.zeros(n) if targets is None else targets,
    )


class MockChatServer:
    """Local chat-completions endpoint replaying a queue of (status, body, delay)."""

    def __init__(self):
        self.replies = []
        self.requests = []
        self.headers = []
        server = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, *args):
                pass

            def do_POST(self):
                length = int(self.headers.get("Content-Length", 0))
                server.requests.append((self.path, json.loads(self.rfile.read(length))))
                server.headers.append(dict(self.headers))
                status, body, delay = server.replies.pop(0) if server.replies else (200, server.completion("ok"), 0)
                if delay:
                    time.sleep(delay)
                payload = body.encode() if isinstance(body, str) else json.dumps(body).encode()
                try:
                    self.send_response(status)
                    self.send_header("Content-Type", "application/json")
                    self.send_header("Content-Length", str(len(payload)))
                    self.end_headers()
                    self.wfile.write(payload)
                except (BrokenPipeError, ConnectionResetError):
                    pass

        self.httpd = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self.httpd.daemon_threads = True
        self.thread = threading.Thread(target=self.httpd.serve_forever, daemon=True)

    @staticmethod
    def completion(text):
        return {"choices": [{"index": 0, "message": {"role": "assistant", "content": text}}]}

    @property
    def base_url(self):
        host, port = self.httpd.server_address
        return f"http://{host}:{port}/v1"

    def queue(self, status, body, delay=0.0):
        self.replies.append((status, body, delay))
