"""Minimal stand-in for an external chat completion service.

Accepts POST {system, context, query} and replies {"text": ...}, which
is the contract the riskscope fallback client expects. Point the
service at it with RISKSCOPE_LLM_URL=http://127.0.0.1:8765 to see
external-provenance replies in the dashboard.

Usage: python3 scripts/mock_llm.py [port]
"""

from __future__ import annotations

import json
import sys
from http.server import BaseHTTPRequestHandler, HTTPServer


class Handler(BaseHTTPRequestHandler):
    def do_POST(self):  # noqa: N802 - http.server naming
        length = int(self.headers.get("Content-Length", "0"))
        doc = json.loads(self.rfile.read(length) or b"{}")
        query = doc.get("query", "")
        n_turns = len(doc.get("context", {}).get("recent_turns", []))
        body = json.dumps(
            {
                "text": (
                    f"(mock external assistant, {n_turns} turns of context) "
                    f"I can only speak generally here, but regarding {query!r}: "
                    "please rely on the engine's grounded answers for anything clinical."
                )
            }
        ).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def log_message(self, fmt, *args):
        pass


def main() -> int:
    port = int(sys.argv[1]) if len(sys.argv) > 1 else 8765
    server = HTTPServer(("127.0.0.1", port), Handler)
    print(f"mock chat service on http://127.0.0.1:{port} (Ctrl-C to stop)")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    return 0


if __name__ == "__main__":
    sys.exit(main())
