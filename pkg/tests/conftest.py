"""Shared fixtures: did:key identities, agents on loopback, and a JSON server."""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from datacred.agent import Agent, AgentConfig, Policy
from datacred.did import generate_did_key
from datacred.keys import generate_keypair
from datacred.resolver import KeyBackend, Resolver

PASSPHRASE = "correct horse battery staple"


@pytest.fixture
def fast_wallet_kdf(monkeypatch):
    """Cheap scrypt cost for protocol-heavy tests; crypto tests keep defaults."""
    monkeypatch.setattr(
        "datacred.wallet._DEFAULT_KDF", {"name": "scrypt", "n": 2**11, "r": 8, "p": 1}
    )


@pytest.fixture
def key_resolver():
    """Resolver handling did:key only; no network possible."""
    return Resolver(backends=[KeyBackend()])


@pytest.fixture
def issuer():
    """(keypair, Did, DidDocument) for a fresh issuer identity."""
    keypair = generate_keypair()
    did, document = generate_did_key(keypair.public_key)
    return keypair, did, document


@pytest.fixture
def subject():
    keypair = generate_keypair()
    did, document = generate_did_key(keypair.public_key)
    return keypair, did, document


class JsonServer:
    """Serves a mutable {path: (status, json)} map on loopback."""

    def __init__(self):
        self.routes: dict[str, tuple[int, object]] = {}
        self.request_count = 0
        outer = self

        class Handler(BaseHTTPRequestHandler):
            def do_GET(self):  # noqa: N802
                outer.request_count += 1
                entry = outer.routes.get(self.path)
                if entry is None:
                    status, body = 404, {"error": "not found"}
                else:
                    status, body = entry
                payload = json.dumps(body).encode()
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(payload)))
                self.end_headers()
                self.wfile.write(payload)

            def log_message(self, *args):
                pass

        self.server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self.port = self.server.server_address[1]
        self.thread = threading.Thread(
            target=lambda: self.server.serve_forever(poll_interval=0.05), daemon=True
        )
        self.thread.start()

    @property
    def host(self) -> str:
        return f"127.0.0.1:{self.port}"

    def url(self, path: str) -> str:
        return f"http://{self.host}{path}"

    def set(self, path: str, body: object, status: int = 200) -> None:
        self.routes[path] = (status, body)

    def close(self) -> None:
        self.server.shutdown()
        self.server.server_close()


@pytest.fixture
def json_server():
    server = JsonServer()
    yield server
    server.close()


@pytest.fixture
def agent_factory(tmp_path, monkeypatch):
    """Builds running agents on loopback; stops them all on teardown."""
    monkeypatch.setenv("DATACRED_PASSPHRASE", PASSPHRASE)
    running: list[Agent] = []

    def build(role: str, name: str | None = None, did_method: str = "web",
              policy: Policy | None = None, start: bool = True, **overrides) -> Agent:
        name = name or role
        config = AgentConfig(
            role=role,
            wallet_path=str(tmp_path / f"{name}.wallet"),
            did_method=did_method,
            allow_insecure_http=True,
            policy=policy or Policy(),
            **overrides,
        )
        agent = Agent(config)
        if start:
            agent.start()
            running.append(agent)
        return agent

    def restart(agent: Agent) -> Agent:
        agent.stop()
        if agent in running:
            running.remove(agent)
        fresh = Agent(agent.config).start()
        running.append(fresh)
        return fresh

    build.restart = restart
    yield build
    for agent in running:
        agent.stop()
