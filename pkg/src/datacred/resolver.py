"""DID resolution with pluggable backends and a TTL cache.

Backends, tried in order:

- KeyBackend        did:key, synthesized locally, never touches the network
- WebBackend        did:web over HTTPS (plain HTTP only to loopback, and only
                    when explicitly enabled for tests)
- StaticBackend     in-memory map, for tests
- DirectoryBackend  documents read from an offline bundle's dids.json

Every backend counts its fetches so callers can assert cache behavior and
prove offline verification performed zero network operations.
"""

from __future__ import annotations

import ipaddress
import json
import threading
import time
from pathlib import Path
from urllib.parse import urlsplit

import requests

from .did import Did, DidDocument, did_key_public_key, did_web_url, generate_did_key, parse_did
from .errors import DocumentInvalid, FetchFailed, NotFound, UnsupportedMethod

DEFAULT_CACHE_TTL = 300.0
_HTTP_TIMEOUT = 5.0


def is_loopback_host(host: str) -> bool:
    if host == "localhost":
        return True
    try:
        return ipaddress.ip_address(host).is_loopback
    except ValueError:
        return False


class KeyBackend:
    """Synthesizes documents for did:key identifiers."""

    network = False

    def __init__(self) -> None:
        self.fetch_count = 0

    def supports(self, did: Did) -> bool:
        return did.method == "key"

    def fetch(self, did: Did) -> dict:
        self.fetch_count += 1
        public_key = did_key_public_key(did)
        _, document = generate_did_key(public_key)
        if document.id != did.text:
            raise DocumentInvalid(f"{did.text}: identifier does not round-trip")
        return document.to_json()


class WebBackend:
    """Fetches did:web documents from their well-known URL."""

    network = True

    def __init__(self, allow_insecure_loopback: bool = False, timeout: float = _HTTP_TIMEOUT):
        self.allow_insecure_loopback = allow_insecure_loopback
        self.timeout = timeout
        self.fetch_count = 0

    def supports(self, did: Did) -> bool:
        return did.method == "web"

    def _url(self, did: Did) -> str:
        url = did_web_url(did)
        if self.allow_insecure_loopback:
            host = urlsplit(url).hostname or ""
            if is_loopback_host(host):
                url = "http" + url[len("https"):]
        return url

    def fetch(self, did: Did) -> dict:
        self.fetch_count += 1
        url = self._url(did)
        try:
            response = requests.get(url, timeout=self.timeout)
        except requests.RequestException as exc:
            raise FetchFailed(f"{did.text}: {exc}") from exc
        if response.status_code == 404:
            raise NotFound(f"{did.text}: {url} returned 404")
        if response.status_code >= 400:
            raise FetchFailed(f"{did.text}: {url} returned {response.status_code}")
        try:
            return response.json()
        except ValueError as exc:
            raise DocumentInvalid(f"{did.text}: response is not JSON: {exc}") from exc


class StaticBackend:
    """In-memory DID-to-document map for tests and fixtures."""

    network = False

    def __init__(self, documents: dict[str, dict] | None = None):
        self.documents = dict(documents or {})
        self.fetch_count = 0

    def register(self, document: DidDocument | dict) -> None:
        obj = document.to_json() if isinstance(document, DidDocument) else document
        self.documents[obj["id"]] = obj

    def supports(self, did: Did) -> bool:
        return did.text in self.documents

    def fetch(self, did: Did) -> dict:
        self.fetch_count += 1
        try:
            return self.documents[did.text]
        except KeyError:
            raise NotFound(did.text) from None


class DirectoryBackend:
    """Documents from an offline verification bundle.

    The bundle's ``dids.json`` is a JSON object mapping DID strings to their
    documents, shipped alongside the credential it supports.
    """

    network = False
    INDEX_NAME = "dids.json"

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self.fetch_count = 0
        index = self.directory / self.INDEX_NAME
        if not index.is_file():
            raise FetchFailed(f"{index}: offline bundle has no {self.INDEX_NAME}")
        self._documents: dict[str, dict] = json.loads(index.read_text(encoding="utf-8"))

    def supports(self, did: Did) -> bool:
        return did.text in self._documents

    def fetch(self, did: Did) -> dict:
        self.fetch_count += 1
        try:
            return self._documents[did.text]
        except KeyError:
            raise NotFound(did.text) from None


class Resolver:
    """Resolve DIDs to validated documents through ordered backends."""

    def __init__(self, backends: list | None = None, cache_ttl: float = DEFAULT_CACHE_TTL):
        self.backends = backends if backends is not None else [KeyBackend(), WebBackend()]
        self.cache_ttl = cache_ttl
        self._cache: dict[str, tuple[DidDocument, float]] = {}
        self._lock = threading.Lock()

    @property
    def network_fetch_count(self) -> int:
        """Total fetches performed by network-touching backends."""
        return sum(b.fetch_count for b in self.backends if getattr(b, "network", False))

    def clear_cache(self) -> None:
        with self._lock:
            self._cache.clear()

    def resolve(self, did: Did | str) -> DidDocument:
        """Fetch, validate, and cache the document for a DID.

        The returned document's id always equals the requested DID; anything
        else is rejected as DocumentInvalid.
        """
        if isinstance(did, str):
            did = parse_did(did)

        now = time.monotonic()
        with self._lock:
            cached = self._cache.get(did.text)
            if cached is not None and now - cached[1] < self.cache_ttl:
                return cached[0]

        backend = next((b for b in self.backends if b.supports(did)), None)
        if backend is None:
            raise UnsupportedMethod(f"no backend resolves did:{did.method}")

        raw = backend.fetch(did)
        document = DidDocument.from_json(raw)
        if document.id != did.text:
            raise DocumentInvalid(
                f"document id {document.id} does not match requested {did.text}"
            )
        with self._lock:
            self._cache[did.text] = (document, time.monotonic())
        return document
