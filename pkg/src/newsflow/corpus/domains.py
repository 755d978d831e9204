"""URL-to-domain normalization with offline registered-domain reduction."""

from __future__ import annotations

import re
from functools import lru_cache
from importlib import resources
from urllib.parse import urlsplit

__all__ = ["extract_domain", "registered_domain", "normalize_host"]

_HOST_RE = re.compile(r"^[a-z0-9](?:[a-z0-9.\-]*[a-z0-9])?$")
_IPV4_RE = re.compile(r"^\d{1,3}(?:\.\d{1,3}){3}$")


@lru_cache(maxsize=1)
def _suffix_rules() -> tuple[frozenset[str], frozenset[str], frozenset[str]]:
    """(plain rules, wildcard bases, exception rules) from the bundled snapshot."""
    text = resources.files("newsflow.data").joinpath("public_suffix.dat").read_text("utf-8")
    plain, wildcard, exception = set(), set(), set()
    for line in text.splitlines():
        line = line.strip().lower()
        if not line or line.startswith("//"):
            continue
        if line.startswith("!"):
            exception.add(line[1:])
        elif line.startswith("*."):
            wildcard.add(line[2:])
        else:
            plain.add(line)
    return frozenset(plain), frozenset(wildcard), frozenset(exception)


def normalize_host(host: str) -> str | None:
    """Lowercase, strip port and a leading "www."; None when not a host."""
    host = host.strip().lower().rstrip(".")
    if host.startswith("["):  # bracketed IPv6 is out of scope
        return None
    if ":" in host:
        host = host.split(":", 1)[0]
    if host.startswith("www.") and "." in host[4:]:
        # keep "www.<tld>" intact: there 'www' can be the registrable label
        host = host[4:]
    if not host or ".." in host or not _HOST_RE.match(host):
        return None
    return host


def registered_domain(host: str) -> str:
    """Reduce a host to its registrable domain using the bundled snapshot.

    A host that is itself a public suffix (or an IP address) is returned
    unchanged.
    """
    if _IPV4_RE.match(host):
        return host
    plain, wildcard, exception = _suffix_rules()
    labels = host.split(".")
    n = len(labels)
    best = 1  # implicit '*' rule: the bare TLD
    exception_len = None
    for i in range(n):
        candidate = ".".join(labels[i:])
        length = n - i
        if candidate in exception:
            # an exception rule prevails: suffix is the rule minus its first label
            exception_len = length - 1
        elif candidate in plain:
            best = max(best, length)
        elif length >= 2 and ".".join(labels[i + 1:]) in wildcard:
            best = max(best, length)
    suffix_len = exception_len if exception_len is not None else best
    if n <= suffix_len:
        return host
    return ".".join(labels[-(suffix_len + 1):])


def extract_domain(url: str) -> str | None:
    """Registrable domain of a URL, or None when no host can be extracted.

    Pure string processing: lowercases the host, strips scheme, path, query,
    port and a leading "www.", then reduces to the registered domain via the
    bundled public-suffix snapshot. Never touches the network.
    """
    if not url or not isinstance(url, str):
        return None
    text = url.strip()
    if not text:
        return None
    try:
        parts = urlsplit(text)
    except ValueError:
        return None
    netloc = parts.netloc
    if not netloc:
        # tolerate scheme-less inputs like "example.com/page" or bare domains
        head = text.split("/", 1)[0]
        if " " in head or "." not in head or "@" in head:
            return None
        netloc = head
    if "@" in netloc:  # credentials in URLs are not accepted
        return None
    host = normalize_host(netloc)
    if host is None or "." not in host:
        return None
    return registered_domain(host)
