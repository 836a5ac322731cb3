"""Service configuration: one JSON file, env-var overridable path."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from urllib.parse import urlsplit

from ..errors import ConfigError
from ..net import RetryPolicy
from ..query import QueryVariant

CONFIG_ENV_VAR = "REFWEAVE_CONFIG"

# Hosts the engine may always talk to; everything else must be earned via
# recorded fixtures or explicit configuration.
BASE_ALLOWED_HOSTS = (
    "export.arxiv.org",
    "arxiv.org",
    "api.biorxiv.org",
    "www.biorxiv.org",
    "www.medrxiv.org",
    "doi.org",
)


@dataclass(frozen=True)
class LlmSettings:
    mode: str = "mock"
    mock_dir: str | None = None
    endpoint: str | None = None
    model: str | None = None
    api_key: str | None = None


@dataclass(frozen=True)
class Config:
    data_dir: str
    transport_mode: str = "replay"
    store_dir: str | None = None
    extra_allowed_hosts: tuple[str, ...] = ()
    llm: LlmSettings = field(default_factory=LlmSettings)
    grobid_base_url: str = "http://localhost:8070"
    retry: RetryPolicy = field(default_factory=RetryPolicy)
    per_claim_limit: int = 5
    query_variant: QueryVariant = QueryVariant.CONTEXT_AWARE
    biorxiv_backend: str = "details"
    match_aggregate: str = "max"

    @property
    def store_path(self) -> Path:
        return Path(self.store_dir) if self.store_dir else Path(self.data_dir) / "store"

    @property
    def journal_path(self) -> Path:
        return Path(self.data_dir) / "journal.jsonl"

    def allowed_hosts(self) -> set[str]:
        hosts = set(BASE_ALLOWED_HOSTS)
        hosts.update(h.lower() for h in self.extra_allowed_hosts)
        grobid_host = urlsplit(self.grobid_base_url).hostname
        if grobid_host:
            hosts.add(grobid_host)
        if self.llm.mode == "http" and self.llm.endpoint:
            llm_host = urlsplit(self.llm.endpoint).hostname
            if llm_host:
                hosts.add(llm_host)
        if self.biorxiv_backend == "crossref":
            hosts.add("api.crossref.org")
        return hosts


def _require(payload: dict, key: str, kind, where: str):
    if key not in payload:
        raise ConfigError(f"{where}: missing required field {key!r}")
    value = payload[key]
    if not isinstance(value, kind):
        raise ConfigError(f"{where}: field {key!r} must be {kind.__name__}")
    return value


def parse_config(payload: dict, where: str = "config") -> Config:
    data_dir = _require(payload, "data_dir", str, where)

    transport = payload.get("transport", {})
    mode = transport.get("mode", "replay")
    if mode not in ("replay", "live"):
        raise ConfigError(f"{where}: transport.mode must be replay or live")

    llm_raw = payload.get("llm", {})
    llm = LlmSettings(
        mode=llm_raw.get("mode", "mock"),
        mock_dir=llm_raw.get("mock_dir"),
        endpoint=llm_raw.get("endpoint"),
        model=llm_raw.get("model"),
        api_key=llm_raw.get("api_key"),
    )
    if llm.mode == "mock":
        if not llm.mock_dir:
            raise ConfigError(f"{where}: llm.mock_dir is required in mock mode")
    elif llm.mode == "http":
        if not llm.endpoint or not llm.model:
            raise ConfigError(f"{where}: llm.endpoint and llm.model are required in http mode")
    else:
        raise ConfigError(f"{where}: llm.mode must be mock or http")

    retry_raw = payload.get("retry", {})
    try:
        retry = RetryPolicy(
            base_delay_ms=retry_raw.get("base_delay_ms", 500),
            factor=retry_raw.get("factor", 2.0),
            max_attempts=retry_raw.get("max_attempts", 4),
            jitter_fraction=retry_raw.get("jitter_fraction", 0.1),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: bad retry settings: {exc}") from exc

    search = payload.get("search", {})
    variant_raw = search.get("query_variant", QueryVariant.CONTEXT_AWARE.value)
    try:
        variant = QueryVariant(variant_raw)
    except ValueError as exc:
        raise ConfigError(f"{where}: unknown query variant {variant_raw!r}") from exc
    backend = search.get("biorxiv_backend", "details")
    if backend not in ("details", "crossref"):
        raise ConfigError(f"{where}: biorxiv_backend must be details or crossref")
    limit = search.get("per_claim_limit", 5)
    if not isinstance(limit, int) or limit < 1:
        raise ConfigError(f"{where}: per_claim_limit must be a positive integer")

    aggregate = payload.get("matching", {}).get("aggregate", "max")
    if aggregate not in ("max", "mean_top"):
        raise ConfigError(f"{where}: matching.aggregate must be max or mean_top")

    return Config(
        data_dir=data_dir,
        transport_mode=mode,
        store_dir=transport.get("store_dir"),
        extra_allowed_hosts=tuple(transport.get("extra_allowed_hosts", [])),
        llm=llm,
        grobid_base_url=payload.get("grobid", {}).get("base_url", "http://localhost:8070"),
        retry=retry,
        per_claim_limit=limit,
        query_variant=variant,
        biorxiv_backend=backend,
        match_aggregate=aggregate,
    )


def load_config(path: str | os.PathLike | None = None) -> Config:
    """Explicit path wins; otherwise the env var names the file."""
    chosen = Path(path) if path else None
    if chosen is None:
        from_env = os.environ.get(CONFIG_ENV_VAR)
        if not from_env:
            raise ConfigError(
                f"no config path given and {CONFIG_ENV_VAR} is not set"
            )
        chosen = Path(from_env)
    if not chosen.exists():
        raise ConfigError(f"config file not found: {chosen}")
    try:
        payload = json.loads(chosen.read_text(encoding="utf-8"))
    except ValueError as exc:
        raise ConfigError(f"{chosen}: invalid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise ConfigError(f"{chosen}: top level must be an object")
    return parse_config(payload, where=str(chosen))
