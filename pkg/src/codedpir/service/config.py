"""JSON deployment config: ``{servers: ["host:port", ...], code: path, protocol: {name, k}, seed}``."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from ..arraycodes import ArrayCode
from ..gf import GF2
from ..pircode import PirCode
from ..protocols import LinearPirProtocol, make_protocol


class ConfigError(ValueError):
    """Missing or malformed configuration."""


def parse_endpoint(text: str) -> tuple[str, int]:
    host, sep, port = text.rpartition(":")
    if not sep or not port.isdigit():
        raise ConfigError(f"endpoint {text!r} is not host:port")
    return host or "127.0.0.1", int(port)


@dataclass(frozen=True)
class ServiceConfig:
    servers: tuple[tuple[str, int], ...]
    code_path: Path
    protocol_name: str
    k: int
    seed: int | None = None

    @classmethod
    def from_json(cls, obj: dict, base: Path = Path(".")) -> "ServiceConfig":
        try:
            servers = tuple(parse_endpoint(s) for s in obj["servers"])
            code_path = Path(obj["code"])
            proto = obj["protocol"]
            name, k = str(proto["name"]), int(proto["k"])
        except (KeyError, TypeError) as e:
            raise ConfigError(f"config missing field: {e}") from None
        if not code_path.is_absolute():
            code_path = base / code_path
        seed = obj.get("seed")
        return cls(servers, code_path, name, k, None if seed is None else int(seed))

    @classmethod
    def load(cls, path: str | Path) -> "ServiceConfig":
        path = Path(path)
        try:
            obj = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config {path}: {e}") from None
        return cls.from_json(obj, path.parent)

    def to_json(self) -> dict:
        return {
            "servers": [f"{h}:{p}" for h, p in self.servers],
            "code": str(self.code_path),
            "protocol": {"name": self.protocol_name, "k": self.k},
            "seed": self.seed,
        }

    def load_code(self) -> PirCode | ArrayCode:
        """A PIR code, or an array code when the file has ``m1``."""
        try:
            obj = json.loads(self.code_path.read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read code {self.code_path}: {e}") from None
        return ArrayCode.from_json(obj) if "m1" in obj else PirCode.from_json(obj)

    def protocol(self, code: PirCode | ArrayCode) -> LinearPirProtocol:
        field_ = code.field if isinstance(code, PirCode) else GF2
        return make_protocol(self.protocol_name, self.k, field_)
