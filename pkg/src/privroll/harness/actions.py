"""Scenario script actions and their canonical (de)serialization."""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields


@dataclass(frozen=True)
class Join:
    client: str
    token: int
    value: int
    g: int
    fee: int


@dataclass(frozen=True)
class Transfer:
    sender: str
    recipient: str
    token: int
    value: int
    out_fee: int
    tx_fee: int


@dataclass(frozen=True)
class Burn:
    client: str
    token: int
    fee: int


@dataclass(frozen=True)
class Advance:
    blocks: int = 1


@dataclass(frozen=True)
class Seal:
    pass


@dataclass(frozen=True)
class Scan:
    pass


@dataclass(frozen=True)
class Retrieve:
    client: str


@dataclass(frozen=True)
class Inject:
    """Tamper with the next sealed batch so that ``rule`` is violated."""

    rule: str


@dataclass(frozen=True)
class Replay:
    """Resubmit the client's last spend, bypassing operator validation (a double spend)."""

    client: str


ACTIONS = {cls.__name__.lower(): cls for cls in (Join, Transfer, Burn, Advance, Seal, Scan, Retrieve, Inject, Replay)}


def action_to_dict(action) -> dict:
    return {"op": type(action).__name__.lower(), **asdict(action)}


def action_from_dict(d: dict):
    d = dict(d)
    cls = ACTIONS[d.pop("op")]
    names = {f.name for f in fields(cls)}
    unknown = set(d) - names
    if unknown:
        raise ValueError(f"unknown fields for {cls.__name__}: {sorted(unknown)}")
    return cls(**d)
