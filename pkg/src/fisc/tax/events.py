"""Normalized chain events and their line-delimited file format.

Event files start with asset declarations fixing per-asset decimals,
followed by one `event` line per record; quantities are integer base
units and prices exact rationals.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from fractions import Fraction

from ..amounts import format_rational, parse_rational


class EventKind(Enum):
    PURCHASE = "purchase"
    MINING_REWARD = "mining_reward"
    POOL_PAYOUT = "pool_payout"
    STAKING_REWARD = "staking_reward"
    AIRDROP = "airdrop"
    FORK_RECEIPT = "fork_receipt"
    ICO_ALLOCATION = "ico_allocation"
    NFT_ROYALTY = "nft_royalty"
    LP_DEPOSIT = "lp_deposit"
    LP_WITHDRAWAL = "lp_withdrawal"
    VAULT_LIQUIDATION = "vault_liquidation"
    MEV_PAYOUT = "mev_payout"
    SALE = "sale"
    SWAP = "swap"
    SPEND = "spend"
    GIFT = "gift"
    SELF_TRANSFER = "self_transfer"


ACQUISITION_KINDS = {
    EventKind.PURCHASE,
    EventKind.MINING_REWARD,
    EventKind.POOL_PAYOUT,
    EventKind.STAKING_REWARD,
    EventKind.AIRDROP,
    EventKind.FORK_RECEIPT,
    EventKind.ICO_ALLOCATION,
    EventKind.NFT_ROYALTY,
    EventKind.MEV_PAYOUT,
}

DISPOSAL_KINDS = {
    EventKind.SALE,
    EventKind.SWAP,
    EventKind.SPEND,
    EventKind.GIFT,
    EventKind.VAULT_LIQUIDATION,
}


@dataclass(frozen=True)
class ChainEventRecord:
    seq: int
    timestamp: int  # unix seconds, UTC
    kind: EventKind
    asset: str
    quantity: int  # base units; positive except fee-only self transfers
    fmv_unit: Fraction  # reference-currency price per whole asset unit
    counterparty_address: str | None = None
    specid_lot: tuple[int, ...] | None = None
    metadata: dict[str, str] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.quantity < 0:
            raise ValueError("quantity must be non-negative")
        if self.quantity == 0 and self.kind is not EventKind.SELF_TRANSFER:
            raise ValueError("quantity must be positive for %s" % self.kind.value)

    def date_str(self) -> str:
        return datetime.fromtimestamp(self.timestamp, tz=timezone.utc).strftime("%Y-%m-%d")


class EventParseError(Exception):
    def __init__(self, line_no: int, message: str):
        super().__init__("line %d: %s" % (line_no, message))
        self.line_no = line_no


def _parse_timestamp(text: str) -> int:
    if text.isdigit() or (text.startswith("-") and text[1:].isdigit()):
        return int(text)
    stamp = datetime.fromisoformat(text.replace("Z", "+00:00"))
    if stamp.tzinfo is None:
        stamp = stamp.replace(tzinfo=timezone.utc)
    return int(stamp.timestamp())


def parse_event_file(text: str) -> tuple[dict[str, int], list[ChainEventRecord]]:
    """Parse an event file into (asset decimals, ordered records)."""
    decimals: dict[str, int] = {}
    records: list[ChainEventRecord] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        tag = fields[0]
        if tag == "asset":
            if len(fields) != 3:
                raise EventParseError(line_no, "asset lines are 'asset <id> <decimals>'")
            try:
                decimals[fields[1]] = int(fields[2])
            except ValueError:
                raise EventParseError(line_no, "bad decimals %r" % fields[2])
            continue
        if tag != "event":
            raise EventParseError(line_no, "unknown line tag %r" % tag)
        kv: dict[str, str] = {}
        meta: dict[str, str] = {}
        for item in fields[1:]:
            if "=" not in item:
                raise EventParseError(line_no, "expected key=value, got %r" % item)
            key, value = item.split("=", 1)
            if key.startswith("meta."):
                meta[key[5:]] = value
            else:
                kv[key] = value
        try:
            kind = EventKind(kv["kind"])
            asset = kv["asset"]
            if asset not in decimals:
                raise EventParseError(line_no, "asset %r not declared" % asset)
            record = ChainEventRecord(
                seq=int(kv["seq"]),
                timestamp=_parse_timestamp(kv["ts"]),
                kind=kind,
                asset=asset,
                quantity=int(kv["qty"]),
                fmv_unit=parse_rational(kv["fmv"]),
                counterparty_address=kv.get("counterparty"),
                specid_lot=tuple(int(x) for x in kv["specid"].split(",")) if "specid" in kv else None,
                metadata=meta,
            )
        except EventParseError:
            raise
        except KeyError as exc:
            raise EventParseError(line_no, "missing field %s" % exc)
        except (ValueError, ZeroDivisionError) as exc:
            raise EventParseError(line_no, str(exc))
        records.append(record)
    return decimals, records


def serialize_event(record: ChainEventRecord) -> str:
    parts = [
        "event",
        "seq=%d" % record.seq,
        "ts=%d" % record.timestamp,
        "kind=%s" % record.kind.value,
        "asset=%s" % record.asset,
        "qty=%d" % record.quantity,
        "fmv=%s" % format_rational(record.fmv_unit),
    ]
    if record.counterparty_address:
        parts.append("counterparty=%s" % record.counterparty_address)
    if record.specid_lot:
        parts.append("specid=%s" % ",".join(str(i) for i in record.specid_lot))
    for key in sorted(record.metadata):
        parts.append("meta.%s=%s" % (key, record.metadata[key]))
    return " ".join(parts)


def serialize_event_file(decimals: dict[str, int], records: list[ChainEventRecord]) -> str:
    lines = ["asset %s %d" % (asset, d) for asset, d in sorted(decimals.items())]
    lines.extend(serialize_event(r) for r in records)
    return "\n".join(lines) + "\n"
