"""Deterministic discrete-event simulation of the attribution protocol.

A single logical timeline: messages are delivered in (tick, seq) order
from one queue; identical scenarios and seeds replay the exact trace.
"""

from __future__ import annotations

import hashlib
import heapq
import random
from dataclasses import dataclass, field
from fractions import Fraction

from ..tax.events import ChainEventRecord, EventKind
from ..tax.policy import JurisdictionPolicy
from ..tax.engine import withholding_amount
from .protocol import AttributionError, EoiMatrix, TaxAuthority
from .travelrule import PartyIdentity, TravelRuleRecord, build_travel_rule_record


@dataclass(frozen=True)
class QueryOutcome:
    affirmed: bool
    jurisdiction: str | None = None


@dataclass(frozen=True)
class TraceEntry:
    tick: int
    actor: str
    kind: str
    digest: str

    def render(self) -> str:
        return "%d %s %s %s" % (self.tick, self.actor, self.kind, self.digest)


def _digest(payload: str) -> str:
    return hashlib.sha256(payload.encode()).hexdigest()[:12]


@dataclass
class LinkConfig:
    latency: dict[tuple[str, str], int] = field(default_factory=dict)
    drop: dict[tuple[str, str], float] = field(default_factory=dict)
    default_latency: int = 1
    default_drop: float = 0.0

    def latency_of(self, src: str, dst: str) -> int:
        return self.latency.get((src, dst), self.default_latency)

    def drop_of(self, src: str, dst: str) -> float:
        return self.drop.get((src, dst), self.default_drop)


class AttributionNetwork:
    """Authorities joined by a latency/drop-configured broadcast bus."""

    def __init__(
        self,
        eoi: EoiMatrix | None = None,
        links: LinkConfig | None = None,
        seed: int = 0,
    ):
        self.eoi = eoi if eoi is not None else EoiMatrix()
        self.links = links if links is not None else LinkConfig()
        self.authorities: dict[str, TaxAuthority] = {}
        self.trace: list[TraceEntry] = []
        self.now = 0
        self._rng = random.Random(seed)
        self._seq = 0
        self._queue: list[tuple[int, int, str, str, str]] = []  # (at, seq, actor, kind, payload)

    def add_authority(self, code: str) -> TaxAuthority:
        if code in self.authorities:
            raise ValueError("jurisdiction %s already present" % code)
        authority = TaxAuthority(code, eoi=self.eoi)
        self.authorities[code] = authority
        return authority

    def _emit(self, tick: int, actor: str, kind: str, payload: str) -> None:
        self.trace.append(TraceEntry(tick, actor, kind, _digest(payload)))

    def _post(self, deliver_at: int, actor: str, kind: str, payload: str) -> None:
        heapq.heappush(self._queue, (deliver_at, self._seq, actor, kind, payload))
        self._seq += 1

    def find_home(self, address_text: str) -> str | None:
        """Jurisdiction whose registry holds the address (globally unique)."""
        for code in sorted(self.authorities):
            if address_text in self.authorities[code].registry:
                return code
        return None

    # --- the query protocol ---

    def query_beneficiary_jurisdiction(
        self, origin_code: str, beneficiary_address: str, deadline_ticks: int
    ) -> QueryOutcome:
        """Broadcast a signed query; first affirmative before the deadline
        wins (ties resolved to the lowest jurisdiction code)."""
        if origin_code not in self.authorities:
            raise AttributionError("origin jurisdiction %s not in simulation" % origin_code)
        start = self.now
        deadline = start + deadline_ticks
        query_payload = "query|%s|%s" % (origin_code, beneficiary_address)
        self._emit(start, origin_code, "query_broadcast", query_payload)
        for code in sorted(self.authorities):
            if code == origin_code:
                continue
            if self._rng.random() < self.links.drop_of(origin_code, code):
                self._emit(start, origin_code, "query_dropped_to_" + code, query_payload)
                continue
            self._post(start + self.links.latency_of(origin_code, code), code, "query", query_payload)

        responses: list[tuple[int, str]] = []
        while self._queue and self._queue[0][0] <= deadline:
            at, _, actor, kind, payload = heapq.heappop(self._queue)
            self.now = max(self.now, at)
            if kind == "query":
                responder = self.authorities[actor]
                if responder.knows_address(beneficiary_address) and self.eoi.permits(
                    origin_code, actor
                ):
                    reply = "affirm|%s|%s" % (actor, beneficiary_address)
                    self._emit(at, actor, "affirm", reply)
                    if self._rng.random() < self.links.drop_of(actor, origin_code):
                        self._emit(at, actor, "affirm_dropped", reply)
                        continue
                    self._post(at + self.links.latency_of(actor, origin_code), origin_code,
                               "response", reply)
                else:
                    self._emit(at, actor, "no_response", payload)
            elif kind == "response":
                code = payload.split("|")[1]
                responses.append((at, code))
        # Drain anything past the deadline without acting on it.
        while self._queue:
            heapq.heappop(self._queue)
        self.now = deadline
        if not responses:
            self._emit(deadline, origin_code, "unaffirmed", query_payload)
            return QueryOutcome(False)
        arrival, winner = min(responses)
        if len({code for at, code in responses if at == arrival}) > 1:
            self._emit(arrival, origin_code, "anomaly_multiple_affirmations", query_payload)
        self._emit(arrival, origin_code, "affirmed_" + winner, query_payload)
        return QueryOutcome(True, winner)

    # --- originating a transfer ---

    def originate_transfer(
        self,
        origin_address: str,
        beneficiary_address: str,
        amount_base_units: int,
        policy: JurisdictionPolicy,
        asset: str = "BTC",
        decimals: int = 8,
        unit_price: Fraction = Fraction(1),
        deadline_ticks: int = 8,
        seq: int = 1,
        identities: dict[str, PartyIdentity] | None = None,
    ) -> tuple[Fraction, ChainEventRecord, TravelRuleRecord | None]:
        """Resolve the counterparty, compute withholding, emit the event.

        The origin wallet must be attributable (registered somewhere);
        a travel-rule record is built only when both endpoints resolve.
        """
        if amount_base_units < 0:
            raise ValueError("amount must be non-negative")
        origin_home = self.find_home(origin_address)
        if origin_home is None:
            raise AttributionError("origin address %s is not registered" % origin_address)
        outcome = self.query_beneficiary_jurisdiction(
            origin_home, beneficiary_address, deadline_ticks
        )
        attribution = "affirmed" if outcome.affirmed else "unaffirmed"
        proceeds = Fraction(amount_base_units, 10**decimals) * unit_price
        withheld = withholding_amount(proceeds, attribution, policy)
        event = ChainEventRecord(
            seq=seq,
            timestamp=self.now,
            kind=EventKind.SPEND if amount_base_units else EventKind.SELF_TRANSFER,
            asset=asset,
            quantity=amount_base_units,
            fmv_unit=unit_price,
            counterparty_address=beneficiary_address,
            metadata={"attribution": attribution},
        )
        travel = None
        if outcome.affirmed and identities:
            origin_id = identities.get(origin_address)
            beneficiary_id = identities.get(beneficiary_address)
            if origin_id and beneficiary_id:
                travel = build_travel_rule_record(origin_id, beneficiary_id)
        self._emit(self.now, origin_home, "withholding_" + attribution,
                   "withhold|%s|%s" % (origin_address, withheld))
        return withheld, event, travel

    def render_trace(self) -> str:
        return "\n".join(entry.render() for entry in self.trace) + "\n"
