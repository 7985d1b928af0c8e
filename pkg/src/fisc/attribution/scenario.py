"""Declarative attribution scenarios: parse, run, and render outputs."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from ..amounts import format_rational, parse_rational
from ..signatures import DEFAULT_SCHEME
from ..tax.policy import JurisdictionPolicy
from .protocol import AttributionError, build_ownership_proof
from .sim import AttributionNetwork, LinkConfig
from .travelrule import PartyIdentity


class ScenarioError(Exception):
    def __init__(self, line_no: int, message: str):
        super().__init__("line %d: %s" % (line_no, message))
        self.line_no = line_no


@dataclass
class Wallet:
    label: str
    address: str
    seed: bytes


@dataclass
class AttributionScenario:
    seed: int = 0
    jurisdictions: list[str] = field(default_factory=list)
    eoi_rows: list[tuple[str, str, str]] = field(default_factory=list)
    latencies: list[tuple[str, str, int]] = field(default_factory=list)
    drops: list[tuple[str, str, Fraction]] = field(default_factory=list)
    dscs: list[tuple[str, str, str]] = field(default_factory=list)  # (jurisdiction, tin, holder label)
    registrations: list[tuple[str, str, str, bool]] = field(default_factory=list)
    identities: dict[str, PartyIdentity] = field(default_factory=dict)
    transfers: list[tuple[str, str, int, int]] = field(default_factory=list)
    standard_withholding: Fraction = Fraction(1, 10)
    elevated_withholding: Fraction = Fraction(3, 10)


def parse_attribution_scenario(text: str) -> AttributionScenario:
    scenario = AttributionScenario()
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        tag, args = fields[0], fields[1:]
        try:
            if tag == "seed":
                scenario.seed = int(args[0])
            elif tag == "jurisdiction":
                scenario.jurisdictions.append(args[0])
            elif tag == "eoi":
                if args[2] not in ("allow", "deny"):
                    raise ValueError("eoi must be allow or deny")
                scenario.eoi_rows.append((args[0], args[1], args[2]))
            elif tag == "latency":
                scenario.latencies.append((args[0], args[1], int(args[2])))
            elif tag == "drop":
                scenario.drops.append((args[0], args[1], parse_rational(args[2])))
            elif tag == "dsc":
                scenario.dscs.append((args[0], args[1], args[2]))
            elif tag in ("register", "register_tampered"):
                # register <jurisdiction> <tin> <wallet-label>
                scenario.registrations.append(
                    (args[0], args[1], args[2], tag == "register_tampered")
                )
            elif tag == "identity":
                # identity <wallet-label> name=<n> physical=<p>
                kv = dict(item.split("=", 1) for item in args[1:])
                scenario.identities[args[0]] = PartyIdentity(
                    name=kv.get("name", ""),
                    account="",  # filled once the wallet address is derived
                    physical_address=kv.get("physical"),
                    national_id=kv.get("national_id"),
                    customer_id=kv.get("customer_id"),
                    birth_date_place=kv.get("birth"),
                )
            elif tag == "transfer":
                # transfer <origin-label> <beneficiary-label-or-addr:..> <base-units> <deadline>
                scenario.transfers.append((args[0], args[1], int(args[2]), int(args[3])))
            elif tag == "withholding":
                kv = dict(item.split("=", 1) for item in args)
                if "standard" in kv:
                    scenario.standard_withholding = parse_rational(kv["standard"])
                if "elevated" in kv:
                    scenario.elevated_withholding = parse_rational(kv["elevated"])
            else:
                raise ValueError("unknown directive %r" % tag)
        except ScenarioError:
            raise
        except (IndexError, ValueError, KeyError) as exc:
            raise ScenarioError(line_no, str(exc))
    if not scenario.jurisdictions:
        raise ScenarioError(0, "scenario declares no jurisdictions")
    return scenario


@dataclass
class ScenarioRun:
    trace: str
    ledger: str
    rejections: list[str]


def run_attribution_scenario(scenario: AttributionScenario) -> ScenarioRun:
    """Execute a scenario deterministically and render its outputs."""
    network = AttributionNetwork(seed=scenario.seed)
    network.links = LinkConfig(
        latency={(a, b): t for a, b, t in scenario.latencies},
        drop={(a, b): float(p) for a, b, p in scenario.drops},
    )
    for code in scenario.jurisdictions:
        network.add_authority(code)
    for asker, responder, verdict in scenario.eoi_rows:
        if verdict == "allow":
            network.eoi.allow(asker, responder)

    scheme = DEFAULT_SCHEME
    holder_keys: dict[tuple[str, str], bytes] = {}
    for jurisdiction, tin, holder_label in scenario.dscs:
        private, public = scheme.keypair(b"holder|" + holder_label.encode())
        network.authorities[jurisdiction].issue_dsc(tin, public)
        holder_keys[(jurisdiction, tin)] = private

    wallets: dict[str, Wallet] = {}
    rejections: list[str] = []
    for jurisdiction, tin, wallet_label, tampered in scenario.registrations:
        seed = b"wallet|" + wallet_label.encode()
        proof = build_ownership_proof(
            tin, seed, holder_keys[(jurisdiction, tin)], scheme=scheme
        )
        if tampered:
            bad_sig = bytes([proof.wallet_signature[0] ^ 1]) + proof.wallet_signature[1:]
            proof = type(proof)(
                proof.tin, proof.address, proof.challenge, proof.wallet_pubkey,
                bad_sig, proof.dsc_signature,
            )
        try:
            network.authorities[jurisdiction].register_ownership(proof)
            wallets[wallet_label] = Wallet(wallet_label, proof.address.text, seed)
            network._emit(0, jurisdiction, "registered", proof.address.text)
        except AttributionError as exc:
            rejections.append("%s %s: %s" % (jurisdiction, wallet_label, exc))
            network._emit(0, jurisdiction, "registration_rejected", str(exc))

    identities: dict[str, PartyIdentity] = {}
    for label, identity in scenario.identities.items():
        wallet = wallets.get(label)
        if wallet:
            identities[wallet.address] = PartyIdentity(
                identity.name, wallet.address, identity.physical_address,
                identity.national_id, identity.customer_id, identity.birth_date_place,
            )

    policy = JurisdictionPolicy(
        standard_withholding=scenario.standard_withholding,
        elevated_withholding=scenario.elevated_withholding,
    )
    ledger_lines = ["index origin beneficiary attribution withheld"]
    for index, (origin_label, beneficiary_ref, amount, deadline) in enumerate(scenario.transfers):
        origin = wallets[origin_label]
        if beneficiary_ref.startswith("addr:"):
            beneficiary = beneficiary_ref[5:]
        elif beneficiary_ref in wallets:
            beneficiary = wallets[beneficiary_ref].address
        else:
            # Unregistered label: derive its would-be address.
            _, pub = scheme.keypair(b"wallet|" + beneficiary_ref.encode())
            from ..addresses import Scheme as AddrScheme, address_from_pubkey

            beneficiary = address_from_pubkey(pub, AddrScheme.BASE58CHECK_P2PKH).text
        withheld, event, _ = network.originate_transfer(
            origin.address, beneficiary, amount, policy,
            deadline_ticks=deadline, seq=index + 1, identities=identities,
        )
        ledger_lines.append(
            "%d %s %s %s %s"
            % (
                index, origin.address, beneficiary,
                event.metadata["attribution"], format_rational(withheld),
            )
        )
    return ScenarioRun(network.render_trace(), "\n".join(ledger_lines) + "\n", rejections)
