"""Command-line surface: wallets, ledger file, options, tally, simulator.

Offers and announces travel as JSON files or stdout (the peer-to-peer
channel is out of band). Machine-readable JSON goes to stdout,
diagnostics to stderr. Exit codes: 0 success, 1 usage or flow error,
2 entry rejected by validation, 3 corrupt or unreadable file.
"""

from __future__ import annotations

import json
import sys

import click

from . import __version__
from .crypto import EncodingError, to_hex
from .entries import entry_from_json, entry_to_json
from .ledger import (
    Ledger,
    LedgerError,
    LedgerFormatError,
    ReplayError,
    export_state_lines,
)
from .sim import ScenarioError, run_scenario_file
from .voting import (
    OptionEntity,
    OptionRegistry,
    TallyError,
    finalize,
    load_registry,
    load_reveals,
    save_registry,
    save_reveals,
    verify_tally,
)
from .wallet import (
    Wallet,
    WalletAuthError,
    WalletError,
    WalletFormatError,
    message_from_json,
    message_to_json,
)

EXIT_USAGE = 1
EXIT_REJECTED = 2
EXIT_CORRUPT = 3

ENTITIES_MAGIC = "LLV1-OPTIONS"


class ValidationRejected(Exception):
    """An otherwise well-formed entry was rejected by the validator."""


def _emit(ctx: click.Context, doc) -> None:
    if ctx.obj and ctx.obj.get("pretty"):
        click.echo(json.dumps(doc, indent=2, sort_keys=True))
    else:
        click.echo(json.dumps(doc, sort_keys=True, separators=(",", ":")))


def _load_json(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise LedgerFormatError(f"cannot read {path}: {exc}") from exc


def _load_wallet(path, passphrase) -> Wallet:
    return Wallet.restore(path, passphrase)


def _load_entities(path) -> dict[str, OptionEntity]:
    doc = _load_json(path)
    if not isinstance(doc, dict) or doc.get("version") != ENTITIES_MAGIC:
        raise LedgerFormatError(f"{path} is not an option-entities file")
    return {
        payload["label"]: OptionEntity.from_payload(payload)
        for payload in doc["entities"]
    }


def _save_entities(entities: dict[str, OptionEntity], path) -> None:
    doc = {
        "version": ENTITIES_MAGIC,
        "entities": [entities[label].to_payload() for label in sorted(entities)],
    }
    with open(path, "w", encoding="ascii") as fh:
        json.dump(doc, fh, sort_keys=True, indent=2)
        fh.write("\n")


passphrase_option = click.option(
    "--passphrase",
    envvar="LLV_PASSPHRASE",
    prompt=True,
    hide_input=True,
    help="Wallet passphrase (or set LLV_PASSPHRASE).",
)


@click.group()
@click.version_option(__version__, prog_name="llv")
@click.option("--pretty", is_flag=True, help="Indent JSON output for humans.")
@click.pass_context
def cli(ctx: click.Context, pretty: bool) -> None:
    """Voting-power unit ledger: hash-chain commitments, unlinkable
    transfers, reversible delegations, verifiable tally."""
    ctx.obj = {"pretty": pretty}


@cli.command()
@click.option("--out", required=True, type=click.Path(), help="Wallet file to create.")
@passphrase_option
@click.pass_context
def keygen(ctx, out, passphrase):
    """Create a wallet; prints its recovery mnemonic exactly once."""
    wallet = Wallet.create()
    wallet.persist(out, passphrase)
    _emit(ctx, {"wallet": str(out), "mnemonic": wallet.mnemonic()})


@cli.command()
@click.option("--wallet", "wallet_path", required=True, type=click.Path(exists=True))
@click.option("--count", default=1, show_default=True, help="Units to register.")
@passphrase_option
@click.pass_context
def register(ctx, wallet_path, count, passphrase):
    """Produce genesis registrations for this wallet (for `genesis`)."""
    wallet = _load_wallet(wallet_path, passphrase)
    registrations = [wallet.make_genesis_registration() for _ in range(count)]
    wallet.persist(wallet_path, passphrase)
    _emit(ctx, [entry_to_json(r) for r in registrations])


@cli.command()
@click.option("--registrations", "reg_path", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
@click.pass_context
def genesis(ctx, reg_path, out):
    """Bootstrap a ledger from a JSON list of genesis registrations."""
    docs = _load_json(reg_path)
    if not isinstance(docs, list):
        raise LedgerFormatError("registrations file must hold a JSON list")
    registrations = [entry_from_json(doc) for doc in docs]
    ledger = Ledger.genesis_init(registrations)
    ledger.save(out)
    _emit(ctx, {"ledger": str(out), "genesis_count": ledger.genesis_count})


@cli.command()
@click.option("--wallet", "wallet_path", required=True, type=click.Path(exists=True))
@click.option("--ledger", "ledger_path", required=True, type=click.Path(exists=True))
@passphrase_option
@click.pass_context
def sync(ctx, wallet_path, ledger_path, passphrase):
    """Claim incoming units and sweep spent ones."""
    wallet = _load_wallet(wallet_path, passphrase)
    ledger = Ledger.load(ledger_path)
    claimed = wallet.detect_incoming(ledger.view())
    wallet.persist(wallet_path, passphrase)
    _emit(
        ctx,
        {
            "claimed": [to_hex(r.unit) for r in claimed],
            "spendable": len(wallet.spendable_units(ledger.view())),
        },
    )


@cli.command()
@click.option("--wallet", "wallet_path", required=True, type=click.Path(exists=True))
@click.option("--ledger", "ledger_path", required=True, type=click.Path(exists=True))
@passphrase_option
@click.pass_context
def balance(ctx, wallet_path, ledger_path, passphrase):
    """List spendable units and delegation stubs (read-only)."""
    wallet = _load_wallet(wallet_path, passphrase)
    view = Ledger.load(ledger_path).view()
    _emit(
        ctx,
        {
            "spendable": [to_hex(r.unit) for r in wallet.spendable_units(view)],
            "pending": len(wallet.pending),
            "stubs": [
                {
                    "index": i,
                    "delegated_output": to_hex(s.delegated_output),
                    "used": s.used,
                }
                for i, s in enumerate(wallet.stubs)
            ],
        },
    )


@cli.command()
@click.option("--wallet", "wallet_path", required=True, type=click.Path(exists=True))
@click.option("--ledger", "ledger_path", required=True, type=click.Path(exists=True))
@click.option("--unit", "unit_prefix", required=True, help="Hex prefix of a spendable unit.")
@passphrase_option
@click.pass_context
def announce(ctx, wallet_path, ledger_path, unit_prefix, passphrase):
    """Emit the input-announce message a transfer receiver needs."""
    wallet = _load_wallet(wallet_path, passphrase)
    view = Ledger.load(ledger_path).view()
    record = _find_record(wallet, view, unit_prefix)
    from .wallet import InputAnnounce

    _emit(ctx, message_to_json(InputAnnounce(input_unit=record.unit)))


@cli.command("offer-delegation")
@click.option("--wallet", "wallet_path", required=True, type=click.Path(exists=True))
@passphrase_option
@click.pass_context
def offer_delegation(ctx, wallet_path, passphrase):
    """Emit a delegation offer (separable hashes; reversible handover)."""
    wallet = _load_wallet(wallet_path, passphrase)
    offer = wallet.make_delegation_offer()
    wallet.persist(wallet_path, passphrase)
    _emit(ctx, message_to_json(offer))


@cli.command("offer-transfer")
@click.option("--wallet", "wallet_path", required=True, type=click.Path(exists=True))
@click.option("--input-announce", "announce_path", required=True, type=click.Path(exists=True))
@passphrase_option
@click.pass_context
def offer_transfer(ctx, wallet_path, announce_path, passphrase):
    """Emit a transfer offer (only the precomputed output; irreversible)."""
    wallet = _load_wallet(wallet_path, passphrase)
    message = message_from_json(_load_json(announce_path))
    from .wallet import InputAnnounce

    if not isinstance(message, InputAnnounce):
        raise click.UsageError("--input-announce file is not an input_announce message")
    offer = wallet.make_transfer_offer(message)
    wallet.persist(wallet_path, passphrase)
    _emit(ctx, message_to_json(offer))


@cli.command()
@click.option("--wallet", "wallet_path", required=True, type=click.Path(exists=True))
@click.option("--unit", "unit_prefix", required=True, help="Hex prefix of the unit to spend.")
@click.option("--offer", "offer_path", required=True, type=click.Path(exists=True))
@click.option("--ledger", "ledger_path", required=True, type=click.Path(exists=True))
@click.option("--registry", "registry_path", type=click.Path(exists=True), default=None)
@click.option("--delegation", "kind", flag_value="delegation")
@click.option("--transfer", "kind", flag_value="transfer")
@passphrase_option
@click.pass_context
def send(ctx, wallet_path, unit_prefix, offer_path, ledger_path, registry_path, kind, passphrase):
    """Build and submit a transition from an offer file."""
    from .wallet import DelegationOffer, TransferOffer

    wallet = _load_wallet(wallet_path, passphrase)
    ledger = _load_ledger_with_options(ledger_path, registry_path)
    record = _find_record(wallet, ledger.view(), unit_prefix)
    offer = message_from_json(_load_json(offer_path))
    if isinstance(offer, DelegationOffer):
        if kind == "transfer":
            raise click.UsageError("offer file holds a delegation offer")
        transition, _stub = wallet.accept_delegation_offer(record, offer)
    elif isinstance(offer, TransferOffer):
        if kind == "delegation":
            raise click.UsageError("offer file holds a transfer offer")
        transition = wallet.accept_transfer_offer(record, offer)
    else:
        raise click.UsageError("offer file is not an offer message")
    verdict = ledger.append_slot([transition])[0]
    if verdict.accepted:
        ledger.save(ledger_path)
        wallet.detect_incoming(ledger.view())
    wallet.persist(wallet_path, passphrase)
    _emit(ctx, {"verdict": verdict.to_json(), "output_unit": to_hex(transition.output_unit)})
    if not verdict.accepted:
        raise ValidationRejected(verdict.reason.value)


@cli.command()
@click.option("--wallet", "wallet_path", required=True, type=click.Path(exists=True))
@click.option("--stub", "stub_sel", required=True, help="Stub index from `balance`, or 'latest'.")
@click.option("--ledger", "ledger_path", required=True, type=click.Path(exists=True))
@click.option("--registry", "registry_path", type=click.Path(exists=True), default=None)
@click.option("--force", is_flag=True, help="Rebuild from an already-used stub.")
@passphrase_option
@click.pass_context
def reverse(ctx, wallet_path, stub_sel, ledger_path, registry_path, force, passphrase):
    """Build and submit a reversal of a past delegation."""
    wallet = _load_wallet(wallet_path, passphrase)
    ledger = _load_ledger_with_options(ledger_path, registry_path)
    if stub_sel == "latest":
        candidates = [s for s in wallet.stubs if not s.used]
        if not candidates:
            raise click.UsageError("wallet holds no unused delegation stubs")
        stub = candidates[-1]
    else:
        try:
            stub = wallet.stubs[int(stub_sel)]
        except (ValueError, IndexError):
            raise click.UsageError(f"no stub {stub_sel!r}; see `balance`") from None
    reversal = wallet.build_reversal(stub, ledger.view(), force=force)
    verdict = ledger.append_slot([reversal])[0]
    if verdict.accepted:
        ledger.save(ledger_path)
        wallet.detect_incoming(ledger.view())
    wallet.persist(wallet_path, passphrase)
    _emit(ctx, {"verdict": verdict.to_json(), "new_output": to_hex(reversal.new_output)})
    if not verdict.accepted:
        raise ValidationRejected(verdict.reason.value)


@cli.command()
@click.option("--wallet", "wallet_path", required=True, type=click.Path(exists=True))
@click.option("--option", "option_label", required=True)
@click.option("--registry", "registry_path", required=True, type=click.Path(exists=True))
@click.option("--entities", "entities_path", required=True, type=click.Path(exists=True))
@click.option("--ledger", "ledger_path", required=True, type=click.Path(exists=True))
@click.option("--unit", "unit_prefix", default=None, help="Hex prefix; defaults to first spendable.")
@passphrase_option
@click.pass_context
def vote(ctx, wallet_path, option_label, registry_path, entities_path, ledger_path, unit_prefix, passphrase):
    """Full vote round trip against a locally hosted option entity."""
    from .wallet import InputAnnounce

    wallet = _load_wallet(wallet_path, passphrase)
    registry = load_registry(registry_path)
    entities = _load_entities(entities_path)
    entity = entities.get(option_label)
    if entity is None or registry.key_of(option_label) != entity.public_key:
        raise click.UsageError(f"option {option_label!r} not hosted by {entities_path}")
    ledger = Ledger.load(ledger_path)
    ledger.attach_options(registry.key_set())
    record = _find_record(wallet, ledger.view(), unit_prefix)
    offer = entity.request_vote_offer(InputAnnounce(input_unit=record.unit))
    transition = wallet.accept_transfer_offer(record, offer)
    verdict = ledger.append_slot([transition])[0]
    if verdict.accepted:
        ledger.save(ledger_path)
        entity.confirm(ledger.view())
        wallet.detect_incoming(ledger.view())
    wallet.persist(wallet_path, passphrase)
    _save_entities(entities, entities_path)
    _emit(
        ctx,
        {
            "verdict": verdict.to_json(),
            "option": option_label,
            "vote_unit": to_hex(transition.output_unit),
        },
    )
    if not verdict.accepted:
        raise ValidationRejected(verdict.reason.value)


@cli.command("options-init")
@click.option("--labels", required=True, help="Comma-separated option labels.")
@click.option("--registry", "registry_path", required=True, type=click.Path())
@click.option("--entities", "entities_path", required=True, type=click.Path())
@click.pass_context
def options_init(ctx, labels, registry_path, entities_path):
    """Create option entities: a public registry and a secrets file."""
    names = [w.strip() for w in labels.split(",") if w.strip()]
    if len(set(names)) != len(names) or not names:
        raise click.UsageError("labels must be non-empty and unique")
    entities = {label: OptionEntity.create(label) for label in names}
    registry = OptionRegistry({label: e.public_key for label, e in entities.items()})
    save_registry(registry, registry_path)
    _save_entities(entities, entities_path)
    _emit(ctx, {"registry": str(registry_path), "entities": str(entities_path), "options": names})


@cli.command()
@click.option("--entities", "entities_path", required=True, type=click.Path(exists=True))
@click.option("--option", "option_label", default=None, help="Only this option.")
@click.option("--out", required=True, type=click.Path())
@click.option("--reveal", "confirmed", is_flag=True, help="Confirm publishing plaintext nonces.")
@click.pass_context
def reveal(ctx, entities_path, option_label, out, confirmed):
    """Write the entities' plaintext-nonce reveals for the tally."""
    if not confirmed:
        raise click.UsageError("refusing to write plaintext nonces without --reveal")
    entities = _load_entities(entities_path)
    if option_label is not None:
        if option_label not in entities:
            raise click.UsageError(f"unknown option {option_label!r}")
        entities = {option_label: entities[option_label]}
    reveals = [entities[label].make_reveal() for label in sorted(entities)]
    save_reveals(reveals, out)
    _emit(ctx, {"reveals": str(out), "claims": sum(len(r.claims) for r in reveals)})


@cli.command()
@click.option("--ledger", "ledger_path", required=True, type=click.Path(exists=True))
@click.option("--reveals", "reveals_path", required=True, type=click.Path(exists=True))
@click.option("--registry", "registry_path", required=True, type=click.Path(exists=True))
@click.pass_context
def tally(ctx, ledger_path, reveals_path, registry_path):
    """Verify the tally from public data (freezes the state in-process)."""
    ledger = Ledger.load(ledger_path)
    registry = load_registry(registry_path)
    reveals = load_reveals(reveals_path)
    finalize(ledger.state)
    result = verify_tally(ledger.view(), reveals, registry, ledger.genesis_count)
    _emit(ctx, result.to_json())


@cli.command()
@click.option("--ledger", "ledger_path", required=True, type=click.Path(exists=True))
@click.option("--registry", "registry_path", type=click.Path(exists=True), default=None)
@click.pass_context
def verify(ctx, ledger_path, registry_path):
    """Full replay; exits 0 iff the ledger file is self-consistent."""
    ledger = _load_ledger_with_options(ledger_path, registry_path)
    state, _ = ledger.replay()
    _emit(
        ctx,
        {
            "ok": True,
            "slots": len(ledger.slots),
            "genesis_count": ledger.genesis_count,
            "live": len(state.live),
            "state_hash": state.snapshot_hash().hex(),
        },
    )


@cli.command()
@click.option("--ledger", "ledger_path", required=True, type=click.Path(exists=True))
@click.option("--raw", is_flag=True, help="Plain sorted hex ids, one per line.")
@click.pass_context
def state(ctx, ledger_path, raw):
    """Current live unit ids."""
    ledger = Ledger.load(ledger_path)
    if raw:
        click.echo(export_state_lines(ledger.state), nl=False)
        return
    _emit(
        ctx,
        {
            "live": sorted(to_hex(u) for u in ledger.state.live),
            "count": len(ledger.state.live),
            "state_hash": ledger.state.snapshot_hash().hex(),
        },
    )


@cli.group()
def sim() -> None:
    """Deterministic scenario simulator."""


@sim.command("run")
@click.argument("scenario_path", type=click.Path(exists=True))
@click.option("--out", "out_path", type=click.Path(), default=None, help="Write full report here.")
@click.pass_context
def sim_run(ctx, scenario_path, out_path):
    """Run a scenario file; optionally write the JSON report."""
    report = run_scenario_file(scenario_path)
    if out_path:
        with open(out_path, "w", encoding="ascii") as fh:
            json.dump(report, fh, sort_keys=True, indent=2)
            fh.write("\n")
    _emit(ctx, report)


def _find_record(wallet: Wallet, view, unit_prefix):
    spendable = wallet.spendable_units(view)
    if not spendable:
        raise click.UsageError("wallet has no spendable units on this ledger")
    if unit_prefix is None:
        return spendable[0]
    matches = [r for r in spendable if to_hex(r.unit).startswith(unit_prefix.lower())]
    if not matches:
        raise click.UsageError(f"no spendable unit matches {unit_prefix!r}")
    if len(matches) > 1:
        raise click.UsageError(f"unit prefix {unit_prefix!r} is ambiguous")
    return matches[0]


def _load_ledger_with_options(ledger_path, registry_path) -> Ledger:
    ledger = Ledger.load(ledger_path)
    if registry_path is not None:
        ledger.attach_options(load_registry(registry_path).key_set())
    return ledger


def main(argv=None) -> int:
    """Entry point with the documented exit-code mapping."""
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except ValidationRejected:
        return EXIT_REJECTED
    except click.ClickException as exc:
        exc.show(file=sys.stderr)
        return EXIT_USAGE
    except click.Abort:
        click.echo("aborted", err=True)
        return EXIT_USAGE
    except (LedgerFormatError, ReplayError, WalletFormatError, WalletAuthError, EncodingError) as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_CORRUPT
    except (WalletError, LedgerError, TallyError, ScenarioError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
