"""Shared fixtures: a fully wired server against the forge simulator."""

from datetime import datetime, timezone

from kforge.accounts import Role, UserAccount
from kforge.app import Server
from kforge.config import ServerConfig
from kforge.forge import ForgeSimulator, WebhookDelivery, sign_body
from kforge.notify import RecordingMailSink
from kforge.store import Store
from kforge.tasks import ManualClock, TaskQueue

NOW = datetime(2020, 1, 12, tzinfo=timezone.utc)


def make_server(**overrides) -> Server:
    defaults = dict(discourse_secret="disco-secret", admin_logins=("root",))
    defaults.update(overrides)
    config = ServerConfig(**defaults).validate()
    sim = ForgeSimulator(
        content_file=config.content_file,
        namespace_prefix=config.namespace_prefix,
        clock=lambda: NOW,
    )
    return Server(
        config,
        store=Store(),
        forge=sim,
        mail_sender=RecordingMailSink(),
        queue=TaskQueue(clock=ManualClock()),
        clock=lambda: NOW,
    )


def add_account(server: Server, account_id: str, role: Role) -> UserAccount:
    account = UserAccount(id=account_id, forge_login=account_id, role=role)
    account.api_token = f"token-{account_id}"
    server.store.accounts[account_id] = account
    server.store.tokens[account.api_token] = account_id
    return account


def owner(server) -> UserAccount:
    return add_account(server, "owner-1", Role.OWNER)


def editor(server) -> UserAccount:
    return add_account(server, "editor-1", Role.EDITOR)


def admin(server) -> UserAccount:
    return add_account(server, "admin-1", Role.ADMIN)


def signed_delivery(
    body: bytes,
    secret: str,
    event_kind: str = "push",
    delivery_id: str = "manual-1",
) -> WebhookDelivery:
    return WebhookDelivery(
        delivery_id=delivery_id,
        event_kind=event_kind,
        signature_header=sign_body(secret, body),
        raw_body=body,
        received_at=NOW,
    )
