"""User accounts, the role ladder, and OAuth-backed authentication."""

from __future__ import annotations

import secrets
from dataclasses import dataclass, field
from enum import IntEnum

from .errors import UnknownAccount


class Role(IntEnum):
    VIEWER = 0
    EDITOR = 1
    OWNER = 2
    ADMIN = 3

    def __str__(self) -> str:
        return self.name.lower()


# Cumulative allow-sets: each role extends the one below it.
_ROLE_GRANTS = {
    Role.VIEWER: {"browse", "search"},
    Role.EDITOR: {"submit_for_review", "ask_question"},
    Role.OWNER: {"register_term"},
    Role.ADMIN: {"trigger_template_update", "unarchive", "webhook_admin"},
}

ACTIONS = frozenset(a for grants in _ROLE_GRANTS.values() for a in grants)


def allowed_actions(role: Role) -> frozenset[str]:
    granted: set[str] = set()
    for r in Role:
        granted |= _ROLE_GRANTS[r]
        if r == role:
            break
    return frozenset(granted)


@dataclass
class UserAccount:
    id: str
    forge_login: str
    role: Role
    api_token: str | None = None
    # term -> active flag; at most one row per (account, term)
    subscriptions: dict[str, bool] = field(default_factory=dict)

    def subscribed_terms(self) -> set[str]:
        return {term for term, active in self.subscriptions.items() if active}

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "forge_login": self.forge_login,
            "role": str(self.role),
            "api_token": self.api_token,
            "subscriptions": dict(self.subscriptions),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "UserAccount":
        return cls(
            id=data["id"],
            forge_login=data["forge_login"],
            role=Role[data["role"].upper()],
            api_token=data.get("api_token"),
            subscriptions=dict(data.get("subscriptions", {})),
        )


ANONYMOUS = UserAccount(id="anonymous", forge_login="", role=Role.VIEWER)


def authorize(account: UserAccount, action: str) -> bool:
    if action not in ACTIONS:
        raise ValueError(f"unknown action {action!r}")
    return action in allowed_actions(account.role)


# OAuth scopes that let the server create repos and webhooks on the
# user's behalf; anything less yields the read-only editor role.
_OWNER_SCOPES = {"repo", "admin:repo_hook", "write:repo_hook"}


def role_for_scopes(scopes: list[str]) -> Role:
    granted = set(scopes)
    if "repo" in granted and granted & {"admin:repo_hook", "write:repo_hook"}:
        return Role.OWNER
    return Role.EDITOR


class AccountService:
    """Creates and looks up accounts; viewer is the synthetic default."""

    def __init__(self, store, forge, admin_logins: tuple[str, ...] = ()):
        self.store = store
        self.forge = forge
        self.admin_logins = tuple(admin_logins)

    def authenticate(self, oauth_code: str) -> UserAccount:
        identity = self.forge.exchange_oauth_code(oauth_code)
        login = identity["login"]
        role = role_for_scopes(identity.get("scopes", []))
        if login in self.admin_logins:
            role = Role.ADMIN
        with self.store.lock:
            account = self.store.accounts.get(login)
            if account is None:
                account = UserAccount(id=login, forge_login=login, role=role)
                self.store.accounts[login] = account
            else:
                account.role = max(account.role, role)
            if account.api_token is None:
                account.api_token = secrets.token_hex(20)
            self.store.tokens[account.api_token] = account.id
        return account

    def by_token(self, token: str | None) -> UserAccount:
        if not token:
            return ANONYMOUS
        with self.store.lock:
            account_id = self.store.tokens.get(token)
            if account_id is None:
                return ANONYMOUS
            return self.store.accounts[account_id]

    def require(self, account_id: str) -> UserAccount:
        account = self.store.accounts.get(account_id)
        if account is None:
            raise UnknownAccount(account_id)
        return account
