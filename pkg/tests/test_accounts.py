"""Tests for roles, authorization, and OAuth-backed authentication."""

import pytest

from kforge.accounts import (
    ACTIONS,
    ANONYMOUS,
    Role,
    allowed_actions,
    authorize,
    role_for_scopes,
)
from kforge.errors import OAuthDenied

from helpers import make_server

EXPECTED_MATRIX = {
    Role.VIEWER: {"browse", "search"},
    Role.EDITOR: {"browse", "search", "submit_for_review", "ask_question"},
    Role.OWNER: {"browse", "search", "submit_for_review", "ask_question", "register_term"},
    Role.ADMIN: {
        "browse",
        "search",
        "submit_for_review",
        "ask_question",
        "register_term",
        "trigger_template_update",
        "unarchive",
        "webhook_admin",
    },
}


class TestRoleMatrix:
    @pytest.mark.parametrize("role", list(Role))
    def test_allow_sets(self, role):
        assert allowed_actions(role) == EXPECTED_MATRIX[role]

    def test_monotone_supersets(self):
        ladder = list(Role)
        for lower, higher in zip(ladder, ladder[1:]):
            assert allowed_actions(lower) < allowed_actions(higher)

    @pytest.mark.parametrize("role", list(Role))
    @pytest.mark.parametrize("action", sorted(ACTIONS))
    def test_full_grid(self, role, action):
        from kforge.accounts import UserAccount

        account = UserAccount(id="u", forge_login="u", role=role)
        assert authorize(account, action) == (action in EXPECTED_MATRIX[role])

    def test_viewer_can_search(self):
        assert authorize(ANONYMOUS, "search")

    def test_unknown_action_rejected(self):
        with pytest.raises(ValueError):
            authorize(ANONYMOUS, "launch_rockets")


class TestScopeMapping:
    def test_read_only_scopes_yield_editor(self):
        assert role_for_scopes(["read:user"]) == Role.EDITOR

    def test_repo_and_hook_scopes_yield_owner(self):
        assert role_for_scopes(["repo", "admin:repo_hook"]) == Role.OWNER
        assert role_for_scopes(["repo", "write:repo_hook"]) == Role.OWNER

    def test_repo_without_hooks_is_editor(self):
        assert role_for_scopes(["repo"]) == Role.EDITOR


class TestAuthenticate:
    def test_editor_login(self):
        server = make_server()
        server.forge.grant_oauth("code1", "katia", ["read:user"])
        account = server.accounts.authenticate("code1")
        assert account.role == Role.EDITOR
        assert account.api_token
        assert server.accounts.by_token(account.api_token) is account

    def test_owner_login(self):
        server = make_server()
        server.forge.grant_oauth("code2", "vsoch", ["repo", "admin:repo_hook"])
        assert server.accounts.authenticate("code2").role == Role.OWNER

    def test_configured_admin(self):
        server = make_server()  # helpers configure admin_logins=("root",)
        server.forge.grant_oauth("code3", "root", ["read:user"])
        assert server.accounts.authenticate("code3").role == Role.ADMIN

    def test_invalid_code(self):
        server = make_server()
        with pytest.raises(OAuthDenied):
            server.accounts.authenticate("bogus")

    def test_role_never_downgrades(self):
        server = make_server()
        server.forge.grant_oauth("a", "katia", ["repo", "admin:repo_hook"])
        server.accounts.authenticate("a")
        server.forge.grant_oauth("b", "katia", ["read:user"])
        assert server.accounts.authenticate("b").role == Role.OWNER

    def test_unknown_token_is_viewer(self):
        server = make_server()
        assert server.accounts.by_token("nope") is ANONYMOUS
        assert server.accounts.by_token(None) is ANONYMOUS
