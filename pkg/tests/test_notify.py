"""Tests for subscriptions and notification delivery."""

import pytest

from kforge.accounts import Role
from kforge.errors import UnknownAccount
from kforge.notify import Notifier, RecordingMailSink

from helpers import add_account, editor, make_server, owner


@pytest.fixture
def server():
    s = make_server()
    s.registry.register_term("hpc", owner(s))
    s.pump_forge()
    return s


def sink(server) -> RecordingMailSink:
    return server.mail_sender


class TestRecipients:
    def test_owners_and_subscribers(self, server):
        add_account(server, "owner-2", Role.OWNER)
        server.store.articles["hpc"].owners.append("owner-2")
        sub = add_account(server, "reader", Role.EDITOR)
        server.notifier.set_subscription(sub.id, "hpc", True)
        server.notifier.emit("review_requested", "hpc", ["owner-1", "owner-2"])
        recipients = sorted(m[0] for m in sink(server).messages)
        assert recipients == ["owner-1", "owner-2", "reader"]

    def test_unsubscribed_owner_excluded(self, server):
        server.notifier.set_subscription("owner-1", "hpc", False)
        server.notifier.emit("repository_archived", "hpc", ["owner-1"])
        assert sink(server).messages == []

    def test_question_asked_reaches_owners_only(self, server):
        sub = add_account(server, "reader", Role.EDITOR)
        server.notifier.set_subscription(sub.id, "hpc", True)
        server.notifier.emit("question_asked", "hpc", ["owner-1"])
        assert [m[0] for m in sink(server).messages] == ["owner-1"]


class TestDelivery:
    def test_no_duplicates_for_one_event(self, server):
        event = server.notifier.build_event("review_requested", "hpc", ["owner-1"])
        server.notifier.notify(event)
        server.notifier.notify(event)  # replayed delivery attempt
        assert len(sink(server).messages) == 1

    def test_backend_down_then_up(self, server):
        sink(server).fail_next(1)
        event = server.notifier.build_event("review_requested", "hpc", ["owner-1"])
        records = server.notifier.notify(event)
        assert not records[0].delivered
        assert sink(server).messages == []
        retried = server.notifier.retry_pending()
        assert [r.delivered for r in retried] == [True]
        assert len(sink(server).messages) == 1
        # a further retry sends nothing new
        server.notifier.retry_pending()
        assert len(sink(server).messages) == 1

    def test_partial_failure_only_retries_failed_recipient(self, server):
        add_account(server, "owner-2", Role.OWNER)
        sink(server).fail_next(1)
        event = server.notifier.build_event("review_requested", "hpc", ["owner-1", "owner-2"])
        server.notifier.notify(event)
        assert len(sink(server).messages) == 1
        server.notifier.retry_pending()
        recipients = sorted(m[0] for m in sink(server).messages)
        assert recipients == ["owner-1", "owner-2"]


class TestSubscriptions:
    def test_upsert_is_idempotent(self, server):
        account = editor(server)
        server.notifier.set_subscription(account.id, "hpc", True)
        server.notifier.set_subscription(account.id, "hpc", True)
        assert account.subscriptions == {"hpc": True}

    def test_unknown_account(self, server):
        with pytest.raises(UnknownAccount):
            server.notifier.set_subscription("ghost", "hpc", True)

    def test_accepted_review_subscribes_author(self, server):
        actor = editor(server)
        review = server.submit_for_review(
            "hpc", "# HPC\n\nplain content\n", actor
        )
        server.pump_forge()
        server.forge.merge_pr("askci-term-hpc", review.pr.number)
        server.pump_forge()
        assert review.status == "accepted"
        assert actor.subscriptions.get("hpc") is True

    def test_unsubscribe_then_event(self, server):
        actor = editor(server)
        server.notifier.set_subscription(actor.id, "hpc", True)
        server.notifier.set_subscription(actor.id, "hpc", False)
        server.notifier.emit("review_requested", "hpc", ["owner-1"])
        assert actor.id not in [m[0] for m in sink(server).messages]
