"""Acceptance suite: one test per server-side criterion, with time budgets.

Each test prints a PASS line when its criterion holds within the stated
runtime budget (run with -s to see them live).  Everything runs against
the in-memory forge simulator and the recording mail sink.
"""

import json
import random
import time
from contextlib import contextmanager

import pytest

from kforge.accounts import Role, UserAccount, allowed_actions, authorize
from kforge.errors import ValidationFailed
from kforge.spans import parse_spans, validate_article

from corpus import generate_document
from helpers import add_account, admin, editor, make_server, owner
from oracle_scanner import naive_error_codes, naive_triples

PAPER_SPAN = '<span id="question-how-did-hpc-originate"></span>'

VALID_EDIT = (
    "# HPC\n\n"
    f"{PAPER_SPAN}\n"
    "It began with early supercomputers.\n"
)


@contextmanager
def criterion(number, description, budget_seconds):
    start = time.perf_counter()
    yield
    elapsed = time.perf_counter() - start
    assert elapsed < budget_seconds, (
        f"criterion {number} exceeded budget: {elapsed:.2f}s >= {budget_seconds}s"
    )
    print(f"PASS: criterion {number} ({description}) in {elapsed:.2f}s")


def fresh_article_server(term="hpc"):
    server = make_server()
    server.registry.register_term(term, owner(server))
    server.pump_forge()
    return server


def test_c01_paper_span_fixture():
    with criterion(1, "span fixture parses to one dereferenceable question", 1.0):
        doc = f"# HPC\n\n{PAPER_SPAN}\nAnswer text.\n"
        parsed = parse_spans(doc)
        assert len(parsed.questions) == 1
        q = parsed.questions[0]
        assert q.slug == "how-did-hpc-originate"
        assert q.anchor == "question-how-did-hpc-originate"
        # the anchor dereferences: its byte offset points at the span itself
        assert doc.encode()[q.location.byte_offset :].startswith(b"<span id=\"question-")


def test_c02_parser_oracle_equivalence():
    with criterion(2, "1000-document oracle equivalence", 30.0):
        rng = random.Random(11231019)
        for _ in range(1000):
            doc = generate_document(rng)
            parsed = parse_spans(doc)
            got = sorted(
                [(q.slug, "question", q.location.line) for q in parsed.questions]
                + [(e.slug, "example", e.location.line) for e in parsed.examples]
            )
            assert got == sorted(naive_triples(doc)), doc
            codes = [e.code.value for e in validate_article(doc).errors]
            assert codes == naive_error_codes(doc), doc


def test_c03_registration_conformance():
    with criterion(3, "register_term creates namespaced repo with webhook", 1.0):
        server = make_server()
        article = server.registry.register_term("hpc", owner(server))
        assert article.repo.name == "askci-term-hpc"
        repo = server.forge.repos["askci-term-hpc"]
        assert len(repo.hooks) == 1
        assert set(repo.hooks[0].events) == {"push", "pull_request", "repository"}


def test_c04_review_lifecycle_end_to_end():
    with criterion(4, "review lifecycle: dispatch, open, accept, reject", 5.0):
        server = fresh_article_server()
        author = editor(server)

        review = server.submit_for_review("hpc", VALID_EDIT, author)
        assert review.status == "pending_dispatch"
        (dispatch,) = server.forge.dispatches
        assert dispatch.event_type == "request-review"

        server.pump_forge()
        assert review.status == "open"
        assert review.pr is not None

        server.forge.merge_pr("askci-term-hpc", review.pr.number)
        server.pump_forge()
        assert review.status == "accepted"
        article = server.store.articles["hpc"]
        assert article.parsed.source_hash == review.submitted_content_hash
        assert article.content == VALID_EDIT

        second = server.submit_for_review("hpc", VALID_EDIT + "\nMore.\n", author)
        server.pump_forge()
        assert second.status == "open"
        server.forge.close_pr("askci-term-hpc", second.pr.number)
        server.pump_forge()
        assert second.status == "rejected"


def test_c05_validation_gating():
    with criterion(5, "failed validation produces zero dispatches", 1.0):
        server = fresh_article_server()
        bad = VALID_EDIT + PAPER_SPAN + "\n"
        with pytest.raises(ValidationFailed):
            server.submit_for_review("hpc", bad, editor(server))
        assert server.forge.dispatches == []


def test_c06_webhook_security_and_idempotency():
    with criterion(6, "tampered delivery rejected; replays process once", 2.0):
        server = fresh_article_server()
        server.forge.repos["askci-term-hpc"].files["README.md"] = VALID_EDIT
        server.forge.push_content("askci-term-hpc", VALID_EDIT)
        (item,) = server.forge.take_deliveries()

        from dataclasses import replace

        tampered = replace(item.delivery, raw_body=item.delivery.raw_body + b" ")
        assert server.receive_webhook("hpc", tampered) == 401
        assert server.queue.tasks() == []

        for _ in range(3):
            assert server.receive_webhook("hpc", item.delivery) == 202
        server.queue.run_until_idle()
        synced = [e for e in server.store.article_events if e.kind == "synced"]
        assert len(synced) == 1
        assert server.store.articles["hpc"].content == VALID_EDIT


def test_c07_archive_rule():
    with criterion(7, "rename archives; pushes frozen; unarchive restores", 2.0):
        server = fresh_article_server()
        server.forge.push_content("askci-term-hpc", VALID_EDIT)
        server.pump_forge()
        article = server.store.articles["hpc"]

        server.forge.rename_repo("askci-term-hpc", "cooking-blog")
        server.pump_forge()
        assert article.status == "archived"

        index_before = article.parsed
        server.forge.push_content("cooking-blog", "hostile content")
        server.pump_forge()
        assert article.content == VALID_EDIT
        assert article.parsed is index_before

        server.forge.rename_repo("cooking-blog", "askci-term-hpc")
        server.pump_forge()
        restored = server.registry.unarchive("hpc", admin(server))
        assert restored.status == "active"
        server.forge.push_content("askci-term-hpc", VALID_EDIT + "\nSynced again.\n")
        server.pump_forge()
        assert article.content.endswith("Synced again.\n")


def test_c08_topic_sync():
    with criterion(8, "repository topics become article tags", 1.0):
        server = fresh_article_server()
        server.forge.set_topics("askci-term-hpc", ["hpc", "containers"])
        server.pump_forge()
        assert server.store.articles["hpc"].tags == {"hpc", "containers"}


def test_c09_discourse_bridge():
    with criterion(9, "bridge opens exactly one issue per new matching post", 2.0):
        server = fresh_article_server()
        body = json.dumps(
            {"post": {"id": 42, "topic_title": "hpc question", "raw": "about hpc", "url": "u"}}
        ).encode()
        from kforge.forge import sign_body

        sig = sign_body("disco-secret", body)
        assert server.receive_discourse(body, sig) == 202
        server.queue.run_until_idle()
        assert len(server.forge.repos["askci-term-hpc"].issues) == 1

        assert server.receive_discourse(body, sig) == 202  # redelivery
        server.queue.run_until_idle()
        assert len(server.forge.repos["askci-term-hpc"].issues) == 1

        no_match = json.dumps(
            {"post": {"id": 43, "topic_title": "off topic", "raw": "nothing known", "url": "u"}}
        ).encode()
        assert server.receive_discourse(no_match, sign_body("disco-secret", no_match)) == 202
        server.queue.run_until_idle()
        assert len(server.forge.repos["askci-term-hpc"].issues) == 1


def test_c10_notifications():
    with criterion(10, "owners+subscribers notified exactly once; author auto-subscribed", 2.0):
        server = fresh_article_server()
        subscriber = add_account(server, "reader", Role.EDITOR)
        server.notifier.set_subscription(subscriber.id, "hpc", True)
        unsubscribed = add_account(server, "quiet", Role.EDITOR)
        server.notifier.set_subscription(unsubscribed.id, "hpc", False)

        author = editor(server)
        review = server.submit_for_review("hpc", VALID_EDIT, author)
        sink = server.mail_sender
        requested = [m for m in sink.messages if "Review requested" in m[1]]
        assert sorted(m[0] for m in requested) == ["owner-1", "reader"]
        assert "quiet" not in [m[0] for m in sink.messages]

        server.pump_forge()
        server.forge.merge_pr("askci-term-hpc", review.pr.number)
        server.pump_forge()
        assert author.subscriptions.get("hpc") is True


def test_c11_role_matrix():
    with criterion(11, "role ladder matches the grid with superset monotonicity", 1.0):
        grid = {
            Role.VIEWER: {"browse", "search"},
            Role.EDITOR: {"browse", "search", "submit_for_review", "ask_question"},
            Role.OWNER: {
                "browse", "search", "submit_for_review", "ask_question", "register_term",
            },
            Role.ADMIN: {
                "browse", "search", "submit_for_review", "ask_question", "register_term",
                "trigger_template_update", "unarchive", "webhook_admin",
            },
        }
        all_actions = grid[Role.ADMIN]
        for role, expected in grid.items():
            account = UserAccount(id="u", forge_login="u", role=role)
            for action in sorted(all_actions):
                assert authorize(account, action) == (action in expected), (role, action)
        ladder = list(Role)
        for lower, higher in zip(ladder, ladder[1:]):
            assert allowed_actions(lower) < allowed_actions(higher)


def test_c12_import_export_round_trip():
    with criterion(12, "export then import reproduces the article", 1.0):
        server = fresh_article_server()
        server.forge.push_content("askci-term-hpc", VALID_EDIT)
        server.forge.set_topics("askci-term-hpc", ["hpc", "containers"])
        server.pump_forge()
        source = server.store.articles["hpc"]

        doc = server.registry.export_article("hpc")
        doc = json.loads(json.dumps(doc))  # through the wire format

        target = make_server()
        imported = target.registry.import_article(doc)
        assert imported.term == source.term
        assert imported.content == source.content  # byte-for-byte
        assert imported.tags == source.tags
        assert imported.parsed == source.parsed
        assert imported.owners == source.owners
        assert imported.status == "active"
