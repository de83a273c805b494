"""Subscriptions and outbound email through a pluggable mail sender.

Owners are notified for review requests, template updates, archive
events, and asked questions; contributors whose reviews are accepted are
auto-subscribed.  Delivery is exactly-once per (event, recipient) at the
sender boundary: sends are deduplicated by event id even across retries.
"""

from __future__ import annotations

import smtplib
import uuid
from dataclasses import dataclass, field
from email.message import EmailMessage
from urllib.parse import urlparse

from .errors import MailBackendUnavailable, UnknownAccount

EVENT_KINDS = (
    "review_requested",
    "template_update_opened",
    "repository_archived",
    "question_asked",
)

# Kinds delivered to owners only; the rest also reach subscribers.
_OWNERS_ONLY = {"question_asked"}

_SUBJECTS = {
    "review_requested": "Review requested for {term}",
    "template_update_opened": "Template update opened for {term}",
    "repository_archived": "Repository for {term} was archived",
    "question_asked": "New question asked on {term}",
}


@dataclass(frozen=True)
class NotificationEvent:
    event_id: str
    kind: str
    term: str
    subject: str
    body: str
    recipients: tuple[str, ...]


@dataclass(frozen=True)
class Subscription:
    account_id: str
    term: str
    active: bool


@dataclass(frozen=True)
class DeliveryRecord:
    event_id: str
    recipient: str
    delivered: bool
    error: str | None = None


class MailSender:
    def send(self, recipient: str, subject: str, body: str) -> None:
        raise NotImplementedError


class RecordingMailSink(MailSender):
    """Test sink: records messages, can simulate backend outages."""

    def __init__(self):
        self.messages: list[tuple[str, str, str]] = []
        self._failures = 0

    def fail_next(self, n: int) -> None:
        self._failures += n

    def send(self, recipient: str, subject: str, body: str) -> None:
        if self._failures > 0:
            self._failures -= 1
            raise MailBackendUnavailable("simulated mail outage")
        self.messages.append((recipient, subject, body))


class SmtpSender(MailSender):
    """Sends through an SMTP endpoint given as smtp://host:port."""

    def __init__(self, url: str, from_address: str):
        parsed = urlparse(url)
        self.host = parsed.hostname or "localhost"
        self.port = parsed.port or 25
        self.from_address = from_address

    def send(self, recipient: str, subject: str, body: str) -> None:
        msg = EmailMessage()
        msg["From"] = self.from_address
        msg["To"] = recipient
        msg["Subject"] = subject
        msg.set_content(body)
        try:
            with smtplib.SMTP(self.host, self.port, timeout=10) as smtp:
                smtp.send_message(msg)
        except (OSError, smtplib.SMTPException) as exc:
            raise MailBackendUnavailable(str(exc)) from exc


class Notifier:
    def __init__(self, store, sender: MailSender):
        self.store = store
        self.sender = sender

    # -- subscriptions ------------------------------------------------------

    def set_subscription(self, account_id: str, term: str, active: bool) -> Subscription:
        with self.store.lock:
            account = self.store.accounts.get(account_id)
            if account is None:
                raise UnknownAccount(account_id)
            account.subscriptions[term] = active
        return Subscription(account_id=account_id, term=term, active=active)

    def subscribe_contributor(self, account_id: str, term: str) -> None:
        """Accepted-review authors are subscribed to further updates."""
        if account_id in self.store.accounts:
            self.set_subscription(account_id, term, True)

    def _recipients(self, kind: str, term: str, owners: list[str]) -> tuple[str, ...]:
        with self.store.lock:
            recipients = []
            for account_id, account in self.store.accounts.items():
                opted_out = account.subscriptions.get(term) is False
                if opted_out:
                    continue
                is_owner = account_id in owners
                is_subscriber = account.subscriptions.get(term) is True
                if is_owner or (is_subscriber and kind not in _OWNERS_ONLY):
                    recipients.append(account_id)
            return tuple(sorted(recipients))

    # -- delivery -----------------------------------------------------------

    def build_event(self, kind: str, term: str, owners: list[str], body: str = "") -> NotificationEvent:
        if kind not in EVENT_KINDS:
            raise ValueError(f"unknown notification kind {kind!r}")
        return NotificationEvent(
            event_id=uuid.uuid4().hex,
            kind=kind,
            term=term,
            subject=_SUBJECTS[kind].format(term=term),
            body=body or _SUBJECTS[kind].format(term=term),
            recipients=self._recipients(kind, term, owners),
        )

    def notify(self, event: NotificationEvent) -> list[DeliveryRecord]:
        """Deliver one event; safe to call again after partial failure."""
        records = []
        failed = False
        for recipient in event.recipients:
            key = (event.event_id, recipient)
            with self.store.lock:
                if key in self.store.notifications_sent:
                    continue
            try:
                self.sender.send(recipient, event.subject, event.body)
            except MailBackendUnavailable as exc:
                failed = True
                records.append(
                    DeliveryRecord(event.event_id, recipient, delivered=False, error=str(exc))
                )
                continue
            with self.store.lock:
                self.store.notifications_sent.add(key)
            records.append(DeliveryRecord(event.event_id, recipient, delivered=True))
        if failed:
            with self.store.lock:
                if event not in self.store.pending_notifications:
                    self.store.pending_notifications.append(event)
        else:
            with self.store.lock:
                if event in self.store.pending_notifications:
                    self.store.pending_notifications.remove(event)
        return records

    def emit(self, kind: str, term: str, owners: list[str], body: str = "") -> NotificationEvent:
        event = self.build_event(kind, term, owners, body)
        self.notify(event)
        return event

    def retry_pending(self) -> list[DeliveryRecord]:
        with self.store.lock:
            pending = list(self.store.pending_notifications)
        records = []
        for event in pending:
            records.extend(self.notify(event))
        return records
