"""Forge protocol: repo creation, webhooks, dispatches, issues, content.

Two implementations of the same client interface live here: an HTTPS
client for a real forge and an in-memory simulator that mirrors the
forge-side automation (dispatch handling, pull requests, webhook
emission) closely enough to test the whole review loop offline.
"""

from __future__ import annotations

import hashlib
import hmac
import json
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Callable

import httpx

from .errors import (
    ForgePermissionDenied,
    ForgeUnavailable,
    NotFound,
    OAuthDenied,
    TermAlreadyExists,
)
from .spans import is_valid_slug

WEBHOOK_EVENTS = ("push", "pull_request", "repository")
DISPATCH_EVENT_TYPES = ("request-review", "update-template")

SIGNATURE_HEADER = "X-Hub-Signature-256"
EVENT_HEADER = "X-GitHub-Event"
DELIVERY_HEADER = "X-GitHub-Delivery"


@dataclass(frozen=True)
class RepoRef:
    owner: str
    name: str
    default_branch: str = "main"

    @property
    def full_name(self) -> str:
        return f"{self.owner}/{self.name}"


def article_repo_name(term: str, prefix: str = "askci-term-") -> str:
    return prefix + term


def term_from_repo_name(name: str, prefix: str = "askci-term-") -> str | None:
    """The term a repo name encodes, or None when outside the namespace."""
    if not name.startswith(prefix):
        return None
    term = name[len(prefix):]
    return term if is_valid_slug(term) else None


@dataclass(frozen=True)
class WebhookDelivery:
    delivery_id: str
    event_kind: str  # push | pull_request | repository
    signature_header: str
    raw_body: bytes
    received_at: datetime

    def payload(self) -> dict:
        return json.loads(self.raw_body.decode("utf-8"))


@dataclass(frozen=True)
class DispatchEvent:
    event_type: str
    client_payload: dict
    target: RepoRef

    def __post_init__(self):
        if self.event_type not in DISPATCH_EVENT_TYPES:
            raise ValueError(f"unknown dispatch event type {self.event_type!r}")


@dataclass(frozen=True)
class IssueDraft:
    target: RepoRef
    title: str
    body: str
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.title:
            raise ValueError("issue title must be non-empty")


@dataclass(frozen=True)
class PullRequestInfo:
    target: RepoRef
    number: int
    url: str
    action: str  # opened | closed | reopened | synchronized
    branch: str
    merged_at: datetime | None = None
    body: str = ""


def sign_body(secret: str, body: bytes) -> str:
    digest = hmac.new(secret.encode("utf-8"), body, hashlib.sha256).hexdigest()
    return f"sha256={digest}"


def verify_signature(delivery: WebhookDelivery, secret: str) -> bool:
    """Constant-time check of the sha256= HMAC header against the raw body."""
    header = delivery.signature_header or ""
    if not header.startswith("sha256="):
        return False
    expected = sign_body(secret, delivery.raw_body)
    return hmac.compare_digest(expected, header)


def pull_request_info_from_payload(payload: dict) -> PullRequestInfo:
    pr = payload["pull_request"]
    repo = payload["repository"]
    merged_at = pr.get("merged_at")
    return PullRequestInfo(
        target=RepoRef(
            owner=repo["owner"]["login"],
            name=repo["name"],
            default_branch=repo.get("default_branch", "main"),
        ),
        number=pr["number"],
        url=pr.get("html_url", ""),
        action=payload["action"],
        branch=pr.get("head", {}).get("ref", ""),
        merged_at=datetime.fromisoformat(merged_at) if merged_at else None,
        body=pr.get("body") or "",
    )


class ForgeClient(ABC):
    """Everything the server needs from the remote forge."""

    @abstractmethod
    def create_repo_from_template(self, term: str, owner: str, secret: str) -> RepoRef:
        """Copy the term template to a new namespaced repo and register the webhook."""

    @abstractmethod
    def send_dispatch(self, event: DispatchEvent) -> None: ...

    @abstractmethod
    def open_issue(self, draft: IssueDraft) -> int: ...

    @abstractmethod
    def fetch_article_file(self, repo: RepoRef) -> str: ...

    @abstractmethod
    def fetch_topics(self, repo: RepoRef) -> list[str]: ...

    @abstractmethod
    def rotate_webhook_secret(self, repo: RepoRef, secret: str) -> None: ...

    @abstractmethod
    def exchange_oauth_code(self, code: str) -> dict:
        """Resolve an authorization code to {'login': ..., 'scopes': [...]}."""


# --------------------------------------------------------------------------
# In-memory simulator


@dataclass
class SimWebhook:
    url: str
    secret: str
    events: tuple[str, ...]


@dataclass
class SimIssue:
    number: int
    title: str
    body: str
    labels: tuple[str, ...]


@dataclass
class SimPullRequest:
    number: int
    branch: str
    title: str
    body: str
    url: str
    files: dict[str, str]
    state: str = "open"
    merged_at: datetime | None = None


@dataclass
class SimRepo:
    owner: str
    name: str
    default_branch: str = "main"
    files: dict[str, str] = field(default_factory=dict)
    topics: list[str] = field(default_factory=list)
    hooks: list[SimWebhook] = field(default_factory=list)
    issues: list[SimIssue] = field(default_factory=list)
    prs: dict[int, SimPullRequest] = field(default_factory=dict)
    archived: bool = False
    next_issue: int = 1
    next_pr: int = 1

    @property
    def ref(self) -> RepoRef:
        return RepoRef(owner=self.owner, name=self.name, default_branch=self.default_branch)


@dataclass(frozen=True)
class OutboxItem:
    url: str
    repo_name: str
    delivery: WebhookDelivery


_TEMPLATE = "# {title}\n\nWrite about {term} here.\n"


class ForgeSimulator(ForgeClient):
    """In-memory forge with the template repo's automation baked in.

    Mutations are answered the way the real repository workflows would
    respond: a "request-review" dispatch opens a branch and pull request,
    merges write back to the default branch, and every server-relevant
    change emits exactly one signed webhook delivery into the outbox.
    """

    def __init__(
        self,
        content_file: str = "README.md",
        namespace_prefix: str = "askci-term-",
        clock: Callable[[], datetime] | None = None,
    ):
        self.content_file = content_file
        self.namespace_prefix = namespace_prefix
        self.repos: dict[str, SimRepo] = {}
        self.outbox: list[OutboxItem] = []
        self.dispatches: list[DispatchEvent] = []
        self._clock = clock or (lambda: datetime.now(timezone.utc))
        self._delivery_seq = 0
        self._oauth_codes: dict[str, dict] = {}
        self._fetch_failures = 0

    # -- client interface ---------------------------------------------------

    def create_repo_from_template(self, term: str, owner: str, secret: str) -> RepoRef:
        name = article_repo_name(term, self.namespace_prefix)
        if name in self.repos:
            raise TermAlreadyExists(term)
        repo = SimRepo(owner=owner, name=name)
        repo.files[self.content_file] = _TEMPLATE.format(
            title=term.replace("-", " ").title(), term=term
        )
        repo.hooks.append(
            SimWebhook(url=f"/hooks/forge/{term}", secret=secret, events=WEBHOOK_EVENTS)
        )
        self.repos[name] = repo
        return repo.ref

    def send_dispatch(self, event: DispatchEvent) -> None:
        repo = self._writable(event.target.name)
        self.dispatches.append(event)
        if event.event_type == "request-review":
            payload = event.client_payload
            review_id = str(payload.get("review_id", f"r{repo.next_pr}"))
            self._open_pr(
                repo,
                branch=f"review-{review_id}",
                title=f"Review from {payload.get('author', 'anonymous')}",
                body=f"review-id: {review_id}",
                files={self.content_file: payload["content"]},
            )
        else:  # update-template
            self._open_pr(
                repo,
                branch=f"update-template-{repo.next_pr}",
                title="Update term template",
                body="Automated template update.",
                files=dict(repo.files),
            )

    def open_issue(self, draft: IssueDraft) -> int:
        repo = self._writable(draft.target.name)
        issue = SimIssue(
            number=repo.next_issue, title=draft.title, body=draft.body, labels=draft.labels
        )
        repo.next_issue += 1
        repo.issues.append(issue)
        return issue.number

    def fetch_article_file(self, repo: RepoRef) -> str:
        self._maybe_fail()
        sim = self.repos.get(repo.name)
        if sim is None or self.content_file not in sim.files:
            raise NotFound(f"{repo.name}/{self.content_file}")
        return sim.files[self.content_file]

    def fetch_topics(self, repo: RepoRef) -> list[str]:
        self._maybe_fail()
        sim = self.repos.get(repo.name)
        if sim is None:
            raise NotFound(repo.name)
        return sorted({t.lower() for t in sim.topics})

    def rotate_webhook_secret(self, repo: RepoRef, secret: str) -> None:
        sim = self._writable(repo.name)
        for hook in sim.hooks:
            hook.secret = secret

    def exchange_oauth_code(self, code: str) -> dict:
        if code not in self._oauth_codes:
            raise OAuthDenied(code)
        return self._oauth_codes.pop(code)

    # -- forge-side controls (what a human or workflow does on the forge) ---

    def grant_oauth(self, code: str, login: str, scopes: list[str]) -> None:
        self._oauth_codes[code] = {"login": login, "scopes": list(scopes)}

    def fail_fetches(self, n: int) -> None:
        """Make the next n content/topic fetches raise ForgeUnavailable."""
        self._fetch_failures += n

    def push_content(self, name: str, content: str, branch: str | None = None) -> None:
        repo = self._repo(name)
        target = branch or repo.default_branch
        if target == repo.default_branch:
            repo.files[self.content_file] = content
        self._emit(repo, "push", {"ref": f"refs/heads/{target}", "repository": self._repo_json(repo)})

    def delete_content_file(self, name: str) -> None:
        self._repo(name).files.pop(self.content_file, None)

    def set_topics(self, name: str, topics: list[str]) -> None:
        repo = self._repo(name)
        repo.topics = list(topics)
        self._emit(
            repo,
            "repository",
            {"action": "edited", "changes": {"topics": {}}, "repository": self._repo_json(repo)},
        )

    def rename_repo(self, old: str, new: str) -> None:
        repo = self._repo(old)
        self.repos.pop(old)
        repo.name = new
        self.repos[new] = repo
        self._emit(
            repo,
            "repository",
            {
                "action": "renamed",
                "changes": {"repository": {"name": {"from": old}}},
                "repository": self._repo_json(repo),
            },
        )

    def merge_pr(self, name: str, number: int, merged_at: datetime | None = None) -> None:
        repo = self._repo(name)
        pr = repo.prs[number]
        pr.state = "closed"
        pr.merged_at = merged_at or self._clock()
        repo.files.update(pr.files)
        self._emit_pr(repo, pr, action="closed")
        self._emit(
            repo,
            "push",
            {"ref": f"refs/heads/{repo.default_branch}", "repository": self._repo_json(repo)},
        )

    def close_pr(self, name: str, number: int) -> None:
        repo = self._repo(name)
        pr = repo.prs[number]
        pr.state = "closed"
        self._emit_pr(repo, pr, action="closed")

    def open_external_pr(self, name: str, branch: str, content: str) -> int:
        """A pull request opened directly on the forge, outside any dispatch."""
        repo = self._repo(name)
        pr = self._open_pr(
            repo,
            branch=branch,
            title="External change",
            body="",
            files={self.content_file: content},
        )
        return pr.number

    def take_deliveries(self) -> list[OutboxItem]:
        items, self.outbox = self.outbox, []
        return items

    # -- internals ----------------------------------------------------------

    def _repo(self, name: str) -> SimRepo:
        if name not in self.repos:
            raise NotFound(name)
        return self.repos[name]

    def _writable(self, name: str) -> SimRepo:
        repo = self.repos.get(name)
        if repo is None or repo.archived:
            raise ForgePermissionDenied(name)
        return repo

    def _maybe_fail(self) -> None:
        if self._fetch_failures > 0:
            self._fetch_failures -= 1
            raise ForgeUnavailable("simulated outage")

    def _repo_json(self, repo: SimRepo) -> dict:
        return {
            "name": repo.name,
            "owner": {"login": repo.owner},
            "default_branch": repo.default_branch,
            "topics": sorted({t.lower() for t in repo.topics}),
            "archived": repo.archived,
        }

    def _open_pr(self, repo: SimRepo, branch, title, body, files) -> SimPullRequest:
        pr = SimPullRequest(
            number=repo.next_pr,
            branch=branch,
            title=title,
            body=body,
            url=f"https://forge.example/{repo.owner}/{repo.name}/pull/{repo.next_pr}",
            files=files,
        )
        repo.next_pr += 1
        repo.prs[pr.number] = pr
        self._emit_pr(repo, pr, action="opened")
        return pr

    def _emit_pr(self, repo: SimRepo, pr: SimPullRequest, action: str) -> None:
        self._emit(
            repo,
            "pull_request",
            {
                "action": action,
                "number": pr.number,
                "pull_request": {
                    "number": pr.number,
                    "html_url": pr.url,
                    "merged_at": pr.merged_at.isoformat() if pr.merged_at else None,
                    "head": {"ref": pr.branch},
                    "body": pr.body,
                    "state": pr.state,
                },
                "repository": self._repo_json(repo),
            },
        )

    def _emit(self, repo: SimRepo, event_kind: str, payload: dict) -> None:
        body = json.dumps(payload, sort_keys=True).encode("utf-8")
        for hook in repo.hooks:
            if event_kind not in hook.events:
                continue
            self._delivery_seq += 1
            delivery = WebhookDelivery(
                delivery_id=f"sim-delivery-{self._delivery_seq}",
                event_kind=event_kind,
                signature_header=sign_body(hook.secret, body),
                raw_body=body,
                received_at=self._clock(),
            )
            self.outbox.append(OutboxItem(url=hook.url, repo_name=repo.name, delivery=delivery))


# --------------------------------------------------------------------------
# HTTPS client for a real forge


class HttpForgeClient(ForgeClient):
    """Thin client for a GitHub-compatible REST API."""

    def __init__(
        self,
        api_base: str,
        token: str,
        webhook_base_url: str,
        template_repo: str,
        content_file: str = "README.md",
        namespace_prefix: str = "askci-term-",
        oauth_token_url: str = "",
        oauth_client_id: str = "",
        oauth_client_secret: str = "",
        client: httpx.Client | None = None,
    ):
        self.api_base = api_base.rstrip("/")
        self.webhook_base_url = webhook_base_url.rstrip("/")
        self.template_repo = template_repo
        self.content_file = content_file
        self.namespace_prefix = namespace_prefix
        self.oauth_token_url = oauth_token_url
        self.oauth_client_id = oauth_client_id
        self.oauth_client_secret = oauth_client_secret
        self._http = client or httpx.Client(
            headers={
                "Authorization": f"Bearer {token}",
                "Accept": "application/vnd.github+json",
            },
            timeout=30.0,
        )

    def _request(self, method: str, path: str, **kwargs) -> httpx.Response:
        try:
            resp = self._http.request(method, self.api_base + path, **kwargs)
        except httpx.HTTPError as exc:
            raise ForgeUnavailable(str(exc)) from exc
        if resp.status_code in (401, 403):
            raise ForgePermissionDenied(path)
        if resp.status_code == 404:
            raise NotFound(path)
        if resp.status_code >= 500:
            raise ForgeUnavailable(f"{resp.status_code} from {path}")
        return resp

    def create_repo_from_template(self, term: str, owner: str, secret: str) -> RepoRef:
        name = article_repo_name(term, self.namespace_prefix)
        resp = self._request(
            "POST",
            f"/repos/{self.template_repo}/generate",
            json={"owner": owner, "name": name},
        )
        if resp.status_code == 422:
            raise TermAlreadyExists(term)
        default_branch = resp.json().get("default_branch", "main")
        self._request(
            "POST",
            f"/repos/{owner}/{name}/hooks",
            json={
                "config": {
                    "url": f"{self.webhook_base_url}/hooks/forge/{term}",
                    "secret": secret,
                    "content_type": "json",
                },
                "events": list(WEBHOOK_EVENTS),
                "active": True,
            },
        )
        return RepoRef(owner=owner, name=name, default_branch=default_branch)

    def send_dispatch(self, event: DispatchEvent) -> None:
        self._request(
            "POST",
            f"/repos/{event.target.full_name}/dispatches",
            json={"event_type": event.event_type, "client_payload": event.client_payload},
        )

    def open_issue(self, draft: IssueDraft) -> int:
        resp = self._request(
            "POST",
            f"/repos/{draft.target.full_name}/issues",
            json={"title": draft.title, "body": draft.body, "labels": list(draft.labels)},
        )
        return resp.json()["number"]

    def fetch_article_file(self, repo: RepoRef) -> str:
        resp = self._request(
            "GET",
            f"/repos/{repo.full_name}/contents/{self.content_file}",
            params={"ref": repo.default_branch},
            headers={"Accept": "application/vnd.github.raw+json"},
        )
        return resp.text

    def fetch_topics(self, repo: RepoRef) -> list[str]:
        resp = self._request("GET", f"/repos/{repo.full_name}/topics")
        return sorted({t.lower() for t in resp.json().get("names", [])})

    def rotate_webhook_secret(self, repo: RepoRef, secret: str) -> None:
        hooks = self._request("GET", f"/repos/{repo.full_name}/hooks").json()
        for hook in hooks:
            self._request(
                "PATCH",
                f"/repos/{repo.full_name}/hooks/{hook['id']}",
                json={"config": {**hook.get("config", {}), "secret": secret}},
            )

    def exchange_oauth_code(self, code: str) -> dict:
        try:
            resp = self._http.post(
                self.oauth_token_url,
                data={
                    "client_id": self.oauth_client_id,
                    "client_secret": self.oauth_client_secret,
                    "code": code,
                },
                headers={"Accept": "application/json"},
            )
        except httpx.HTTPError as exc:
            raise ForgeUnavailable(str(exc)) from exc
        data = resp.json()
        if resp.status_code != 200 or "access_token" not in data:
            raise OAuthDenied(code)
        user = self._request(
            "GET", "/user", headers={"Authorization": f"Bearer {data['access_token']}"}
        ).json()
        scopes = [s.strip() for s in data.get("scope", "").split(",") if s.strip()]
        return {"login": user["login"], "scopes": scopes}
