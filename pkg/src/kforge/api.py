"""HTTP surface: browsing, search, questions, reviews, and webhook intake.

All endpoints live under /api/v1 except the webhook receivers at
/hooks/*.  Authentication is a bearer api token; unauthenticated
requests act as the synthetic viewer account.  Errors are JSON
{code, message}.
"""

from __future__ import annotations

from datetime import datetime, timezone

from fastapi import FastAPI, Header, Request
from fastapi.responses import JSONResponse

from .accounts import ANONYMOUS, Role
from .app import Server
from .errors import (
    ArchivedArticle,
    EmptyQuestion,
    Forbidden,
    ForgePermissionDenied,
    ForgeUnavailable,
    InvalidSlug,
    KforgeError,
    NotFound,
    OAuthDenied,
    StillBroken,
    TermAlreadyExists,
    UnknownTerm,
    ValidationFailed,
)
from .forge import DELIVERY_HEADER, EVENT_HEADER, SIGNATURE_HEADER, WebhookDelivery
from .spans import validate_article

_STATUS = {
    UnknownTerm: 404,
    NotFound: 404,
    TermAlreadyExists: 409,
    ArchivedArticle: 409,
    EmptyQuestion: 422,
    InvalidSlug: 422,
    ValidationFailed: 422,
    OAuthDenied: 401,
    ForgeUnavailable: 503,
    ForgePermissionDenied: 502,
    StillBroken: 409,
}


def _error_response(exc: KforgeError, status: int) -> JSONResponse:
    body = {"code": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, ValidationFailed):
        body["errors"] = [
            {"code": e.code.value, "line": e.line, "detail": e.detail}
            for e in exc.report.errors
        ]
    if isinstance(exc, StillBroken):
        body["cause"] = exc.cause
    return JSONResponse(status_code=status, content=body)


def _article_json(article, full: bool = False) -> dict:
    data = {
        "term": article.term,
        "repo": article.repo.full_name,
        "status": article.status,
        "tags": sorted(article.tags),
        "owners": list(article.owners),
        "updated_at": article.updated_at.isoformat(),
        "questions": [
            {
                "slug": q.slug,
                "display_text": q.display_text,
                "anchor": q.anchor,
                "line": q.location.line,
                "byte_offset": q.location.byte_offset,
            }
            for q in article.parsed.questions
        ],
        "examples": [
            {
                "slug": e.slug,
                "anchor": e.anchor,
                "language": e.code_language,
                "line": e.location.line,
            }
            for e in article.parsed.examples
        ],
    }
    if full:
        data["content"] = article.content
        data["validation"] = {
            "ok": article.validation.ok,
            "errors": [
                {"code": e.code.value, "line": e.line, "detail": e.detail}
                for e in article.validation.errors
            ],
        }
    return data


def _review_json(review) -> dict:
    return {
        "id": review.id,
        "term": review.term,
        "author": review.author,
        "status": review.status,
        "cause": review.cause,
        "pr_url": review.pr.url if review.pr else None,
        "pr_number": review.pr.number if review.pr else None,
        "created_at": review.created_at.isoformat(),
        "updated_at": review.updated_at.isoformat(),
    }


def build_app(server: Server) -> FastAPI:
    app = FastAPI(title=server.config.site_name)
    app.state.server = server

    @app.exception_handler(KforgeError)
    async def handle_domain_error(request: Request, exc: KforgeError):
        if isinstance(exc, Forbidden):
            actor = getattr(request.state, "actor", ANONYMOUS)
            return _error_response(exc, 401 if actor.role == Role.VIEWER else 403)
        return _error_response(exc, _STATUS.get(type(exc), 500))

    def actor_from(request: Request, authorization: str | None):
        token = None
        if authorization and authorization.startswith("Bearer "):
            token = authorization.removeprefix("Bearer ")
        actor = server.accounts.by_token(token)
        request.state.actor = actor
        return actor

    @app.get("/health")
    async def health():
        return {"status": "ok", "site": server.config.site_name}

    @app.get("/api/v1/site")
    async def site():
        return {
            "site_name": server.config.site_name,
            "tagline": server.config.tagline,
            "base_url": server.config.base_url,
        }

    @app.post("/api/v1/auth/token")
    async def exchange_token(body: dict):
        account = server.accounts.authenticate(body.get("code", ""))
        return {
            "account_id": account.id,
            "role": str(account.role),
            "api_token": account.api_token,
        }

    @app.get("/api/v1/articles")
    async def list_articles():
        with server.store.lock:
            articles = sorted(server.store.articles.values(), key=lambda a: a.term)
        return {"articles": [_article_json(a) for a in articles]}

    @app.get("/api/v1/articles/{term}")
    async def get_article(term: str):
        return _article_json(server.registry.get(term), full=True)

    @app.post("/api/v1/articles")
    async def register_article(
        body: dict, request: Request, authorization: str | None = Header(default=None)
    ):
        actor = actor_from(request, authorization)
        article = server.registry.register_term(body.get("term", ""), actor)
        return JSONResponse(status_code=201, content=_article_json(article))

    @app.get("/api/v1/search")
    async def search_endpoint(q: str = ""):
        return {"results": [r.to_dict() for r in server.search(q)]}

    @app.get("/api/v1/questions")
    async def questions_endpoint(q: str = ""):
        return {"results": [r.to_dict() for r in server.search(q, kinds=("question",))]}

    @app.get("/api/v1/reviews")
    async def list_reviews(term: str | None = None):
        with server.store.lock:
            reviews = [
                r
                for r in server.store.reviews.values()
                if term is None or r.term == term
            ]
        reviews.sort(key=lambda r: r.created_at, reverse=True)
        return {"reviews": [_review_json(r) for r in reviews]}

    @app.post("/api/v1/validate")
    async def validate_endpoint(body: dict):
        report = validate_article(body.get("content", ""))
        return {
            "ok": report.ok,
            "errors": [
                {"code": e.code.value, "line": e.line, "detail": e.detail}
                for e in report.errors
            ],
        }

    @app.post("/api/v1/articles/{term}/questions")
    async def ask_question(
        term: str, body: dict, request: Request, authorization: str | None = Header(default=None)
    ):
        actor = actor_from(request, authorization)
        asked = server.ask_question(term, body.get("text", ""), actor)
        return {
            "term": asked.term,
            "slug": asked.slug,
            "anchor": asked.anchor,
            "existing": asked.existing,
            "issue_number": asked.issue_number,
        }

    @app.post("/api/v1/articles/{term}/review")
    async def submit_review(
        term: str, body: dict, request: Request, authorization: str | None = Header(default=None)
    ):
        actor = actor_from(request, authorization)
        review = server.submit_for_review(term, body.get("content", ""), actor)
        return JSONResponse(status_code=201, content=_review_json(review))

    @app.post("/api/v1/admin/template-update")
    async def template_update(
        body: dict, request: Request, authorization: str | None = Header(default=None)
    ):
        actor = actor_from(request, authorization)
        count = server.reviews.trigger_template_update(body.get("terms"), actor)
        return {"dispatched": count}

    @app.post("/api/v1/admin/unarchive/{term}")
    async def unarchive(
        term: str, request: Request, authorization: str | None = Header(default=None)
    ):
        actor = actor_from(request, authorization)
        article = server.registry.unarchive(term, actor)
        return _article_json(article)

    @app.post("/hooks/forge/{term}")
    async def forge_hook(term: str, request: Request):
        raw = await request.body()
        delivery = WebhookDelivery(
            delivery_id=request.headers.get(DELIVERY_HEADER, ""),
            event_kind=request.headers.get(EVENT_HEADER, ""),
            signature_header=request.headers.get(SIGNATURE_HEADER, ""),
            raw_body=raw,
            received_at=datetime.now(timezone.utc),
        )
        status = server.receive_webhook(term, delivery)
        return JSONResponse(status_code=status, content={"status": status})

    @app.post("/hooks/discourse")
    async def discourse_hook(request: Request):
        raw = await request.body()
        status = server.receive_discourse(
            raw, request.headers.get("X-Discourse-Event-Signature", "")
        )
        return JSONResponse(status_code=status, content={"status": status})

    return app
