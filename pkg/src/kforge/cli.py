"""Operator command line: serve, import/export, template updates, secrets."""

from __future__ import annotations

import json
import sys

import click

from .accounts import Role, UserAccount
from .api import build_app
from .app import Server
from .config import load_config
from .errors import (
    ConfigInvalid,
    ForgePermissionDenied,
    ForgeUnavailable,
    KforgeError,
    NotFound,
    StoreUnreachable,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_REMOTE = 4

# CLI commands run with operator (admin) authority by construction: the
# operator already holds the credentials the config references.
CLI_ADMIN = UserAccount(id="cli-admin", forge_login="cli-admin", role=Role.ADMIN)


def _get_server(ctx: click.Context) -> Server:
    if ctx.obj and "server" in ctx.obj:
        return ctx.obj["server"]
    try:
        config = load_config(
            path=ctx.obj.get("config_path") if ctx.obj else None,
            overrides=ctx.obj.get("overrides") if ctx.obj else None,
        )
        server = Server(config)
    except ConfigInvalid as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    except OSError as exc:
        click.echo(f"error: store unreachable: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    ctx.ensure_object(dict)
    ctx.obj["server"] = server
    return server


def _report(data: dict, fmt: str) -> None:
    if fmt == "json":
        click.echo(json.dumps(data, indent=2, sort_keys=True))
    else:
        for key, value in data.items():
            click.echo(f"{key}: {value}")


def _run(ctx: click.Context, fn, fmt: str):
    try:
        data = fn()
    except (ForgeUnavailable, ForgePermissionDenied) as exc:
        click.echo(f"error: forge: {exc}", err=True)
        sys.exit(EXIT_REMOTE)
    except StoreUnreachable as exc:
        click.echo(f"error: store: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    except KforgeError as exc:
        click.echo(f"error: {type(exc).__name__}: {exc}", err=True)
        sys.exit(1)
    _report(data, fmt)


@click.group()
@click.option("--config", "config_path", type=click.Path(), default=None, help="TOML or JSON config file.")
@click.option("--site-name", default=None, help="Override the configured site name.")
@click.option("--store", "store_path", default=None, help="Override the store snapshot path.")
@click.pass_context
def main(ctx, config_path, site_name, store_path):
    """Administer a knowledge-forge server."""
    ctx.ensure_object(dict)
    ctx.obj.setdefault("config_path", config_path)
    ctx.obj.setdefault(
        "overrides", {"site_name": site_name, "store_path": store_path}
    )


@main.command()
@click.option("--host", default=None)
@click.option("--port", type=int, default=None)
@click.pass_context
def serve(ctx, host, port):
    """Run the HTTP server and background workers."""
    import uvicorn

    server = _get_server(ctx)
    app = build_app(server)
    uvicorn.run(
        app,
        host=host or server.config.host,
        port=port or server.config.port,
    )


@main.command()
@click.argument("term")
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="json")
@click.pass_context
def export(ctx, term, fmt):
    """Write a self-contained article document to stdout."""
    server = _get_server(ctx)

    def do():
        return server.registry.export_article(term)

    _run(ctx, do, fmt)


@main.command(name="import")
@click.argument("file", type=click.File("r"))
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text")
@click.pass_context
def import_cmd(ctx, file, fmt):
    """Import an exported article document."""
    server = _get_server(ctx)

    def do():
        try:
            doc = json.load(file)
        except json.JSONDecodeError as exc:
            from .errors import MalformedArchive

            raise MalformedArchive(f"not valid JSON: {exc}") from exc
        article = server.registry.import_article(doc)
        server.save()
        return {"term": article.term, "status": article.status}

    _run(ctx, do, fmt)


@main.command(name="update-templates")
@click.option("--terms", default=None, help="Comma-separated subset; default is all active articles.")
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text")
@click.pass_context
def update_templates(ctx, terms, fmt):
    """Send an update-template dispatch to article repositories."""
    server = _get_server(ctx)
    subset = [t.strip() for t in terms.split(",")] if terms else None

    def do():
        count = server.reviews.trigger_template_update(subset, CLI_ADMIN)
        return {"dispatched": count}

    _run(ctx, do, fmt)


@main.command(name="rotate-secret")
@click.argument("term")
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text")
@click.pass_context
def rotate_secret(ctx, term, fmt):
    """Issue a fresh webhook shared secret for one article."""
    server = _get_server(ctx)

    def do():
        secret = server.registry.rotate_webhook_secret(term, CLI_ADMIN)
        server.save()
        return {"term": term, "rotated": True, "secret": secret}

    _run(ctx, do, fmt)


if __name__ == "__main__":
    main()
