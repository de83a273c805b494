"""Tests for the operator CLI."""

import json

import pytest
from click.testing import CliRunner

from kforge.cli import main
from kforge.store import Store

from helpers import make_server, owner

VALID_EDIT = (
    "# HPC\n\n"
    '<span id="question-how-did-hpc-originate"></span>\n'
    "It began with early supercomputers.\n"
)


@pytest.fixture
def server():
    s = make_server()
    s.registry.register_term("hpc", owner(s))
    s.pump_forge()
    s.forge.push_content("askci-term-hpc", VALID_EDIT)
    s.pump_forge()
    return s


def invoke(server, args, **kwargs):
    return CliRunner().invoke(main, args, obj={"server": server}, **kwargs)


class TestExportImport:
    def test_round_trip(self, server, tmp_path):
        result = invoke(server, ["export", "hpc"])
        assert result.exit_code == 0
        doc = json.loads(result.output)
        assert doc["term"] == "hpc"
        path = tmp_path / "hpc.article"
        path.write_text(result.output)

        target = make_server()
        result = invoke(target, ["import", str(path)])
        assert result.exit_code == 0
        imported = target.store.articles["hpc"]
        original = server.store.articles["hpc"]
        assert imported.content == original.content
        assert imported.parsed == original.parsed
        assert imported.tags == original.tags

    def test_export_unknown_term(self, server):
        result = invoke(server, ["export", "ghost"])
        assert result.exit_code == 1
        assert "UnknownTerm" in result.output

    def test_import_corrupt_file(self, server, tmp_path):
        path = tmp_path / "broken.article"
        path.write_text("{ not json")
        result = invoke(server, ["import", str(path)])
        assert result.exit_code == 1
        assert "MalformedArchive" in result.output

    def test_import_json_report(self, server, tmp_path):
        doc = server.registry.export_article("hpc")
        path = tmp_path / "hpc.article"
        path.write_text(json.dumps(doc))
        target = make_server()
        result = invoke(target, ["import", str(path), "--format", "json"])
        assert json.loads(result.output) == {"term": "hpc", "status": "active"}


class TestUpdateTemplates:
    def test_subset(self, server):
        result = invoke(server, ["update-templates", "--terms", "hpc", "--format", "json"])
        assert result.exit_code == 0
        assert json.loads(result.output) == {"dispatched": 1}
        (dispatch,) = server.forge.dispatches
        assert dispatch.event_type == "update-template"
        assert dispatch.target.name == "askci-term-hpc"

    def test_all_active(self, server):
        server.registry.register_term("mpi", server.store.accounts["owner-1"])
        result = invoke(server, ["update-templates", "--format", "json"])
        assert json.loads(result.output) == {"dispatched": 2}


class TestRotateSecret:
    def test_rotates_article_and_forge(self, server):
        old = server.store.articles["hpc"].webhook_secret
        result = invoke(server, ["rotate-secret", "hpc"])
        assert result.exit_code == 0
        new = server.store.articles["hpc"].webhook_secret
        assert new != old
        assert server.forge.repos["askci-term-hpc"].hooks[0].secret == new


class TestExitCodes:
    def test_usage_error_is_2(self):
        result = CliRunner().invoke(main, ["export"], obj={})
        assert result.exit_code == 2

    def test_bad_config_is_3(self):
        result = CliRunner().invoke(
            main, ["--config", "/does/not/exist.toml", "update-templates"], obj={}
        )
        assert result.exit_code == 3


class TestStoreSnapshot:
    def test_save_and_load(self, server, tmp_path):
        path = tmp_path / "store.json"
        server.store.save(path)
        loaded = Store.load(path)
        article = loaded.articles["hpc"]
        assert article.content == server.store.articles["hpc"].content
        # index is rebuilt from content on load, never stored stale
        assert article.parsed == server.store.articles["hpc"].parsed
        assert loaded.seen_deliveries == server.store.seen_deliveries
