"""Tests for search ranking and the recent feed."""

import pytest

from helpers import make_server, owner

HPC_DOC = (
    "# HPC\n\n"
    '<span id="question-how-did-hpc-originate"></span>\n'
    "High performance computing began with early supercomputers.\n"
    '<span id="example-submit-a-job"></span>\n'
    "```bash\nsbatch job.sh\n```\n"
)


@pytest.fixture
def server():
    s = make_server()
    actor = owner(s)
    s.registry.register_term("hpc", actor)
    s.registry.register_term("singularity", actor)
    s.pump_forge()
    s.forge.push_content("askci-term-hpc", HPC_DOC)
    s.forge.set_topics("askci-term-hpc", ["containers"])
    s.pump_forge()
    return s


class TestSearch:
    def test_question_found_with_anchor(self, server):
        results = server.search("hpc originate")
        questions = [r for r in results if r.kind == "question"]
        assert questions[0].slug == "how-did-hpc-originate"
        assert questions[0].anchor == "question-how-did-hpc-originate"

    def test_anchor_dereferences_to_current_index(self, server):
        for r in server.search("hpc"):
            if r.kind == "question":
                article = server.store.articles[r.term]
                assert r.anchor in {q.anchor for q in article.parsed.questions}

    def test_term_match_outranks_content_match(self, server):
        server.forge.push_content(
            "askci-term-singularity", "# Singularity\n\nRuns on hpc clusters.\n"
        )
        server.pump_forge()
        results = [r for r in server.search("hpc") if r.kind == "article"]
        assert results[0].term == "hpc"
        assert results[0].score > results[1].score

    def test_tag_match(self, server):
        results = [r for r in server.search("containers") if r.kind == "article"]
        assert results and results[0].term == "hpc"

    def test_example_slug_match(self, server):
        results = [r for r in server.search("submit job") if r.kind == "example"]
        assert results[0].anchor == "example-submit-a-job"
        assert "sbatch" in results[0].snippet

    def test_no_match(self, server):
        assert server.search("zzzz-no-match") == []

    def test_empty_query_recent_feed(self, server):
        results = server.search("")
        kinds = {r.kind for r in results}
        assert kinds <= {"article", "question"}
        # hpc article was updated last, so it leads the feed
        assert results[0].term == "hpc"
        assert any(r.kind == "question" for r in results)

    def test_review_results(self, server):
        from helpers import editor

        server.submit_for_review("hpc", HPC_DOC + "\nMore.\n", editor(server))
        results = [r for r in server.search("hpc") if r.kind == "review"]
        assert len(results) == 1

    def test_ordering_deterministic(self, server):
        assert server.search("hpc") == server.search("hpc")
