"""Span-anchor parsing and validation for article markdown.

Articles mark searchable questions and examples with invisible inline
anchors of the form ``<span id="question-<slug>"></span>`` and
``<span id="example-<slug>"></span>``.  This module extracts them with
exact byte offsets, validates the authoring rules, and diffs parsed
indexes between article revisions.

Everything here is a pure function over immutable inputs.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from enum import Enum

from .errors import InvalidSlug

MAX_SLUG_LEN = 100

_SLUG_RE = re.compile(r"[a-z0-9]+(?:-[a-z0-9]+)*\Z")

# A fully well-formed anchor: open tag immediately closed, id carrying a
# question/example prefix.  Slug grammar is checked separately so that
# near-misses can be reported as malformed rather than silently ignored.
_SPAN_OPEN_RE = re.compile(r'<span\s+id="([^"]*)"\s*>')
_CLOSE_TAG = "</span>"

_FENCE_RE = re.compile(r"^ {0,3}(`{3,}|~{3,})(.*)$")


class SpanKind(str, Enum):
    QUESTION = "question"
    EXAMPLE = "example"


class ErrorCode(str, Enum):
    MALFORMED_SPAN_ID = "MalformedSpanId"
    DUPLICATE_SLUG = "DuplicateSlug"
    EXAMPLE_WITHOUT_CODE = "ExampleWithoutCode"
    UNCLOSED_SPAN = "UnclosedSpan"


def is_valid_slug(slug: str) -> bool:
    return len(slug) <= MAX_SLUG_LEN and bool(_SLUG_RE.match(slug))


def slug_to_display(slug: str) -> str:
    """Display form of a slug: hyphens to spaces, first letter uppercased."""
    if not is_valid_slug(slug):
        raise InvalidSlug(slug)
    text = slug.replace("-", " ")
    return text[0].upper() + text[1:]


def slugify(text: str) -> str:
    """Collapse free text into the slug grammar (used for asked questions)."""
    out = re.sub(r"[^a-z0-9]+", "-", text.lower()).strip("-")
    return out[:MAX_SLUG_LEN].rstrip("-")


@dataclass(frozen=True)
class SpanTag:
    kind: SpanKind
    slug: str
    byte_offset: int  # 0-based offset of '<' in the raw UTF-8 source
    line: int  # 1-based


@dataclass(frozen=True)
class Question:
    slug: str
    location: SpanTag

    @property
    def display_text(self) -> str:
        return slug_to_display(self.slug)

    @property
    def anchor(self) -> str:
        return f"question-{self.slug}"


@dataclass(frozen=True)
class Example:
    slug: str
    location: SpanTag
    code_block: str
    code_language: str | None = None

    @property
    def anchor(self) -> str:
        return f"example-{self.slug}"


@dataclass(frozen=True)
class ParsedArticle:
    source_hash: str
    questions: tuple[Question, ...]
    examples: tuple[Example, ...]


@dataclass(frozen=True)
class ValidationError:
    code: ErrorCode
    line: int
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    errors: tuple[ValidationError, ...]

    @property
    def ok(self) -> bool:
        return not self.errors


@dataclass(frozen=True)
class QuestionDiff:
    added: frozenset[str]
    removed: frozenset[str]
    moved: frozenset[str]


@dataclass
class _RawSpan:
    # One <span id="..."> occurrence outside a code fence.
    span_id: str
    byte_offset: int
    line: int
    closed: bool
    kind: SpanKind | None = None
    slug: str | None = None

    @property
    def well_formed(self) -> bool:
        return self.kind is not None and self.closed


@dataclass
class _Fence:
    line: int
    info: str
    content_lines: list[str] = field(default_factory=list)


def _classify(span_id: str) -> tuple[SpanKind | None, str | None]:
    for kind in SpanKind:
        prefix = kind.value + "-"
        if span_id.startswith(prefix):
            slug = span_id[len(prefix):]
            if is_valid_slug(slug):
                return kind, slug
            return None, None
    return None, None


def _scan(source: str) -> list[object]:
    """Walk the document once, yielding spans and fenced blocks in order.

    Fenced code blocks are opaque: span-shaped text inside them is never
    treated as an anchor.
    """
    events: list[object] = []
    fence: _Fence | None = None
    fence_marker: str | None = None
    offset = 0
    for lineno, raw_line in enumerate(source.split("\n"), start=1):
        fence_match = _FENCE_RE.match(raw_line)
        if fence is not None:
            if (
                fence_match
                and fence_match.group(1)[0] == fence_marker[0]
                and len(fence_match.group(1)) >= len(fence_marker)
                and not fence_match.group(2).strip()
            ):
                events.append(fence)
                fence = None
                fence_marker = None
            else:
                fence.content_lines.append(raw_line)
        elif fence_match:
            fence = _Fence(line=lineno, info=fence_match.group(2).strip())
            fence_marker = fence_match.group(1)
        else:
            for m in _SPAN_OPEN_RE.finditer(raw_line):
                kind, slug = _classify(m.group(1))
                span = _RawSpan(
                    span_id=m.group(1),
                    byte_offset=offset + len(raw_line[: m.start()].encode("utf-8")),
                    line=lineno,
                    closed=raw_line.find(_CLOSE_TAG, m.end()) != -1,
                    kind=kind,
                    slug=slug,
                )
                events.append(span)
        offset += len(raw_line.encode("utf-8")) + 1  # +1 for the newline
    # An unterminated fence still counts as a code block to the end of file.
    if fence is not None:
        events.append(fence)
    return events


def parse_spans(source: str) -> ParsedArticle:
    """Extract the question/example index from article markdown.

    Malformed spans are skipped (validate_article reports them); when a
    slug repeats within a kind, the first occurrence wins.  Each example
    is bound to the first fenced code block that follows it with no other
    span in between.
    """
    events = _scan(source)
    questions: list[Question] = []
    examples: list[Example] = []
    seen: dict[SpanKind, set[str]] = {SpanKind.QUESTION: set(), SpanKind.EXAMPLE: set()}

    for i, ev in enumerate(events):
        if not isinstance(ev, _RawSpan) or not ev.well_formed:
            continue
        if ev.slug in seen[ev.kind]:
            continue
        seen[ev.kind].add(ev.slug)
        tag = SpanTag(kind=ev.kind, slug=ev.slug, byte_offset=ev.byte_offset, line=ev.line)
        if ev.kind is SpanKind.QUESTION:
            questions.append(Question(slug=ev.slug, location=tag))
        else:
            code, language = _following_code(events, i)
            examples.append(
                Example(slug=ev.slug, location=tag, code_block=code, code_language=language)
            )

    digest = hashlib.sha256(source.encode("utf-8")).hexdigest()
    return ParsedArticle(
        source_hash=digest, questions=tuple(questions), examples=tuple(examples)
    )


def _following_code(events: list[object], start: int) -> tuple[str, str | None]:
    for ev in events[start + 1 :]:
        if isinstance(ev, _RawSpan) and ev.well_formed:
            return "", None
        if isinstance(ev, _Fence):
            return "\n".join(ev.content_lines), ev.info or None
    return "", None


def validate_article(source: str) -> ValidationReport:
    """Check the authoring rules; errors are data, never exceptions.

    Any ``<span id="...">`` outside a code fence must be a well-formed
    question/example anchor: correct prefix, slug grammar, closed on the
    same line.  Slugs must be unique per kind and every example span must
    be followed by a fenced code block before the next span.
    """
    events = _scan(source)
    errors: list[ValidationError] = []
    seen: dict[SpanKind, set[str]] = {SpanKind.QUESTION: set(), SpanKind.EXAMPLE: set()}

    spans = [(i, ev) for i, ev in enumerate(events) if isinstance(ev, _RawSpan)]
    for i, ev in spans:
        if ev.kind is None:
            errors.append(
                ValidationError(
                    code=ErrorCode.MALFORMED_SPAN_ID,
                    line=ev.line,
                    detail=f'span id "{ev.span_id}" is not a valid question/example anchor',
                )
            )
            continue
        if not ev.closed:
            errors.append(
                ValidationError(
                    code=ErrorCode.UNCLOSED_SPAN,
                    line=ev.line,
                    detail=f'span "{ev.span_id}" is not closed on the same line',
                )
            )
            continue
        if ev.slug in seen[ev.kind]:
            errors.append(
                ValidationError(
                    code=ErrorCode.DUPLICATE_SLUG,
                    line=ev.line,
                    detail=f'duplicate {ev.kind.value} slug "{ev.slug}"',
                )
            )
            continue
        seen[ev.kind].add(ev.slug)
        if ev.kind is SpanKind.EXAMPLE and not _has_following_fence(events, i):
            errors.append(
                ValidationError(
                    code=ErrorCode.EXAMPLE_WITHOUT_CODE,
                    line=ev.line,
                    detail=f'example "{ev.slug}" has no code block before the next span',
                )
            )
    return ValidationReport(errors=tuple(errors))


def _has_following_fence(events: list[object], start: int) -> bool:
    for ev in events[start + 1 :]:
        if isinstance(ev, _RawSpan) and ev.well_formed:
            return False
        if isinstance(ev, _Fence):
            return True
    return False


def diff_questions(old: ParsedArticle, new: ParsedArticle) -> QuestionDiff:
    """Index maintenance on sync: which question slugs appeared, vanished, or moved."""
    old_by_slug = {q.slug: q for q in old.questions}
    new_by_slug = {q.slug: q for q in new.questions}
    added = frozenset(new_by_slug) - frozenset(old_by_slug)
    removed = frozenset(old_by_slug) - frozenset(new_by_slug)
    moved = frozenset(
        slug
        for slug in frozenset(old_by_slug) & frozenset(new_by_slug)
        if old_by_slug[slug].location.byte_offset != new_by_slug[slug].location.byte_offset
    )
    return QuestionDiff(added=added, removed=removed, moved=moved)
