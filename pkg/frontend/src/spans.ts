// Client-side port of the server's span-anchor scanner, used for live
// draft validation in the editor.  The rules must stay in lockstep with
// the backend: the cross-component fixture suite pins the shared cases.

import { isValidSlug } from "./slug";

export type SpanKind = "question" | "example";

export type ErrorCode =
  | "MalformedSpanId"
  | "DuplicateSlug"
  | "ExampleWithoutCode"
  | "UnclosedSpan";

export interface ValidationError {
  code: ErrorCode;
  line: number;
  detail: string;
}

export interface ValidationReport {
  ok: boolean;
  errors: ValidationError[];
}

export interface ParsedSpan {
  kind: SpanKind;
  slug: string;
  anchor: string;
  line: number;
}

interface RawSpan {
  type: "span";
  spanId: string;
  line: number;
  closed: boolean;
  kind: SpanKind | null;
  slug: string | null;
}

interface Fence {
  type: "fence";
  line: number;
}

type Event = RawSpan | Fence;

const SPAN_OPEN_RE = /<span\s+id="([^"]*)"\s*>/g;
const FENCE_RE = /^ {0,3}(`{3,}|~{3,})(.*)$/;

function classify(spanId: string): { kind: SpanKind | null; slug: string | null } {
  for (const kind of ["question", "example"] as SpanKind[]) {
    const prefix = kind + "-";
    if (spanId.startsWith(prefix)) {
      const slug = spanId.slice(prefix.length);
      if (isValidSlug(slug)) return { kind, slug };
      return { kind: null, slug: null };
    }
  }
  return { kind: null, slug: null };
}

/** Walk the document once; fenced code blocks are opaque to spans. */
function scan(source: string): Event[] {
  const events: Event[] = [];
  let fenceMarker: string | null = null;
  let fenceLine = 0;
  const lines = source.split("\n");
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i];
    const lineno = i + 1;
    const fenceMatch = FENCE_RE.exec(line);
    if (fenceMarker !== null) {
      if (
        fenceMatch &&
        fenceMatch[1][0] === fenceMarker[0] &&
        fenceMatch[1].length >= fenceMarker.length &&
        fenceMatch[2].trim() === ""
      ) {
        events.push({ type: "fence", line: fenceLine });
        fenceMarker = null;
      }
    } else if (fenceMatch) {
      fenceMarker = fenceMatch[1];
      fenceLine = lineno;
    } else {
      for (const m of line.matchAll(SPAN_OPEN_RE)) {
        const { kind, slug } = classify(m[1]);
        events.push({
          type: "span",
          spanId: m[1],
          line: lineno,
          closed: line.indexOf("</span>", (m.index ?? 0) + m[0].length) !== -1,
          kind,
          slug,
        });
      }
    }
  }
  if (fenceMarker !== null) events.push({ type: "fence", line: fenceLine });
  return events;
}

function wellFormed(ev: RawSpan): boolean {
  return ev.kind !== null && ev.closed;
}

function hasFollowingFence(events: Event[], start: number): boolean {
  for (const ev of events.slice(start + 1)) {
    if (ev.type === "span" && wellFormed(ev)) return false;
    if (ev.type === "fence") return true;
  }
  return false;
}

/** Extract the question/example index; first occurrence wins per kind. */
export function parseSpans(source: string): ParsedSpan[] {
  const events = scan(source);
  const seen = { question: new Set<string>(), example: new Set<string>() };
  const out: ParsedSpan[] = [];
  for (const ev of events) {
    if (ev.type !== "span" || !wellFormed(ev)) continue;
    const kind = ev.kind as SpanKind;
    const slug = ev.slug as string;
    if (seen[kind].has(slug)) continue;
    seen[kind].add(slug);
    out.push({ kind, slug, anchor: `${kind}-${slug}`, line: ev.line });
  }
  return out;
}

/** Check the authoring rules; mirrors the server's validate endpoint. */
export function validateDraft(source: string): ValidationReport {
  const events = scan(source);
  const errors: ValidationError[] = [];
  const seen = { question: new Set<string>(), example: new Set<string>() };
  for (let i = 0; i < events.length; i++) {
    const ev = events[i];
    if (ev.type !== "span") continue;
    if (ev.kind === null) {
      errors.push({
        code: "MalformedSpanId",
        line: ev.line,
        detail: `span id "${ev.spanId}" is not a valid question/example anchor`,
      });
      continue;
    }
    if (!ev.closed) {
      errors.push({
        code: "UnclosedSpan",
        line: ev.line,
        detail: `span "${ev.spanId}" is not closed on the same line`,
      });
      continue;
    }
    const slug = ev.slug as string;
    if (seen[ev.kind].has(slug)) {
      errors.push({
        code: "DuplicateSlug",
        line: ev.line,
        detail: `duplicate ${ev.kind} slug "${slug}"`,
      });
      continue;
    }
    seen[ev.kind].add(slug);
    if (ev.kind === "example" && !hasFollowingFence(events, i)) {
      errors.push({
        code: "ExampleWithoutCode",
        line: ev.line,
        detail: `example "${slug}" has no code block before the next span`,
      });
    }
  }
  return { ok: errors.length === 0, errors };
}
