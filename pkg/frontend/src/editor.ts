// Editor state for the markdown editing view: a draft per term with
// span-insertion helpers and live validation.  The submit action stays
// disabled whenever the draft would fail server-side validation.

import { slugify } from "./slug";
import { validateDraft, type SpanKind, type ValidationReport } from "./spans";

export function spanTag(kind: SpanKind, questionText: string): string {
  return `<span id="${kind}-${slugify(questionText)}"></span>`;
}

export class EditorState {
  readonly term: string;
  draft: string;
  cursor: number;
  dirty = false;

  constructor(term: string, initialContent = "") {
    this.term = term;
    this.draft = initialContent;
    this.cursor = initialContent.length;
  }

  get validation(): ValidationReport {
    return validateDraft(this.draft);
  }

  get canSubmit(): boolean {
    return this.validation.ok;
  }

  /** Whether the insert helper is usable for the given question text. */
  canInsertSpan(text: string): boolean {
    return slugify(text).length > 0;
  }

  /** Insert a well-formed anchor at the cursor; examples get a fence scaffold. */
  insertSpan(kind: SpanKind, questionText: string): void {
    if (!this.canInsertSpan(questionText)) return;
    let insertion = spanTag(kind, questionText) + "\n";
    if (kind === "example") {
      insertion += "```\n\n```\n";
    }
    this.draft = this.draft.slice(0, this.cursor) + insertion + this.draft.slice(this.cursor);
    this.cursor += insertion.length;
    this.dirty = true;
  }

  setDraft(content: string, cursor?: number): void {
    this.draft = content;
    this.cursor = cursor ?? content.length;
    this.dirty = true;
  }
}
