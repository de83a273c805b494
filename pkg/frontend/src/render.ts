// Article rendering: markdown is split into blocks so that anchor
// navigation can highlight the block enclosing a span.  Span tags stay
// in the output as invisible anchor elements.

export interface Block {
  html: string;
  anchors: string[];
  highlighted: boolean;
}

export interface ArticlePage {
  blocks: Block[];
  notice: string | null;
}

const SPAN_ANCHOR_RE = /<span\s+id="((?:question|example)-[a-z0-9-]+)"\s*><\/span>/g;
const FENCE_RE = /^ {0,3}(`{3,}|~{3,})\s*(\S*)\s*$/;

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function inlineMarkdown(text: string): string {
  // Protect anchors before escaping, then re-emit them as real elements.
  const anchors: string[] = [];
  const protectedText = text.replace(SPAN_ANCHOR_RE, (_m, id: string) => {
    anchors.push(id);
    return `\u0000${anchors.length - 1}\u0000`;
  });
  let html = escapeHtml(protectedText)
    .replace(/\*\*([^*]+)\*\*/g, "<b>$1</b>")
    .replace(/\*([^*]+)\*/g, "<i>$1</i>")
    .replace(/`([^`]+)`/g, "<code>$1</code>");
  html = html.replace(/\u0000(\d+)\u0000/g, (_m, i: string) => {
    return `<span id="${anchors[Number(i)]}" class="anchor"></span>`;
  });
  return html;
}

/** Split markdown into rendered blocks, each knowing its anchors. */
export function renderBlocks(markdown: string): Block[] {
  const blocks: Block[] = [];
  const lines = markdown.split("\n");
  let i = 0;
  let paragraph: string[] = [];

  const flush = () => {
    if (paragraph.length === 0) return;
    const text = paragraph.join("\n");
    const anchors = [...text.matchAll(SPAN_ANCHOR_RE)].map((m) => m[1]);
    blocks.push({ html: `<p>${inlineMarkdown(text)}</p>`, anchors, highlighted: false });
    paragraph = [];
  };

  while (i < lines.length) {
    const line = lines[i];
    const fence = FENCE_RE.exec(line);
    const heading = /^(#{1,6})\s+(.*)$/.exec(line);
    if (fence) {
      flush();
      const marker = fence[1];
      const language = fence[2];
      const body: string[] = [];
      i++;
      while (i < lines.length) {
        const close = FENCE_RE.exec(lines[i]);
        if (close && close[1][0] === marker[0] && close[1].length >= marker.length && !close[2]) {
          break;
        }
        body.push(lines[i]);
        i++;
      }
      const cls = language ? ` class="language-${escapeHtml(language)}"` : "";
      blocks.push({
        html: `<pre><code${cls}>${escapeHtml(body.join("\n"))}</code></pre>`,
        anchors: [],
        highlighted: false,
      });
    } else if (heading) {
      flush();
      const level = heading[1].length;
      blocks.push({
        html: `<h${level}>${inlineMarkdown(heading[2])}</h${level}>`,
        anchors: [],
        highlighted: false,
      });
    } else if (line.trim() === "") {
      flush();
    } else {
      paragraph.push(line);
    }
    i++;
  }
  flush();
  return blocks;
}

/**
 * Apply a deep-link anchor to a rendered article.  The block containing
 * the span is highlighted; an example anchor highlights the following
 * code block instead, since that is what the span points at.
 */
export function navigateToAnchor(blocks: Block[], anchor: string | null): ArticlePage {
  const page: ArticlePage = {
    blocks: blocks.map((b) => ({ ...b, highlighted: false })),
    notice: null,
  };
  if (!anchor) return page;
  const index = page.blocks.findIndex((b) => b.anchors.includes(anchor));
  if (index === -1) {
    page.notice = `Anchor "${anchor}" was not found in this article.`;
    return page;
  }
  let target = index;
  if (anchor.startsWith("example-")) {
    for (let j = index + 1; j < page.blocks.length; j++) {
      if (page.blocks[j].html.startsWith("<pre>")) {
        target = j;
        break;
      }
      if (page.blocks[j].anchors.length > 0) break;
    }
  }
  page.blocks[target].highlighted = true;
  return page;
}

export function pageHtml(page: ArticlePage): string {
  const parts = page.blocks.map((b) =>
    b.highlighted ? b.html.replace(/^<(\w+)/, '<$1 class="highlight"') : b.html,
  );
  if (page.notice) parts.unshift(`<div class="notice">${escapeHtml(page.notice)}</div>`);
  return parts.join("\n");
}
