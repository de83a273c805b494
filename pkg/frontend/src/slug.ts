// Slug rules shared with the server: lowercase words joined by single
// hyphens, at most 100 characters.  Kept byte-identical to the backend
// so the editor never produces an anchor the server would reject.

export const MAX_SLUG_LEN = 100;

const SLUG_RE = /^[a-z0-9]+(?:-[a-z0-9]+)*$/;

export function isValidSlug(slug: string): boolean {
  return slug.length <= MAX_SLUG_LEN && SLUG_RE.test(slug);
}

/** Collapse free text into the slug grammar. */
export function slugify(text: string): string {
  const out = text
    .toLowerCase()
    .replace(/[^a-z0-9]+/g, "-")
    .replace(/^-+|-+$/g, "");
  return out.slice(0, MAX_SLUG_LEN).replace(/-+$/, "");
}

/** Display form of a slug: hyphens to spaces, first letter uppercased. */
export function slugToDisplay(slug: string): string {
  const text = slug.replace(/-/g, " ");
  return text.charAt(0).toUpperCase() + text.slice(1);
}
