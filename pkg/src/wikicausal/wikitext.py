"""Wikitext to plain text conversion for the supported markup subset.

Supported: internal and external links, bold/italic quotes, headings,
bullet/numbered/definition lists, one-level template invocation for the
first infobox, ``<ref>`` removal, HTML comment removal, table removal.
Anything else degrades to text removal; conversion never fails. The
returned plain text is a fixed point of the converter.
"""

from __future__ import annotations

import re
from typing import NamedTuple

_COMMENT_RE = re.compile(r"<!--.*?-->", re.DOTALL)
_REF_PAIR_RE = re.compile(r"<ref[^<>]*>.*?</ref\s*>", re.DOTALL | re.IGNORECASE)
_REF_SELF_RE = re.compile(r"<ref[^<>]*/\s*>", re.IGNORECASE)
_INNER_LINK_RE = re.compile(r"\[\[([^\[\]]*?)\]\]")
_EXT_LINK_LABELED_RE = re.compile(r"\[(?:https?|ftp)://[^\s\]]*\s+([^\]]*)\]")
_EXT_LINK_BARE_RE = re.compile(r"\[(?:https?|ftp)://[^\s\]]*\]")
_TAG_RE = re.compile(r"</?[A-Za-z][^<>]*>")
_HEADING_RE = re.compile(r"^(={2,6})\s*(.*?)\s*=+\s*$")
_LIST_RE = re.compile(r"^[*#:;]+\s*")


class ParsedPage(NamedTuple):
    text: str
    first_section: str
    headings: list[str]
    categories: list[str]
    infobox: dict[str, str]
    timelines: list[str]


def _find_matching(s: str, start: int, open_tok: str, close_tok: str) -> int:
    """Index just past the close token matching the open token at ``start``,
    or -1 when unbalanced."""
    depth = 0
    i = start
    n = len(s)
    while i < n:
        if s.startswith(open_tok, i):
            depth += 1
            i += len(open_tok)
        elif s.startswith(close_tok, i):
            depth -= 1
            i += len(close_tok)
            if depth == 0:
                return i
        else:
            i += 1
    return -1


def _split_top_level(content: str) -> list[str]:
    """Split template content on ``|`` ignoring pipes nested in {{}} or [[]]."""
    parts = []
    buf = []
    depth = 0
    i = 0
    n = len(content)
    while i < n:
        two = content[i : i + 2]
        if two in ("{{", "[["):
            depth += 1
            buf.append(two)
            i += 2
        elif two in ("}}", "]]"):
            depth -= 1
            buf.append(two)
            i += 2
        elif content[i] == "|" and depth <= 0:
            parts.append("".join(buf))
            buf = []
            i += 1
        else:
            buf.append(content[i])
            i += 1
    parts.append("".join(buf))
    return parts


def _strip_templates(s: str, capture_infobox: bool = False):
    """Remove all {{...}} invocations; optionally parse the first infobox."""
    infobox: dict[str, str] = {}
    captured = False
    out = []
    i = 0
    n = len(s)
    while i < n:
        if s.startswith("{{", i):
            end = _find_matching(s, i, "{{", "}}")
            if end == -1:
                break  # unterminated template swallows the rest
            content = s[i + 2 : end - 2]
            if capture_infobox and not captured:
                name = _split_top_level(content)[0].strip()
                if name.lower().startswith("infobox"):
                    infobox = _parse_infobox_params(content)
                    captured = True
            i = end
        else:
            out.append(s[i])
            i += 1
    return "".join(out), infobox


def _parse_infobox_params(content: str) -> dict[str, str]:
    params: dict[str, str] = {}
    for part in _split_top_level(content)[1:]:
        if "=" not in part:
            continue
        key, value = part.split("=", 1)
        key = re.sub(r"\s+", " ", key).strip()
        value, _ = _strip_templates(value)
        value = _reduce_links(value)
        value = _clean_inline(value)
        value = re.sub(r"\s+", " ", value).strip()
        if key and value:
            params[key] = value
    return params


def _strip_tables(s: str) -> str:
    out = []
    i = 0
    n = len(s)
    while i < n:
        if s.startswith("{|", i):
            end = _find_matching(s, i, "{|", "|}")
            if end == -1:
                break
            i = end
        else:
            out.append(s[i])
            i += 1
    return "".join(out)


def _reduce_links(s: str, categories: list[str] | None = None) -> str:
    """Reduce [[...]] innermost-first; collect categories, drop file links."""

    def repl(match: re.Match) -> str:
        inner = match.group(1)
        target, _, anchor = inner.partition("|")
        namespace = target.strip().lower()
        if namespace.startswith("category:"):
            if categories is not None:
                name = target.strip()[len("category:") :].strip()
                if name:
                    categories.append(name)
            return ""
        if namespace.startswith(("file:", "image:")):
            return ""
        return (anchor if "|" in inner else target).strip()

    while True:
        s, count = _INNER_LINK_RE.subn(repl, s)
        if count == 0:
            break
    return s.replace("[[", "").replace("]]", "")


def _clean_inline(s: str) -> str:
    s = _EXT_LINK_LABELED_RE.sub(r"\1", s)
    s = _EXT_LINK_BARE_RE.sub("", s)
    s = s.replace("'''''", "").replace("'''", "").replace("''", "")
    s = _TAG_RE.sub("", s)
    s = s.replace("&nbsp;", " ")
    return s


def wikitext_to_plaintext(wikitext: str) -> ParsedPage:
    """Convert wikitext to (text, first_section, headings, categories,
    infobox, timelines).

    Paragraph blocks are separated by blank lines; each heading becomes its
    own block with the ``=`` markers dropped, so ``first_section`` (everything
    before the first heading) is a prefix of ``text``.
    """
    categories: list[str] = []
    s = _COMMENT_RE.sub("", wikitext)
    s = _REF_PAIR_RE.sub("", s)
    s = _REF_SELF_RE.sub("", s)
    s, infobox = _strip_templates(s, capture_infobox=True)
    s = _strip_tables(s)
    s = _reduce_links(s, categories)
    s = _clean_inline(s)

    headings: list[str] = []
    timelines: list[str] = []
    blocks: list[list[str]] = []
    current: list[str] = []
    first_section_end: int | None = None
    in_timeline_section = False

    def flush():
        if current:
            blocks.append(current.copy())
            current.clear()

    for raw_line in s.split("\n"):
        line = re.sub(r"[ \t]+", " ", raw_line).strip()
        heading = _HEADING_RE.match(line)
        if heading:
            title = heading.group(2).strip()
            flush()
            if first_section_end is None:
                first_section_end = len(blocks)
            if title:
                headings.append(title)
                blocks.append([title])
                in_timeline_section = "timeline" in title.lower()
            continue
        if not line:
            flush()
            continue
        if _LIST_RE.match(line):
            # strip the full marker run so the item cannot re-parse as a list
            item = re.sub(r"^[*#:;\s]+", "", line).strip()
            if not item:
                continue
            if in_timeline_section and line[0] in "*#":
                timelines.append(item)
            current.append(item)
            continue
        current.append(line)
    flush()

    text = "\n\n".join("\n".join(block) for block in blocks)
    if first_section_end is None:
        first_section = text
    else:
        first_section = "\n\n".join(
            "\n".join(block) for block in blocks[:first_section_end]
        )
    return ParsedPage(text, first_section, headings, categories, infobox, timelines)
