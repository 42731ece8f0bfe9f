"""The four use-case queries, answered directly from a WikiStore.

Each function mirrors one SQL statement over the exported tables; see
``SQL_QUERIES`` for the statements themselves.  Results are sorted by id.
"""
from __future__ import annotations

from collections import Counter
from typing import Iterable

from .schema_builder import CATEGORY, WikiStore


class NotFound(LookupError):
    pass


SQL_QUERIES = {
    "shared-category": (
        "select page_id, page_name from tbl_Wiki_Page where\n"
        "page_id in (select page_id from tbl_Wiki_Page_Categories where\n"
        "category_page_id = {category})"
    ),
    "cross-links": (
        "select distinct page_id, link_page_id from tbl_Wiki_Page_Links\n"
        " where page_id in (select field1 from tbl_Temp) and link_page_id in\n"
        " (select field1 from tbl_Temp2)"
    ),
    "redirect-counts": (
        "select redirected_page_id, COUNT(*) from tbl_Wiki_Page_Redirect\n"
        " where page_id in (select field1 from tbl_Temp)\n"
        " group by redirected_page_id"
    ),
    "paragraph-links": (
        "select link_page_id from tbl_Wiki_Page_Links\n"
        " where pos_in_page >= (select paragraph_start_pos from\n"
        " tbl_Wiki_Page_Paragraphs where page_id = {page} and paragraph_id = {paragraph})\n"
        " and pos_in_page <= (select paragraph_end_pos from\n"
        " tbl_Wiki_Page_Paragraphs where page_id = {page} and paragraph_id = {paragraph})\n"
        " and page_id = {page}"
    ),
}


def pages_sharing_category(store: WikiStore, category_page_id: int) -> list[tuple[int, str]]:
    cat = store.page(category_page_id)
    if cat is None or cat.page_type != CATEGORY:
        return []
    members = {a.page_id for a in store.categories if a.category_page_id == category_page_id}
    return sorted((p.page_id, p.page_name) for p in store.pages if p.page_id in members)


def cross_group_links(
    store: WikiStore, group1: Iterable[int], group2: Iterable[int]
) -> set[tuple[int, int]]:
    g1, g2 = set(group1), set(group2)
    return {
        (link.page_id, link.link_page_id)
        for link in store.links
        if link.page_id in g1 and link.link_page_id in g2
    }


def redirect_counts(store: WikiStore, pages: Iterable[int]) -> dict[int | None, int]:
    """Count redirect rows per target, over redirect pages whose id is in ``pages``.

    Like the SQL it mirrors, the filter applies to the redirect pages
    themselves; redirects with an unresolved target group under ``None``.
    """
    wanted = set(pages)
    counts = Counter(r.redirected_page_id for r in store.redirects if r.page_id in wanted)
    return dict(sorted(counts.items(), key=lambda kv: (kv[0] is None, kv[0] or 0)))


def links_in_paragraph(store: WikiStore, page_id: int, paragraph_id: int) -> list[int]:
    if store.page(page_id) is None:
        raise NotFound(f"no page {page_id}")
    para = next(
        (p for p in store.paragraphs if p.page_id == page_id and p.paragraph_id == paragraph_id),
        None,
    )
    if para is None:
        raise NotFound(f"page {page_id} has no paragraph {paragraph_id}")
    hits = [
        link
        for link in store.links
        if link.page_id == page_id
        and para.paragraph_start_pos <= link.pos_in_page <= para.paragraph_end_pos
    ]
    hits.sort(key=lambda link: link.pos_in_page)
    return [link.link_page_id for link in hits]
