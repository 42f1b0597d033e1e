#!/usr/bin/env python3
"""Build the shipped replay cassette for http://www.mementoweb.org.

The recorded values mirror the service's published sample response for
that URI. Regenerate with:

    python3 scripts/make_mementoweb_cassette.py fixtures/mementoweb.jsonl
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

from carbondate.core import parse_iso_timestamp, render_http_date
from carbondate.replay import Cassette, HttpResponse, Interaction
from carbondate.sources import Endpoints

URI = "http://www.mementoweb.org/"
DISPLAY_URI = "http://www.mementoweb.org"
RECORDED_AT = "2013-03-01T04:44:47"

ARCHIVE_CAPTURES = [
    ("api.wayback.archive.org", "2009-09-30T11:58:25",
     "http://api.wayback.archive.org/memento/20090930115825/http://www.mementoweb.org/"),
    ("wayback.archive-it.org", "2009-09-30T11:58:25",
     "http://wayback.archive-it.org/all/20090930115825/http://www.mementoweb.org/"),
    ("webarchive.nationalarchives.gov.uk", "2010-04-02T00:00:00",
     "http://webarchive.nationalarchives.gov.uk/20100402000000/http://www.mementoweb.org/"),
]

BACKLINK = "http://www.cs.odu.edu/"
BACKLINK_CAPTURES = [
    ("2010-06-14T08:20:11", False),
    ("2011-01-16T21:42:12", True),
    ("2011-05-02T17:05:40", True),
    ("2012-03-21T03:11:58", True),
]


def link_body(original: str, captures: list[tuple[str, str]]) -> str:
    lines = [f'<{original}>;rel="original"']
    for capture_uri, iso in captures:
        http_date = render_http_date(parse_iso_timestamp(iso))
        lines.append(f'<{capture_uri}>;rel="memento";datetime="{http_date}"')
    return ",\n".join(lines)


def wayback_uri(iso: str, original: str) -> str:
    ts = iso.replace("-", "").replace("T", "").replace(":", "")
    return f"http://web.archive.org/web/{ts}/{original}"


def json_response(obj) -> HttpResponse:
    return HttpResponse(
        status=200,
        headers={"Content-Type": "application/json"},
        body=json.dumps(obj),
    )


def build() -> Cassette:
    endpoints = Endpoints()
    cassette = Cassette(recorded_at=parse_iso_timestamp(RECORDED_AT))

    def add(method: str, url: str, response: HttpResponse) -> None:
        cassette.add(Interaction(method=method, url=url, response=response))

    add(
        "HEAD",
        URI,
        HttpResponse(
            status=200,
            headers={
                "Content-Type": "text/html; charset=UTF-8",
                "Last-Modified": render_http_date(
                    parse_iso_timestamp("2012-04-20T21:52:07")
                ),
                "Server": "Apache",
            },
            body="",
        ),
    )

    add(
        "GET",
        endpoints.timemap_url(URI),
        HttpResponse(
            status=200,
            headers={"Content-Type": "application/link-format"},
            body=link_body(URI, [(cu, iso) for _, iso, cu in ARCHIVE_CAPTURES]),
        ),
    )

    add("GET", endpoints.shortener_lookup_url(URI), json_response({"id": "lM9Ah"}))
    add(
        "GET",
        endpoints.shortener_info_url("lM9Ah"),
        json_response({"created_at": "2011-03-24T10:44:12"}),
    )

    posts = [
        {"id": "t564", "posted_at": "2009-11-09T20:53:20"},
        {"id": "t891", "posted_at": "2009-12-01T09:14:02"},
        {"id": "t1402", "posted_at": "2010-03-17T15:40:55"},
        {"id": "t2210", "posted_at": "2011-06-08T22:01:33"},
    ]
    add(
        "GET",
        endpoints.social_search_url(URI),
        json_response({"total": 187, "posts": posts}),
    )

    add(
        "GET",
        endpoints.crawl_url(URI),
        json_response({"crawl_date": "2009-11-16"}),
    )

    add(
        "GET",
        endpoints.backlinks_url(URI),
        json_response({"backlinks": [BACKLINK]}),
    )
    backlink_caps = [(wayback_uri(iso, BACKLINK), iso) for iso, _ in BACKLINK_CAPTURES]
    add(
        "GET",
        endpoints.timemap_url("http://www.cs.odu.edu/"),
        HttpResponse(
            status=200,
            headers={"Content-Type": "application/link-format"},
            body=link_body(BACKLINK, backlink_caps),
        ),
    )
    for iso, has_link in BACKLINK_CAPTURES:
        ts = iso.replace("-", "").replace("T", "").replace(":", "")
        if has_link:
            anchor = f'<a href="/web/{ts}/{URI}">Memento project</a>'
        else:
            anchor = ""
        body = f"<html><body><h1>Department news</h1>{anchor}</body></html>"
        add(
            "GET",
            wayback_uri(iso, BACKLINK),
            HttpResponse(status=200, headers={"Content-Type": "text/html"}, body=body),
        )

    return cassette


def main() -> int:
    out = Path(sys.argv[1] if len(sys.argv) > 1 else "fixtures/mementoweb.jsonl")
    out.parent.mkdir(parents=True, exist_ok=True)
    build().save(str(out))
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
