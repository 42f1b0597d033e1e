from __future__ import annotations

import json

import pytest

from carbondate.core import (
    PlausibilityWindow,
    normalize_uri,
    parse_iso_timestamp,
    render_http_date,
    render_iso_timestamp,
)
from carbondate.replay import Cassette, HttpResponse, Interaction, ReplayTransport
from carbondate.sources import (
    ALL_METHODS,
    FLAG_CLIPPED_WINDOW,
    Endpoints,
    SourceContext,
    gather_evidence,
    probe_last_modified,
    query_archives,
    query_backlinks,
    query_search_index,
    query_shortener,
    query_social,
)

NOW = parse_iso_timestamp("2013-03-01T04:44:47")
URI = normalize_uri("http://site.example.com/")
EP = Endpoints()


def make_ctx(interactions):
    cassette = Cassette(recorded_at=NOW)
    for method, url, response in interactions:
        cassette.add(Interaction(method=method, url=url, response=response))
    return SourceContext(
        transport=ReplayTransport(cassette),
        window=PlausibilityWindow(now=NOW),
        parallelism=1,
    )


def jresp(obj, status=200):
    return HttpResponse(status=status, headers={}, body=json.dumps(obj))


def head_resp(last_modified=None):
    headers = {"Content-Type": "text/html"}
    if last_modified is not None:
        headers["Last-Modified"] = last_modified
    return HttpResponse(status=200, headers=headers, body="")


class TestLastModified:
    def test_parses_header(self):
        ctx = make_ctx([("HEAD", str(URI), head_resp("Wed, 27 Feb 2013 17:27:20 GMT"))])
        r = probe_last_modified(URI, ctx)
        assert r.status == "ok"
        assert r.estimate == parse_iso_timestamp("2013-02-27T17:27:20")

    def test_no_header_is_empty(self):
        ctx = make_ctx([("HEAD", str(URI), head_resp())])
        assert probe_last_modified(URI, ctx).status == "empty"

    def test_future_value_implausible(self):
        future = render_http_date(NOW + 10 * 365 * 86400)
        ctx = make_ctx([("HEAD", str(URI), head_resp(future))])
        r = probe_last_modified(URI, ctx)
        assert r.status == "empty"
        assert r.estimate is None

    def test_transport_failure_is_error(self):
        ctx = make_ctx([])
        assert probe_last_modified(URI, ctx).status == "error"


class TestArchives:
    def timemap_body(self, entries):
        lines = [f'<{URI}>;rel="original"']
        for capture_uri, t in entries:
            lines.append(
                f'<{capture_uri}>;rel="memento";datetime="{render_http_date(t)}"'
            )
        return ",\n".join(lines)

    def test_per_archive_detail(self):
        t1 = parse_iso_timestamp("2009-09-30T11:58:25")
        t2 = parse_iso_timestamp("2010-04-02T00:00:00")
        body = self.timemap_body(
            [
                ("http://wayback.archive-it.org/all/1/x", t1),
                ("http://api.wayback.archive.org/m/1/x", t1),
                ("http://webarchive.nationalarchives.gov.uk/1/x", t2),
            ]
        )
        ctx = make_ctx([
            ("GET", EP.timemap_url(str(URI)), HttpResponse(200, {}, body)),
        ])
        r = query_archives(URI, ctx)
        assert r.status == "ok"
        assert r.estimate == t1
        assert r.detail["by_archive"] == {
            "wayback.archive-it.org": t1,
            "api.wayback.archive.org": t1,
            "webarchive.nationalarchives.gov.uk": t2,
        }

    def test_empty_timemap(self):
        body = f'<{URI}>;rel="original"'
        ctx = make_ctx([("GET", EP.timemap_url(str(URI)), HttpResponse(200, {}, body))])
        assert query_archives(URI, ctx).status == "empty"

    def test_implausible_archive_filtered(self):
        # Brute-force min after filtering: 1994 capture must not win.
        t_old = parse_iso_timestamp("1994-06-01T00:00:00")
        t_ok = parse_iso_timestamp("2001-05-01T00:00:00")
        body = self.timemap_body(
            [("http://a.org/1", t_old), ("http://b.org/1", t_ok)]
        )
        ctx = make_ctx([("GET", EP.timemap_url(str(URI)), HttpResponse(200, {}, body))])
        r = query_archives(URI, ctx)
        assert r.estimate == t_ok
        assert "a.org" not in r.detail["by_archive"]


class TestShortener:
    def test_two_step_lookup(self):
        ctx = make_ctx([
            ("GET", EP.shortener_lookup_url(str(URI)), jresp({"id": "abc"})),
            ("GET", EP.shortener_info_url("abc"),
             jresp({"created_at": "2011-03-24T10:44:12"})),
        ])
        r = query_shortener(URI, ctx)
        assert r.status == "ok"
        assert r.estimate == parse_iso_timestamp("2011-03-24T10:44:12")

    def test_never_shortened(self):
        ctx = make_ctx([
            ("GET", EP.shortener_lookup_url(str(URI)), jresp({"id": None})),
        ])
        assert query_shortener(URI, ctx).status == "empty"

    def test_truncated_cassette_step2_error(self):
        ctx = make_ctx([
            ("GET", EP.shortener_lookup_url(str(URI)), jresp({"id": "abc"})),
        ])
        r = query_shortener(URI, ctx)
        assert r.status == "error"
        assert "info query failed" in r.error


class TestSocial:
    def posts(self, isos):
        return [{"id": f"p{i}", "posted_at": s} for i, s in enumerate(isos)]

    def test_min_over_posts(self):
        isos = ["2010-05-01T00:00:00", "2009-11-09T20:53:20", "2011-01-01T12:00:00"]
        ctx = make_ctx([
            ("GET", EP.social_search_url(str(URI)),
             jresp({"total": 3, "posts": self.posts(isos)})),
        ])
        r = query_social(URI, ctx)
        # Linear-scan oracle over every returned post.
        oracle = min(parse_iso_timestamp(s) for s in isos)
        assert r.estimate == oracle
        assert r.detail["total_posts"] == 3
        assert not r.flags

    def test_singleton(self):
        ctx = make_ctx([
            ("GET", EP.social_search_url(str(URI)),
             jresp({"posts": self.posts(["2012-02-12T06:33:00"])})),
        ])
        assert query_social(URI, ctx).estimate == parse_iso_timestamp(
            "2012-02-12T06:33:00"
        )

    def test_full_window_sets_clipped_flag(self):
        isos = ["2012-02-12T06:33:00"] + [
            render_iso_timestamp(parse_iso_timestamp("2012-02-12T06:33:00") + i * 3600)
            for i in range(1, 500)
        ]
        ctx = make_ctx([
            ("GET", EP.social_search_url(str(URI)),
             jresp({"total": 9000, "posts": self.posts(isos)})),
        ])
        r = query_social(URI, ctx)
        assert r.status == "ok"
        assert r.estimate == parse_iso_timestamp("2012-02-12T06:33:00")
        assert FLAG_CLIPPED_WINDOW in r.flags

    def test_no_posts(self):
        ctx = make_ctx([
            ("GET", EP.social_search_url(str(URI)), jresp({"total": 0, "posts": []})),
        ])
        assert query_social(URI, ctx).status == "empty"


class TestSearchIndex:
    def test_day_granularity(self):
        ctx = make_ctx([
            ("GET", EP.crawl_url(str(URI)), jresp({"crawl_date": "2009-11-16"})),
        ])
        r = query_search_index(URI, ctx)
        assert r.status == "ok"
        assert r.granularity == "day"
        assert r.estimate == parse_iso_timestamp("2009-11-16T00:00:00")

    def test_unindexed(self):
        ctx = make_ctx([("GET", EP.crawl_url(str(URI)), jresp({}))])
        assert query_search_index(URI, ctx).status == "empty"

    def test_future_day_implausible(self):
        ctx = make_ctx([
            ("GET", EP.crawl_url(str(URI)), jresp({"crawl_date": "2021-01-01"})),
        ])
        assert query_search_index(URI, ctx).status == "empty"


class TestBacklinks:
    def backlink_world(self, first_appearances):
        """One backlink per entry; first linking capture at the given time."""
        interactions = [
            ("GET", EP.backlinks_url(str(URI)),
             jresp({"backlinks": [f"http://bl{i}.example.net/" for i in
                                  range(len(first_appearances))]})),
        ]
        for i, t in enumerate(first_appearances):
            backlink = f"http://bl{i}.example.net/"
            captures = [(t - 90 * 86400, False), (t, True), (t + 30 * 86400, True)]
            lines = [f'<{backlink}>;rel="original"']
            for ct, _ in captures:
                lines.append(
                    f'<http://arch.example.org/web/x{i}n{ct}/{backlink}>'
                    f';rel="memento";datetime="{render_http_date(ct)}"'
                )
            interactions.append(
                ("GET", EP.timemap_url(backlink), HttpResponse(200, {}, ",\n".join(lines)))
            )
            for ct, linked in captures:
                body = (
                    f'<a href="{URI}">t</a>' if linked else "<html>none</html>"
                )
                interactions.append(
                    ("GET", f"http://arch.example.org/web/x{i}n{ct}/{backlink}",
                     HttpResponse(200, {}, body))
                )
        return make_ctx(interactions)

    def test_min_over_backlinks(self):
        times = [
            parse_iso_timestamp("2010-05-01T00:00:00"),
            parse_iso_timestamp("2009-03-02T00:00:00"),
            parse_iso_timestamp("2012-01-01T00:00:00"),
        ]
        ctx = self.backlink_world(times)
        r = query_backlinks(URI, ctx)
        assert r.status == "ok"
        assert r.estimate == min(times)

    def test_zero_backlinks(self):
        ctx = make_ctx([("GET", EP.backlinks_url(str(URI)), jresp({"backlinks": []}))])
        assert query_backlinks(URI, ctx).status == "empty"

    def test_listing_failure_is_error(self):
        ctx = make_ctx([])
        assert query_backlinks(URI, ctx).status == "error"


class TestGatherEvidence:
    def test_one_entry_per_enabled_method(self):
        ctx = make_ctx([("HEAD", str(URI), head_resp())])
        results = gather_evidence(URI, ctx, enabled=frozenset({"last_modified"}))
        assert [r.method for r in results] == ["last_modified"]
        assert results[0].status == "empty"

    def test_failures_isolated(self):
        # Only last_modified is recorded; the other five hit unmatched
        # interactions and must come back as per-method errors.
        ctx = make_ctx([("HEAD", str(URI), head_resp("Wed, 27 Feb 2013 17:27:20 GMT"))])
        results = gather_evidence(URI, ctx)
        by_method = {r.method: r for r in results}
        assert set(by_method) == set(ALL_METHODS)
        assert by_method["last_modified"].status == "ok"
        for m in ALL_METHODS - {"last_modified"}:
            assert by_method[m].status == "error"

    def test_deterministic_order(self):
        ctx = make_ctx([])
        for parallelism in (1, 4):
            ctx.parallelism = parallelism
            results = gather_evidence(URI, ctx)
            assert [r.method for r in results] == sorted(ALL_METHODS)

    def test_empty_enabled_set_rejected(self):
        ctx = make_ctx([])
        with pytest.raises(ValueError):
            gather_evidence(URI, ctx, enabled=frozenset())
