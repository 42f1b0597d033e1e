from __future__ import annotations

from datetime import date

import pytest
from hypothesis import given
from hypothesis import strategies as st

from carbondate.core import (
    MalformedUri,
    PlausibilityWindow,
    UnparsableDate,
    day_to_timestamp,
    filter_plausible,
    normalize_uri,
    parse_http_date,
    parse_iso_timestamp,
    render_http_date,
    render_iso_timestamp,
    truncate_to_day,
)

NOW = parse_iso_timestamp("2013-03-01T00:00:00")


class TestNormalizeUri:
    def test_default_port_and_case(self):
        u = normalize_uri("HTTP://Example.COM:80")
        assert u.scheme == "http"
        assert u.host == "example.com"
        assert u.port is None
        assert u.path == "/"

    def test_bare_host_gets_root_path(self):
        u = normalize_uri("http://www.mementoweb.org")
        assert u.host == "www.mementoweb.org"
        assert u.path == "/"
        assert u.display() == "http://www.mementoweb.org"

    def test_rejects_non_uri(self):
        with pytest.raises(MalformedUri):
            normalize_uri("not a uri")

    def test_rejects_empty_and_other_schemes(self):
        for raw in ["", "   ", "ftp://example.com/", "//example.com/x"]:
            with pytest.raises(MalformedUri):
                normalize_uri(raw)

    def test_fragment_dropped_query_kept(self):
        u = normalize_uri("https://example.com/a?b=1#frag")
        assert u.query == "b=1"
        assert "frag" not in str(u)

    def test_non_default_port_kept(self):
        assert normalize_uri("http://example.com:8080/").port == 8080
        assert normalize_uri("https://example.com:443/").port is None

    def test_spelling_variants_collapse(self):
        variants = [
            "http://Example.com",
            "http://example.com:80/",
            "HTTP://EXAMPLE.COM",
        ]
        forms = {normalize_uri(v) for v in variants}
        assert len(forms) == 1

    @given(
        st.sampled_from(["http", "https", "HTTP"]),
        st.from_regex(r"[A-Za-z0-9][A-Za-z0-9.-]{0,20}", fullmatch=True),
        st.sampled_from(["", "/", "/a/b", "/a%2fb", "/x?y=1"]),
    )
    def test_idempotent(self, scheme, host, tail):
        raw = f"{scheme}://{host}{tail}"
        try:
            once = normalize_uri(raw)
        except MalformedUri:
            return
        assert normalize_uri(str(once)) == once


class TestParseHttpDate:
    def test_rfc1123(self):
        assert parse_http_date("Wed, 27 Feb 2013 17:27:20 GMT") == 1361986040

    def test_epoch(self):
        assert parse_http_date("Thu, 01 Jan 1970 00:00:00 GMT") == 0

    def test_rfc850_two_digit_year(self):
        # Frozen from an independent reference parser.
        assert parse_http_date("Sunday, 06-Nov-94 08:49:37 GMT") == 784111777

    def test_rfc850_pivot(self):
        # 70-99 -> 1900s, 00-69 -> 2000s.
        t_99 = parse_http_date("Friday, 31-Dec-99 23:59:59 GMT")
        assert truncate_to_day(t_99).year == 1999
        t_00 = parse_http_date("Saturday, 01-Jan-00 00:00:00 GMT")
        assert truncate_to_day(t_00).year == 2000
        t_69 = parse_http_date("Wednesday, 01-Jan-69 00:00:00 GMT")
        assert truncate_to_day(t_69).year == 2069

    def test_asctime(self):
        assert parse_http_date("Wed Feb 27 17:27:20 2013") == 1361986040
        assert parse_http_date("Sun Nov  6 08:49:37 1994") == 784111777

    @pytest.mark.parametrize(
        "bad",
        [
            "2013-02-27T17:27:20Z",
            "27 Feb 2013",
            "Wed, 30 Feb 2013 00:00:00 GMT",
            "garbage",
            "",
        ],
    )
    def test_rejects(self, bad):
        with pytest.raises(UnparsableDate):
            parse_http_date(bad)

    @given(st.integers(min_value=0, max_value=4102444800))
    def test_rfc1123_round_trip(self, t):
        assert parse_http_date(render_http_date(t)) == t


class TestPlausibility:
    def test_pre_1995_rejected(self, window):
        assert filter_plausible(parse_iso_timestamp("1994-12-31T23:59:59"), window) is None

    def test_future_rejected(self, window):
        assert filter_plausible(window.now + 1, window) is None

    def test_in_window_passes(self, window):
        t = parse_iso_timestamp("2009-09-30T11:58:25")
        assert filter_plausible(t, window) == t

    def test_bounds_inclusive(self, window):
        assert filter_plausible(window.earliest, window) == window.earliest
        assert filter_plausible(window.now, window) == window.now

    def test_projection(self, window):
        for t in [0, window.earliest, NOW - 5, NOW + 5]:
            once = filter_plausible(t, window)
            assert filter_plausible(once, window) == once

    def test_window_requires_order(self):
        with pytest.raises(ValueError):
            PlausibilityWindow(now=0)


class TestDays:
    def test_truncate(self):
        assert truncate_to_day(1361986040) == date(2013, 2, 27)
        assert truncate_to_day(1254311905) == date(2009, 9, 30)
        assert truncate_to_day(0) == date(1970, 1, 1)

    @given(st.integers(min_value=0, max_value=4102444800))
    def test_truncate_brackets_instant(self, t):
        d = truncate_to_day(t)
        start = day_to_timestamp(d)
        assert start <= t < start + 86400

    def test_iso_round_trip(self):
        s = "2009-09-30T11:58:25"
        assert render_iso_timestamp(parse_iso_timestamp(s)) == s
