#!/usr/bin/env python3
"""Writes the golden end-to-end fixture and its expected reports.

The inputs (XML history dumps for two languages, a warm HTTP cache with
pageview API responses, a config file) are generated from a seeded model.
The expected rank timelines and heatmaps are computed here from that model
with exact rational arithmetic, without running any wikirel code.

    python3 tests/golden/make_fixture.py [--check]

--check regenerates into a temporary directory and compares with the
checked-in files.
"""

import argparse
import filecmp
import json
import random
import shutil
import sys
import tempfile
from datetime import date, datetime, timedelta, timezone
from fractions import Fraction
from pathlib import Path
from urllib.parse import quote
from xml.sax.saxutils import escape

HERE = Path(__file__).resolve().parent
SEED = 20200101
WINDOW = (date(2020, 1, 1), date(2020, 3, 31))
TOP_K = 3
MODELS = ("F", "PR", "PR2")
PAGEVIEW_API = "https://wikimedia.org/api/rest_v1/metrics/pageviews"

# host -> registrable domain under the public suffix list
HOSTS = {
    "en": {
        "www.who.int": "who.int",
        "news.bbc.co.uk": "bbc.co.uk",
        "www.bbc.co.uk": "bbc.co.uk",
        "www.cdc.gov": "cdc.gov",
        "edition.cnn.com": "cnn.com",
        "www.nytimes.com": "nytimes.com",
        "www.theguardian.com": "theguardian.com",
        "covid19.github.io": "covid19.github.io",
        "data.worldbank.org": "worldbank.org",
    },
    "pl": {
        "www.gov.pl": "www.gov.pl",
        "pzh.gov.pl": "pzh.gov.pl",
        "www.who.int": "who.int",
        "wiadomosci.onet.pl": "onet.pl",
        "tvn24.pl": "tvn24.pl",
        "www.rp.pl": "rp.pl",
        "koronawirus.waw.pl": "koronawirus.waw.pl",
    },
}

# Template:Covid source, transcluded by some articles; its URL changes twice.
TEMPLATE = "Covid source"
TEMPLATE_REVISIONS = [
    (datetime(2019, 11, 1, tzinfo=timezone.utc), "https://www.cdc.gov/coronavirus/a", "cdc.gov"),
    (datetime(2020, 2, 10, 12, tzinfo=timezone.utc), "https://www.ecdc.europa.eu/en/b", "europa.eu"),
    (datetime(2020, 3, 5, tzinfo=timezone.utc), "https://www.nature.com/articles/c", "nature.com"),
]

ARTICLES = {
    "en": [
        ("COVID-19 pandemic", ["Coronavirus pandemic", "2019–20 coronavirus outbreak"]),
        ("COVID-19 pandemic in Italy", []),
        ("COVID-19 vaccine", ["Coronavirus vaccine"]),
        ("Timeline of the COVID-19 pandemic", []),
        ("COVID-19 testing", []),
        ("COVID-19 lockdowns", ["Lockdowns during the COVID-19 pandemic"]),
    ],
    "pl": [
        ("Pandemia COVID-19 w Polsce", ["Epidemia COVID-19 w Polsce"]),
        ("Pandemia COVID-19 w Łodzi", []),
        ("Szczepionka przeciw COVID-19", []),
        ("Kwarantanna narodowa", []),
    ],
}

INFOBOX = "{{Infobox pandemic\n| disease = COVID-19\n| virus_strain = SARS-CoV-2\n}}"


def ts(dt):
    return dt.strftime("%Y-%m-%dT%H:%M:%SZ")


def days():
    d = WINDOW[0]
    while d <= WINDOW[1]:
        yield d
        d += timedelta(days=1)


def month(d):
    return f"{d.year:04d}-{d.month:02d}"


def window_start():
    return datetime(WINDOW[0].year, WINDOW[0].month, WINDOW[0].day, tzinfo=timezone.utc)


def template_at(t):
    """Template revision current at t, or None."""
    current = None
    for rev in TEMPLATE_REVISIONS:
        if rev[0] <= t:
            current = rev
    return current


class Article:
    def __init__(self, lang, title, redirects, rng):
        self.lang = lang
        self.title = title
        self.redirects = redirects
        self.revisions = []  # (datetime, wikitext, [(domain, count)], uses_template)
        hosts = sorted(HOSTS[lang])
        start = datetime(2019, 12, 1, tzinfo=timezone.utc) + timedelta(hours=rng.randrange(0, 24 * 70))
        t = start
        refs = []  # (form, url, domain, reuses)
        uses_template = rng.random() < 0.6
        while t < datetime(2020, 4, 3, tzinfo=timezone.utc):
            # Mutate the reference list.
            if refs and rng.random() < 0.3:
                refs.pop(rng.randrange(len(refs)))
            for _ in range(rng.randrange(0, 3)):
                host = rng.choice(hosts)
                form = rng.choice(["plain", "cite", "named"])
                url = f"https://{host}/{rng.randrange(10**6)}"
                refs.append((form, url, HOSTS[lang][host], rng.randrange(0, 3) if form == "named" else 0))
            if rng.random() < 0.15:
                uses_template = not uses_template
            self.revisions.append((t, self.render(refs, uses_template), list(refs), uses_template))
            # Several edits on one day sometimes, otherwise days to weeks apart.
            t += timedelta(minutes=rng.choice([7, 45, 300, 1440, 2880, 4000, 10000, 20000]))

    def render(self, refs, uses_template):
        parts = [INFOBOX, f"'''{self.title}''' is an article."]
        for i, (form, url, _, reuses) in enumerate(refs):
            if form == "plain":
                parts.append(f"Fact {i}.<ref>{url}</ref>")
            elif form == "cite":
                parts.append(f"Fact {i}.<ref>{{{{cite web |url={url} |title=Source {i} |access-date=2020-01-01}}}}</ref>")
            else:
                parts.append(f'Fact {i}.<ref name="n{i}">[{url} Source {i}]</ref>')
                for j in range(reuses):
                    parts.append(f'Again {i}.{j}.<ref name="n{i}" />')
        if uses_template:
            parts.append("Official guidance.{{" + TEMPLATE + "}}")
        parts.append("== References ==\n{{reflist}}")
        return "\n".join(parts)

    def counts_at(self, rev):
        """(C(i), {domain: C_s(i)}) of a revision, with templates as of its
        (window-clamped) timestamp."""
        t, _, refs, uses_template = rev
        total = 0
        per = {}
        for form, _, domain, reuses in refs:
            n = 1 + reuses
            total += n
            per[domain] = per.get(domain, 0) + n
        if uses_template:
            tpl = template_at(max(t, window_start()))
            if tpl is not None:
                total += 1
                per[tpl[2]] = per.get(tpl[2], 0) + 1
        return total, per

    def revision_of_day(self, d):
        end = datetime(d.year, d.month, d.day, 23, 59, 59, tzinfo=timezone.utc)
        current = None
        for rev in self.revisions:
            if rev[0] <= end:
                current = rev
        return current


def page_xml(title, ns, page_id, revisions, redirect=None):
    out = [f"  <page>\n    <title>{escape(title)}</title>\n    <ns>{ns}</ns>\n    <id>{page_id}</id>\n"]
    if redirect:
        out.append(f'    <redirect title="{escape(redirect)}" />\n')
    for rev_id, t, text in revisions:
        out.append(
            f"    <revision>\n      <id>{rev_id}</id>\n      <timestamp>{ts(t)}</timestamp>\n"
            f"      <contributor><username>Editor</username><id>1</id></contributor>\n"
            f'      <text bytes="{len(text.encode())}" xml:space="preserve">{escape(text)}</text>\n'
            f"    </revision>\n"
        )
    out.append("  </page>\n")
    return "".join(out)


def write_dump(path, lang, articles):
    pages = []
    rev_id = 1000
    page_id = 1
    for a in articles:
        revs = []
        for t, text, _, _ in a.revisions:
            rev_id += 1
            revs.append((rev_id, t, text))
        pages.append(page_xml(a.title, 0, page_id, revs))
        page_id += 1
        for r in a.redirects:
            rev_id += 1
            pages.append(page_xml(r, 0, page_id, [(rev_id, datetime(2020, 1, 15, tzinfo=timezone.utc),
                                                   f"#REDIRECT [[{a.title}]]")], redirect=a.title))
            page_id += 1
    # Noise: an unrelated article, a talk page and the template.
    rev_id += 1
    pages.append(page_xml("Spanish flu", 0, page_id, [(rev_id, datetime(2019, 5, 1, tzinfo=timezone.utc),
                                                       "{{Infobox pandemic|disease=Influenza}}"
                                                       "<ref>https://www.cdc.gov/flu</ref>")]))
    page_id += 1
    rev_id += 1
    pages.append(page_xml("Talk:" + articles[0].title, 1, page_id,
                          [(rev_id, datetime(2020, 2, 1, tzinfo=timezone.utc), INFOBOX + "<ref>https://x.org/</ref>")]))
    page_id += 1
    tpl = []
    for t, url, _ in TEMPLATE_REVISIONS:
        rev_id += 1
        tpl.append((rev_id, t, f"<ref>{{{{cite web |url={url} |title=Guidance}}}}</ref><noinclude>\nDocs.\n</noinclude>"))
    pages.append(page_xml("Template:" + TEMPLATE, 10, page_id, tpl))
    body = "".join(pages)
    path.write_text(
        f'<mediawiki xmlns="http://www.mediawiki.org/xml/export-0.10/" version="0.10" xml:lang="{lang}">\n'
        "  <siteinfo>\n    <sitename>Wikipedia</sitename>\n  </siteinfo>\n" + body + "</mediawiki>\n",
        encoding="utf-8",
    )


def fnv1a64(s):
    h = 0xCBF29CE484222325
    for b in s.encode("utf-8"):
        h ^= b
        h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return f"{h:016x}"


def pageview_url(lang, title, agent):
    key = quote(title.replace(" ", "_"), safe="-_.~")
    a, b = WINDOW
    return (f"{PAGEVIEW_API}/per-article/{lang}.wikipedia/all-access/{agent}/{key}/daily/"
            f"{a:%Y%m%d}00/{b:%Y%m%d}00")


def write_cache_entry(cache, url, status, body):
    path = cache / "http" / (fnv1a64(url) + ".json")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps({"url": url, "status": status, "body": body}, ensure_ascii=False,
                               separators=(",", ":")), encoding="utf-8")


def make_views(rng, articles, cache):
    """Writes API responses; returns {(lang, title): {day: (all, human)}}."""
    views = {}
    for a in articles:
        totals = {d: [0, 0] for d in days()}
        for title in [a.title] + a.redirects:
            if title != a.title and rng.random() < 0.3:
                # No data for this redirect at all.
                for agent in ("all-agents", "user"):
                    write_cache_entry(cache, pageview_url(a.lang, title, agent), 404,
                                      '{"type":"https://mediawiki.org/wiki/HyperSwitch/errors/not_found"}')
                continue
            base = rng.randrange(50, 5000) if title == a.title else rng.randrange(1, 300)
            items_all, items_user = [], []
            for d in days():
                if rng.random() < 0.05:
                    continue  # day missing from the response
                total = max(0, int(base * rng.uniform(0.3, 2.0)))
                human = int(total * rng.uniform(0.5, 1.0))
                stamp = f"{d:%Y%m%d}00"
                common = {"project": f"{a.lang}.wikipedia", "article": title.replace(" ", "_"),
                          "granularity": "daily", "timestamp": stamp, "access": "all-access"}
                items_all.append(dict(common, agent="all-agents", views=total))
                items_user.append(dict(common, agent="user", views=human))
                totals[d][0] += total
                totals[d][1] += human
            for agent, items in (("all-agents", items_all), ("user", items_user)):
                write_cache_entry(cache, pageview_url(a.lang, title, agent), 200,
                                  json.dumps({"items": items}, separators=(",", ":"), ensure_ascii=False))
        views[(a.lang, a.title)] = {d: tuple(v) for d, v in totals.items()}
    return views


def daily_scores(articles, views, model):
    """{day: {domain: Fraction}} over the snapshots of `articles`."""
    out = {}
    for d in days():
        scores = {}
        for a in articles:
            rev = a.revision_of_day(d)
            if rev is None:
                continue
            total, per = a.counts_at(rev)
            v_all, v_human = views[(a.lang, a.title)][d]
            for domain, n in per.items():
                if model == "F":
                    term = Fraction(n)
                else:
                    v = v_all if model == "PR" else v_human
                    term = Fraction(v * n, total)
                scores[domain] = scores.get(domain, 0) + term
        out[d] = scores
    return out


def monthly(daily):
    """{domain: {month: (mean Fraction, rank)}}"""
    sums = {}
    for d, scores in daily.items():
        for domain, s in scores.items():
            acc = sums.setdefault(domain, {}).setdefault(month(d), [Fraction(0), 0])
            acc[0] += s
            acc[1] += 1
    means = {dom: {m: acc[0] / acc[1] for m, acc in ms.items()} for dom, ms in sums.items()}
    result = {dom: {} for dom in means}
    for m in sorted({m for ms in means.values() for m in ms}):
        ranked = sorted((dom for dom in means if m in means[dom]), key=lambda dom: (-means[dom][m], dom))
        for r, dom in enumerate(ranked, 1):
            result[dom][m] = (means[dom][m], r)
    return result


class NearTie(Exception):
    pass


def check_separation(series, model):
    """Floating point evaluation must agree with the exact values: no two
    scores of a month may be nearly equal unless exactly equal integers
    averages (F), and no score may sit on a rounding boundary."""
    by_month = {}
    for dom, ms in series.items():
        for m, (score, _) in ms.items():
            by_month.setdefault(m, []).append(score)
            scaled = score * 10**6
            frac = scaled - (scaled.numerator // scaled.denominator)
            if abs(frac - Fraction(1, 2)) < Fraction(1, 10**4):
                raise NearTie(f"{dom} {m} {float(score)} near a rounding boundary")
    for m, scores in by_month.items():
        scores.sort()
        for x, y in zip(scores, scores[1:]):
            if x == y and model == "F":
                continue
            if y - x <= max(abs(y), 1) * Fraction(1, 10**8):
                raise NearTie(f"{model} {m}: {float(x)} vs {float(y)}")


def fmt6(x):
    scaled = x * 10**6
    q, r = divmod(scaled.numerator, scaled.denominator)
    if 2 * r >= scaled.denominator:
        q += 1
    return f"{q // 10**6}.{q % 10**6:06d}"


def rank_timeline_csv(scope, model, series):
    selected = [dom for dom, ms in series.items() if any(r <= TOP_K for _, r in ms.values())]
    rows = []
    for dom in selected:
        for m, (score, r) in series[dom].items():
            rows.append((m, r, dom, score))
    rows.sort()
    lines = ["language,month,model,domain,score,rank"]
    for m, r, dom, score in rows:
        lines.append(f"{scope},{m},{model},{dom},{fmt6(score)},{r}")
    return "\n".join(lines) + "\n"


def rank_timeline_json(scope, model, csv_text):
    rows = [line.split(",") for line in csv_text.splitlines()[1:]]
    months = sorted({r[1] for r in rows})
    domains = {}
    for _, m, _, dom, score, rank in rows:
        cells = domains.setdefault(dom, ([None] * len(months), [None] * len(months)))
        i = months.index(m)
        cells[0][i] = int(rank)
        cells[1][i] = float(score)
    doc = {"scope": scope, "model": model, "top_k": TOP_K, "months": months,
           "domains": [{"domain": d, "rank": domains[d][0], "score": domains[d][1]} for d in sorted(domains)]}
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def heatmap_json(model, per_language):
    langs = sorted(per_language)
    domains = sorted({dom for s in per_language.values() for dom, ms in s.items()
                      if any(r <= TOP_K for _, r in ms.values())})
    rows = []
    for dom in domains:
        cells = []
        for lang in langs:
            ms = per_language[lang].get(dom)
            if not ms:
                cells.append(None)
            else:
                ranks = [r for _, r in ms.values()]
                cells.append(sum(ranks) / len(ranks))
        rows.append({"domain": dom, "average_rank": cells})
    doc = {"model": model, "top_k": TOP_K, "languages": langs, "rows": rows}
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def config_text():
    return f"""# Golden fixture: two languages from XML history dumps, pageviews from
# a warm API cache. Run offline.
[pipeline]
languages = en,pl
from = {WINDOW[0]}
to = {WINDOW[1]}
output_dir = out
cache_dir = cache
psl = ../../../data/public_suffix_list.dat
top_k = {TOP_K}

[identify]
methods = infobox

[pageviews]
mode = api

[http]
user_agent = wikirel-golden/1.0 (fixture)

[lang.en]
source = dump
history_dumps = en-history.xml

[lang.pl]
source = dump
history_dumps = pl-history.xml
"""


def generate(out, seed):
    rng = random.Random(seed)
    fixture = out / "fixture"
    expected = out / "expected"
    fixture.mkdir(parents=True)
    expected.mkdir(parents=True)
    articles = {lang: [Article(lang, t, r, rng) for t, r in ARTICLES[lang]] for lang in ("en", "pl")}
    for lang, arts in articles.items():
        write_dump(fixture / f"{lang}-history.xml", lang, arts)
    views = {}
    for lang in ("en", "pl"):
        views.update(make_views(rng, articles[lang], fixture / "cache"))
    (fixture / "wikirel.ini").write_text(config_text(), encoding="utf-8")

    scopes = {"en": articles["en"], "pl": articles["pl"], "all": articles["en"] + articles["pl"]}
    for model in MODELS:
        per_language = {}
        for scope, arts in scopes.items():
            series = monthly(daily_scores(arts, views, model))
            check_separation(series, model)
            path = expected / scope / model / "rank_timeline.csv"
            path.parent.mkdir(parents=True, exist_ok=True)
            csv_text = rank_timeline_csv(scope, model, series)
            path.write_text(csv_text, encoding="utf-8")
            (path.parent / "rank_timeline.json").write_text(rank_timeline_json(scope, model, csv_text),
                                                            encoding="utf-8")
            if scope != "all":
                per_language[scope] = series
        (expected / "all" / model / "language_heatmap.json").write_text(
            heatmap_json(model, per_language), encoding="utf-8")


def generate_separated(out):
    seed = SEED
    while True:
        try:
            generate(out, seed)
            return seed
        except NearTie as e:
            print(f"seed {seed}: {e}; trying the next seed", file=sys.stderr)
            shutil.rmtree(out)
            out.mkdir()
            seed += 1


def same_tree(a, b):
    cmp = filecmp.dircmp(a, b)
    if cmp.left_only or cmp.right_only or cmp.diff_files or cmp.funny_files:
        return False
    return all(same_tree(a / d, b / d) for d in cmp.common_dirs)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--check", action="store_true", help="compare with the checked-in files")
    args = ap.parse_args()
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        seed = generate_separated(tmp)
        if args.check:
            ok = all(same_tree(tmp / d, HERE / d) for d in ("fixture", "expected"))
            print("golden files are up to date" if ok else "golden files differ from the generator")
            return 0 if ok else 1
        for d in ("fixture", "expected"):
            shutil.rmtree(HERE / d, ignore_errors=True)
            shutil.copytree(tmp / d, HERE / d)
        print(f"wrote {HERE / 'fixture'} and {HERE / 'expected'} (seed {seed})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
