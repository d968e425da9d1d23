#!/usr/bin/env python3
"""Recounts the corpus reports for the fixture corpus with plain loops.

    python3 tools/fixtures/stats_oracle.py fixtures/ fixtures/stats_expected/

Uses the thresholds and top-n in PARAMS; the test passes the same values to
`tweetgeo stats`.
"""

import json
import sys
from collections import Counter, defaultdict
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent))
from oracle import nonblank, read_tweet  # noqa: E402

PARAMS = {
    "country_thresholds": [50, 20, 10, 5],
    "city_thresholds": [10, 5, 3, 1],
    "top_n": 5,
}
PRIORITY = ["geo", "place", "user_location", "tweet_locations"]


def field(s):
    if any(c in s for c in ',"\n\r'):
        return '"' + s.replace('"', '""') + '"'
    return s


def ranked(header, counts):
    rows = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return header + "\n" + "".join(f"{field(k)},{v}\n" for k, v in rows)


def human(n):
    for unit, div in (("M", 1_000_000), ("K", 1_000)):
        if n >= div and n % div == 0:
            return f"{n // div}{unit}"
    return str(n)


def buckets(entity, counts, thresholds):
    out = f"bucket,{entity}\n"
    for t in thresholds:
        out += f">{human(t)},{sum(1 for v in counts.values() if v > t)}\n"
    return out


def series(days, daily, totals, n):
    keys = [k for k, _ in sorted(totals.items(), key=lambda kv: (-kv[1], kv[0]))[:n]]
    out = "date" + "".join("," + field(k) for k in keys) + "\n"
    for d in days:
        out += d + "".join(f",{daily[(d, k)]}" for k in keys) + "\n"
    return out


def main():
    root = Path(sys.argv[1])
    out_dir = Path(sys.argv[2])
    records = {}
    with open(root / "golden_records.jsonl", encoding="utf-8") as f:
        for line in f:
            r = json.loads(line)
            records[int(r["tweet_id"])] = r

    daily = Counter()
    langs = Counter()
    countries = Counter()
    cities = Counter()
    sources = Counter()
    daily_country = Counter()
    daily_city = Counter()
    daily_lang = Counter()
    users = defaultdict(lambda: {"geo": False, "place": False, "location": False, "verified": False})

    with open(root / "corpus.jsonl", encoding="utf-8") as f:
        for line in f:
            obj = json.loads(line)
            t = read_tweet(obj)
            day = t["time"].strftime("%Y-%m-%d")
            daily[day] += 1
            lang = nonblank(obj.get("lang")) or "und"
            langs[lang] += 1
            daily_lang[(day, lang)] += 1

            u = users[t["user"]]
            u["geo"] |= t["coords"] is not None
            u["place"] |= t["place_name"] is not None or t["place_cc"] is not None
            u["verified"] |= bool(obj["user"].get("verified"))

            rec = records.get(t["id"])
            if rec is None:
                continue
            u["location"] |= "user_location" in rec
            for s in PRIORITY:
                if s in rec:
                    sources[s] += 1
            best = next((rec[s] for s in PRIORITY if s in rec), None)
            if best is None:
                continue
            cc = best.get("country_code") or best.get("country")
            if cc:
                countries[cc] += 1
                daily_country[(day, cc)] += 1
            if best.get("city"):
                key = best["city"] + (", " + cc if cc else "")
                cities[key] += 1
                daily_city[(day, key)] += 1

    days = sorted(daily)
    files = {
        "daily_volume.csv": "date,tweets\n" + "".join(f"{d},{daily[d]}\n" for d in days),
        "languages.csv": ranked("language,tweets", langs),
        "countries.csv": ranked("country,tweets", countries),
        "cities.csv": ranked("city,tweets", cities),
        "sources.csv": "source,tweets\n" + "".join(f"{s},{sources[s]}\n" for s in PRIORITY),
        "country_buckets.csv": buckets("countries", countries, PARAMS["country_thresholds"]),
        "city_buckets.csv": buckets("cities", cities, PARAMS["city_thresholds"]),
        "top_country_daily.csv": series(days, daily_country, countries, PARAMS["top_n"]),
        "top_city_daily.csv": series(days, daily_city, cities, PARAMS["top_n"]),
        "top_language_daily.csv": series(days, daily_lang, langs, PARAMS["top_n"]),
    }
    vals = list(users.values())
    ver = [u for u in vals if u["verified"]]
    files["users.csv"] = (
        "metric,all_users,verified_users\n"
        f"users,{len(vals)},{len(ver)}\n"
        + "".join(
            f"{name},{sum(u[k] for u in vals)},{sum(u[k] for u in ver)}\n"
            for name, k in (("with_geo", "geo"), ("with_place", "place"), ("with_location_value", "location"))
        )
    )
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, body in files.items():
        (out_dir / name).write_text(body, encoding="utf-8")
    (out_dir / "params.json").write_text(json.dumps(PARAMS, indent=2) + "\n")


if __name__ == "__main__":
    main()
