#!/usr/bin/env python3
"""Builds the fixture set under fixtures/.

    python3 tools/fixtures/generate.py --world-cities PATH/worldcitiespop.csv

Writes:
  gazetteer.csv     2,000 rows in the world-cities layout: the curated places
                    plus rows drawn from PATH
  corpus.jsonl      200 synthetic tweets in the platform's v1.1 JSON layout
  labels.jsonl      the intended location behind each tweet
  nominatim.jsonl   one recorded response per request the corpus triggers

Run oracle.py afterwards to refresh golden_records.jsonl. Output is
deterministic for a given world-cities file.
"""

import argparse
import csv
import json
import random
import unicodedata
from datetime import datetime, timedelta, timezone
from pathlib import Path

import oracle
from places import CITIES, COUNTRIES, EXTRA_TOWNS, SEARCH, STATES

GAZETTEER_ROWS = 2000
TWEETS = 200
USERS = 120
SEED = 20200301
LICENCE = "Data © OpenStreetMap contributors, ODbL 1.0. https://osm.org/copyright"

US_STATE_ABBR = {
    "New York": "NY", "California": "CA", "District of Columbia": "DC", "Illinois": "IL",
    "Texas": "TX", "Washington": "WA", "Massachusetts": "MA", "Florida": "FL", "Georgia": "GA",
}
SHORT_COUNTRY = {"gb": "UK", "us": "USA"}

# Cities users live in, with weights.
HOMES = [
    ("london", 10), ("new york", 9), ("washington", 5), ("los angeles", 4), ("chicago", 3),
    ("houston", 2), ("austin", 2), ("dallas", 2), ("seattle", 2), ("boston", 2), ("miami", 2),
    ("atlanta", 1), ("san francisco", 2), ("manchester", 3), ("birmingham", 2), ("edinburgh", 1),
    ("paris", 4), ("lyon", 1), ("toronto", 3), ("vancouver", 1), ("mexico city", 2), ("madrid", 3),
    ("barcelona", 2), ("rome", 3), ("milan", 2), ("berlin", 2), ("munich", 1), ("amsterdam", 1),
    ("brussels", 1), ("lisbon", 1), ("dublin", 2), ("vienna", 1), ("moscow", 1), ("istanbul", 1),
    ("cairo", 1), ("lagos", 3), ("abuja", 1), ("nairobi", 2), ("johannesburg", 2), ("cape town", 1),
    ("mumbai", 3), ("new delhi", 3), ("bengaluru", 1), ("karachi", 2), ("lahore", 1), ("dhaka", 1),
    ("wuhan", 1), ("beijing", 1), ("tokyo", 2), ("seoul", 1), ("manila", 2), ("jakarta", 1),
    ("sydney", 2), ("melbourne", 1), ("sao paulo", 2), ("buenos aires", 1), ("lima", 1),
    ("bogota", 1), ("riyadh", 1), ("dubai", 1),
]

TEXTS_WITH_PLACE = [
    "Stay safe everyone in {p} #COVID19",
    "RT @{handle}: {n} new cases confirmed in {p} today {url}",
    "Lockdown day {d} here in {p}. Missing my friends",
    "Hospitals in {p} need more masks and ventilators #coronavirus",
    "{p} is so quiet right now...",
    "Just landed in {p}, temperature checks at the airport",
    "Supermarket shelves in {p} are empty again 😷",
    "Thank you to all the nurses in {p}! 👏 {url}",
    "The streets of {p} at night during the #lockdown",
    "@{handle} how are things in {p}?",
]
TEXTS_WITH_TWO = [
    "Flights from {p} to {q} cancelled",
    "Praying for everyone in {p} and {q} 🙏",
    "My family is stuck in {q} while I am in {p}",
]
TEXTS_WITHOUT = [
    "Wash your hands! #StayHome",
    "Working from home again, the new normal",
    "RT @{handle}: Please follow the official guidance {url}",
    "Day {d} of quarantine and I have baked {n} loaves of bread",
    "Flatten the curve. #SocialDistancing {url}",
    "Can't believe it is only {d}:00 and I am already bored",
]
PROFILE_JOKES = ["Mars", "Planet Earth", "somewhere over the rainbow", "Home", "🌍", "Worldwide", "she/her"]
PROFILE_NICKNAMES = {"new york": "NYC", "london": "LDN", "los angeles": "LA", "washington": "DMV"}


def fold_ascii(s):
    return "".join(c for c in unicodedata.normalize("NFKD", s) if not unicodedata.combining(c)).lower()


def entry(key):
    """(kind, fields) for a result key."""
    if key in CITIES:
        return "city", CITIES[key]
    if key in STATES:
        return "state", STATES[key]
    return "country", COUNTRIES[key]


def bbox(lat, lon, d):
    return [f"{lat - d:.7f}", f"{lat + d:.7f}", f"{lon - d:.7f}", f"{lon + d:.7f}"]


def search_result(key, osm_id):
    kind, f = entry(key)
    if kind == "city":
        name, county, state, country, cc, lat, lon, imp = f
        address = {"city": name, "county": county, "state": state, "country": country, "country_code": cc}
        display = ", ".join([name, county, state, country])
        rank, d = 16, 0.15
    elif kind == "state":
        state, country, cc, lat, lon, imp = f
        name = state
        address = {"state": state, "country": country, "country_code": cc}
        display = f"{state}, {country}"
        rank, d = 8, 3.0
    else:
        country, cc, lat, lon, imp = f
        name = country
        address = {"country": country, "country_code": cc}
        display = country
        rank, d = 4, 8.0
    return {
        "place_id": 200000 + osm_id,
        "licence": LICENCE,
        "osm_type": "relation",
        "osm_id": osm_id,
        "lat": f"{lat:.7f}",
        "lon": f"{lon:.7f}",
        "category": "boundary",
        "type": "administrative",
        "place_rank": rank,
        "importance": imp,
        "addresstype": kind,
        "name": name,
        "display_name": display,
        "address": address,
        "boundingbox": bbox(lat, lon, d),
    }


def reverse_result(key, lat, lon, osm_id):
    name, county, state, country, cc, _, _, _ = CITIES[key]
    address = {
        "road": "High Street",
        "suburb": "Centre",
        "city": name,
        "county": county,
        "state": state,
        "postcode": "00000",
        "country": country,
        "country_code": cc,
    }
    return {
        "place_id": 900000 + osm_id,
        "licence": LICENCE,
        "osm_type": "way",
        "osm_id": osm_id,
        "lat": f"{lat:.7f}",
        "lon": f"{lon:.7f}",
        "category": "highway",
        "type": "residential",
        "place_rank": 26,
        "importance": 0.1,
        "addresstype": "road",
        "name": "High Street",
        "display_name": ", ".join(["High Street", "Centre", name, county, state, "00000", country]),
        "address": address,
        "boundingbox": bbox(lat, lon, 0.001),
    }


def place_tag(key):
    """(full_name, country_code) of a platform place tag for a home city."""
    name, _, state, country, cc, *_ = CITIES[key]
    if key == "new york":
        return "Manhattan, NY", "US"
    if cc == "us":
        return f"{name}, {US_STATE_ABBR[state]}", "US"
    if cc == "gb" or cc == "ca":
        return f"{name}, {state}", cc.upper()
    return f"{name}, {country}", cc.upper()


def build_gazetteer(world_cities, out):
    rows = []
    for key, (name, _, state, _, cc, lat, lon, _) in CITIES.items():
        rows.append([cc, fold_ascii(name), name, state[:2].upper(), "", f"{lat}", f"{lon}"])
    for state, _, cc, lat, lon, _ in STATES.values():
        rows.append([cc, fold_ascii(state), state, "00", "", f"{lat}", f"{lon}"])
    for country, cc, lat, lon, _ in COUNTRIES.values():
        rows.append([cc, fold_ascii(country), country, "00", "", f"{lat}", f"{lon}"])
    for cc, name, region, lat, lon in EXTRA_TOWNS:
        rows.append([cc, fold_ascii(name), name, region, "", f"{lat}", f"{lon}"])

    with open(world_cities, newline="", encoding="utf-8", errors="replace") as f:
        reader = csv.reader(f)
        header = next(reader)
        source = [r for r in reader if len(r) == 7]
    populated = [r for r in source if r[4]]
    rest = [r for r in source if not r[4]]
    rng = random.Random(SEED)
    need = GAZETTEER_ROWS - len(rows) - len(populated)
    rows += populated + rng.sample(rest, need)
    with open(out, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def make_users(rng):
    keys = [k for k, _ in HOMES]
    weights = [w for _, w in HOMES]
    users = []
    for u in range(USERS):
        home = rng.choices(keys, weights)[0]
        name, _, state, country, cc, *_ = CITIES[home]
        r = rng.random()
        if r < 0.28:
            loc, style = name, "city"
        elif r < 0.48:
            loc, style = f"{name}, {SHORT_COUNTRY.get(cc, country)}", "city_country"
        elif r < 0.58:
            loc, style = f"{name} | {state}", "city_state"
        elif r < 0.66:
            loc, style = PROFILE_NICKNAMES.get(home, name.upper()), "nickname"
        elif r < 0.73:
            loc, style = rng.choice(PROFILE_JOKES), "joke"
        elif r < 0.83:
            other = rng.choice([k for k in keys if k != home])
            loc, style = CITIES[other][0], "elsewhere"
        elif r < 0.92:
            loc, style = country, "country"
        else:
            loc, style = None, "none"
        users.append({
            "id": 7000000 + 9173 * u,
            "screen_name": f"user{u:03d}",
            "home": home,
            "location": loc,
            "style": style,
            "verified": rng.random() < 0.12,
        })
    return users


def mention(rng, home):
    """Text place name: the home city most of the time."""
    r = rng.random()
    if r < 0.65:
        return CITIES[home][0], home
    if r < 0.8:
        key = rng.choice([k for k, _ in HOMES if k != home])
        return CITIES[key][0], key
    if r < 0.92:
        key = rng.choice(list(COUNTRIES))
        return COUNTRIES[key][0], key
    key = rng.choice(list(STATES))
    return STATES[key][0], key


def make_tweets(rng, users):
    start = datetime(2020, 3, 1, tzinfo=timezone.utc)
    offsets = [(0.0, 0.0), (0.0123, -0.0087), (-0.0211, 0.0154), (0.0042, 0.0311)]
    keys = [k for k, _ in HOMES]
    tweets, labels = [], []
    for i in range(TWEETS):
        user = users[min(int(rng.expovariate(1 / 40)), USERS - 1)] if i % 3 else rng.choice(users)
        home = user["home"]
        created = start + timedelta(seconds=rng.randrange(7 * 86400))
        fill = {
            "handle": rng.choice(["WHO", "CDCgov", "BBCBreaking", "nytimes", "ECDC_EU"]),
            "url": "https://t.co/" + "".join(rng.choice("abcdefghijkmnopqrstuvwxyz0123456789") for _ in range(10)),
            "n": str(rng.choice([12, 57, 130, 1204, 3500])),
            "d": str(rng.randrange(1, 30)),
        }
        r = rng.random()
        if r < 0.62:
            fill["p"], text_place = mention(rng, home)
            if rng.random() < 0.2:
                fill["p"] = "#" + fill["p"].replace(" ", "")
            text = rng.choice(TEXTS_WITH_PLACE).format(**fill)
        elif r < 0.8:
            fill["p"], text_place = mention(rng, home)
            fill["q"], _ = mention(rng, rng.choice(keys))
            text = rng.choice(TEXTS_WITH_TWO).format(**fill)
        else:
            text_place = None
            text = rng.choice(TEXTS_WITHOUT).format(**fill)

        gps = None
        r = rng.random()
        if i == 17:
            gps = (0.0, 0.0), None
        elif r < 0.42:
            dlat, dlon = rng.choice(offsets)
            _, _, _, _, _, lat, lon, _ = CITIES[home]
            gps = (round(lat + dlat, 4), round(lon + dlon, 4)), home
        elif r < 0.46:
            away = rng.choice(keys)
            _, _, _, _, _, lat, lon, _ = CITIES[away]
            gps = (lat, lon), away

        place = None
        r = rng.random()
        if i in (33, 141):
            place = ("Neverland, Nowhere", "GB" if i == 33 else "US")
        elif r < 0.3:
            place = place_tag(home)

        lang = rng.choices(["en", "es", "fr", "und", None], [80, 5, 5, 6, 4])[0]
        tid = 1234000000000000000 + 104729 * i
        tweet = {
            "created_at": created.strftime("%a %b %d %H:%M:%S +0000 %Y"),
            "id": tid,
            "id_str": str(tid),
        }
        style = i % 5
        if style == 0 and len(text) > 40:
            tweet["text"] = text[:40] + "… " + fill["url"]
            tweet["truncated"] = True
            tweet["extended_tweet"] = {"full_text": text}
        elif style in (1, 2):
            tweet["full_text"] = text
            tweet["truncated"] = False
        else:
            tweet["text"] = text
            tweet["truncated"] = False
        tweet["user"] = {
            "id": user["id"],
            "id_str": str(user["id"]),
            "screen_name": user["screen_name"],
            "location": user["location"],
            "verified": user["verified"],
        }
        if gps:
            (lat, lon), _ = gps
            tweet["geo"] = {"type": "Point", "coordinates": [lat, lon]}
            tweet["coordinates"] = {"type": "Point", "coordinates": [lon, lat]}
        else:
            tweet["geo"] = None
            tweet["coordinates"] = None
        tweet["place"] = {"full_name": place[0], "country_code": place[1], "place_type": "city"} if place else None
        if lang is not None:
            tweet["lang"] = lang
        tweets.append(tweet)
        labels.append({
            "tweet_id": str(tid),
            "home": home,
            "gps": gps[1] if gps else None,
            "profile_style": user["style"],
            "text_place": text_place,
        })
    return tweets, labels


def record_responses(tweets, gazetteer, stopwords):
    bodies = {}
    osm = iter(range(10000, 10**7, 7))
    for t in tweets:
        loc = t["user"]["location"]
        text = (t.get("extended_tweet") or {}).get("full_text") or t.get("full_text") or t.get("text")
        for field in (loc, text):
            if not field:
                continue
            for phrase, _ in oracle.survivors(field, gazetteer, stopwords):
                key = "search:" + phrase
                if key not in bodies:
                    bodies[key] = [search_result(k, next(osm)) for k in SEARCH.get(phrase, [])]
        if t["place"]:
            q = oracle.normalize(t["place"]["full_name"])
            home = next((k for k, _ in HOMES if place_tag(k)[0] == t["place"]["full_name"]), None)
            bodies["search:" + q] = [search_result(home, next(osm))] if home else []
        if t["coordinates"]:
            lon, lat = t["coordinates"]["coordinates"]
            key = "reverse:" + oracle.coord_key(lat) + "," + oracle.coord_key(lon)
            city = min((k for k, _ in HOMES), key=lambda k: (CITIES[k][5] - lat) ** 2 + (CITIES[k][6] - lon) ** 2)
            if lat == 0.0 and lon == 0.0:
                bodies[key] = {"error": "Unable to geocode"}
            else:
                bodies[key] = reverse_result(city, lat, lon, next(osm))
    # Lookups the library tests make that no fixture tweet triggers.
    bodies["search:zzqy1234"] = []
    bodies["reverse:48.8566,2.3522"] = reverse_result("paris", 48.8566, 2.3522, next(osm))
    return bodies


def write_jsonl(path, items):
    with open(path, "w", encoding="utf-8") as f:
        for item in items:
            f.write(json.dumps(item, ensure_ascii=False, separators=(",", ":")) + "\n")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--world-cities", required=True, type=Path)
    ap.add_argument("--out", default=Path("fixtures"), type=Path)
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    repo = Path(__file__).resolve().parents[2]

    build_gazetteer(args.world_cities, args.out / "gazetteer.csv")
    gazetteer = oracle.load_gazetteer(args.out / "gazetteer.csv")
    stopwords = oracle.load_stopwords(repo / "crates/core/data/stopwords_en.txt")

    rng = random.Random(SEED)
    users = make_users(rng)
    tweets, labels = make_tweets(rng, users)
    write_jsonl(args.out / "corpus.jsonl", tweets)
    write_jsonl(args.out / "labels.jsonl", labels)

    bodies = record_responses(tweets, gazetteer, stopwords)
    write_jsonl(
        args.out / "nominatim.jsonl",
        ({"key": k, "body": json.dumps(bodies[k], ensure_ascii=False)} for k in sorted(bodies)),
    )


if __name__ == "__main__":
    main()
