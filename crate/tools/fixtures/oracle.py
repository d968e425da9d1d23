#!/usr/bin/env python3
"""Reference implementation of the resolve pipeline, used to compute the
golden record file for the fixture corpus.

Written from the method description alone; it shares data files with the
Rust implementation (gazetteer CSV, stop-word list, recorded responses) but
no code.

    python3 tools/fixtures/oracle.py fixtures/ > fixtures/golden_records.jsonl
"""

import csv
import json
import math
import sys
import unicodedata
from datetime import datetime, timezone
from pathlib import Path

NUMBER_CHARS = set("0123456789+-.,:/%")
GAZETTEER_COLUMNS = {"city", "accentcity", "city_ascii", "name", "asciiname", "ascii_name"}


def normalize(s):
    s = unicodedata.normalize("NFC", s)
    s = "".join(ch.lower() for ch in s)
    s = unicodedata.normalize("NFC", s)
    return " ".join(s.split())


# --- gazetteer and stop-words -------------------------------------------------

def load_gazetteer(path):
    names = set()
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader)
        cols = [i for i, h in enumerate(header) if h.strip().lower() in GAZETTEER_COLUMNS]
        for row in reader:
            for i in cols:
                if i < len(row):
                    n = normalize(row[i])
                    if n:
                        names.add(n)
    return names


def load_stopwords(path):
    words = set()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        w = normalize(line)
        if w:
            words.add(w)
    return words


# --- toponym extraction -------------------------------------------------------

def looks_like_url(tok):
    head = "".join(c.lower() if c.isascii() else c for c in tok[:8])
    return head.startswith(("http://", "https://", "www."))


def token_class(raw, unwrap_hashtags=True):
    """Returns a normalized word, or None for noise."""
    if looks_like_url(raw):
        return None
    start = 0
    while start < len(raw) and not (raw[start].isalnum() or raw[start] in "@#"):
        start += 1
    end = len(raw)
    while end > start and not raw[end - 1].isalnum():
        end -= 1
    tok = raw[start:end]
    if tok == "" or tok == "RT" or tok[0] == "@" or looks_like_url(tok):
        return None
    if tok[0] == "#":
        if not unwrap_hashtags:
            return None
        tok = tok[1:]
        i = 0
        while i < len(tok) and not tok[i].isalnum():
            i += 1
        tok = tok[i:]
    if tok == "":
        return None
    if any(c in "0123456789" for c in tok) and all(c in NUMBER_CHARS for c in tok):
        return None
    return normalize(tok)


def tokens(text):
    return [token_class(raw) for raw in text.split()]


def candidates(toks):
    """(phrase, position) in generation order: per position, uni-gram then bi-gram."""
    out = []
    for i, w in enumerate(toks):
        if w is None:
            continue
        out.append((w, i))
        if i + 1 < len(toks) and toks[i + 1] is not None:
            out.append((w + " " + toks[i + 1], i))
    return out


def survivors(text, gazetteer, stopwords):
    return [(p, i) for p, i in candidates(tokens(text)) if p not in stopwords and p in gazetteer]


# --- recorded geocoder --------------------------------------------------------

def load_fixtures(path):
    bodies = {}
    with open(path, encoding="utf-8") as f:
        for line in f:
            if line.strip():
                entry = json.loads(line)
                bodies[entry["key"]] = entry["body"]
    return bodies


def first_name(address, keys):
    for k in keys:
        v = address.get(k)
        if isinstance(v, str):
            n = normalize(v)
            if n:
                return n
    return None


def to_float(v):
    if isinstance(v, bool):
        return None
    if isinstance(v, (int, float)):
        return float(v)
    if isinstance(v, str):
        try:
            return float(v.strip())
        except ValueError:
            return None
    return None


def place_from_result(obj):
    address = obj.get("address")
    if not isinstance(address, dict):
        return None
    cc = address.get("country_code")
    cc = cc.strip().lower() if isinstance(cc, str) else None
    place = {
        "country_code": cc or None,
        "country": first_name(address, ["country"]),
        "state": first_name(address, ["state", "province", "region"]),
        "county": first_name(address, ["county", "district"]),
        "city": first_name(address, ["city", "town", "village", "municipality", "hamlet"]),
    }
    if not any(place.values()):
        return None
    imp = to_float(obj.get("importance"))
    if imp is not None and math.isfinite(imp):
        place["importance"] = min(1.0, max(0.0, imp))
    return place


class Geocoder:
    def __init__(self, bodies):
        self.bodies = bodies

    def search(self, query):
        """List of places, or None when the request fails."""
        q = normalize(query)
        if not q:
            return None
        body = self.bodies.get("search:" + q)
        if body is None:
            return None
        data = json.loads(body)
        return [p for p in (place_from_result(o) for o in data if isinstance(o, dict)) if p]

    def reverse(self, lat, lon):
        body = self.bodies.get("reverse:" + coord_key(lat) + "," + coord_key(lon))
        if body is None:
            return None
        data = json.loads(body)
        if "error" in data:
            return None
        return place_from_result(data)


def coord_key(v):
    scaled = v * 1e4
    r = math.copysign(math.floor(abs(scaled) + 0.5), scaled) / 1e4
    if r == 0:
        r = 0.0
    return "%.4f" % r


# --- voting ------------------------------------------------------------------

def vote(cands):
    """cands: list of (phrase, position, top_place). Brute force over countries."""
    def imp(c):
        return c[2].get("importance", float("-inf"))

    def rank(c):
        return (-imp(c), c[1])

    if not cands:
        return None
    countries = sorted({c[2]["country_code"] for c in cands if c[2].get("country_code")})
    if not countries:
        return min(enumerate(cands), key=lambda ic: (rank(ic[1]), ic[0]))[1][2]
    scored = []
    for cc in countries:
        members = [(k, c) for k, c in enumerate(cands) if c[2].get("country_code") == cc]
        _, best = min(members, key=lambda kc: (rank(kc[1]), kc[0]))
        scored.append((-len(members), rank(best), cc, best))
    scored.sort(key=lambda s: (s[0], s[1], s[2]))
    return scored[0][3][2]


def administrative(place):
    return {k: place[k] for k in ("country_code", "country", "state", "county", "city") if place.get(k)}


# --- tweets and records ------------------------------------------------------

def parse_time(s):
    try:
        return datetime.strptime(s, "%a %b %d %H:%M:%S %z %Y").astimezone(timezone.utc)
    except ValueError:
        pass
    return datetime.fromisoformat(s.replace("Z", "+00:00")).astimezone(timezone.utc)


def nonblank(s):
    return s if isinstance(s, str) and s.strip() else None


def read_tweet(obj):
    tweet_id = int(obj.get("id_str") or obj["id"])
    user = obj["user"]
    user_id = int(user.get("id_str") or user["id"])
    ext = obj.get("extended_tweet") or {}
    text = ext.get("full_text")
    for field in ("full_text", "text"):
        if text is None:
            text = obj.get(field)
    place = obj.get("place") or {}
    coords = None
    c = obj.get("coordinates")
    if isinstance(c, dict) and len(c.get("coordinates") or []) == 2:
        lon, lat = c["coordinates"]
        coords = (float(lat), float(lon))
    elif isinstance(obj.get("geo"), dict) and len(obj["geo"].get("coordinates") or []) == 2:
        coords = tuple(float(x) for x in obj["geo"]["coordinates"])
    if coords and not (-90 <= coords[0] <= 90 and -180 <= coords[1] <= 180):
        coords = None
    cc = nonblank(place.get("country_code"))
    return {
        "id": tweet_id,
        "user": user_id,
        "time": parse_time(obj["created_at"]),
        "text": text,
        "location": nonblank(user.get("location")),
        "place_name": nonblank(place.get("full_name")),
        "place_cc": cc.strip().lower() if cc else None,
        "coords": coords,
    }


def resolve_text(text, geocoder, gazetteer, stopwords):
    seen = set()
    cands = []
    for phrase, pos in survivors(text, gazetteer, stopwords):
        if phrase in seen:
            continue
        seen.add(phrase)
        results = geocoder.search(phrase)
        if results:
            cands.append((phrase, pos, results[0]))
    winner = vote(cands)
    mentions = []
    for phrase, _, top in cands:
        m = {"phrase": phrase}
        if top.get("country_code"):
            m["country_code"] = top["country_code"]
        mentions.append(m)
    return (administrative(winner) if winner else None), mentions


def resolve(tweet, geocoder, gazetteer, stopwords):
    rec = {
        "tweet_id": str(tweet["id"]),
        "user_id": str(tweet["user"]),
        "created_at": tweet["time"].strftime("%Y-%m-%dT%H:%M:%SZ"),
    }
    if tweet["coords"]:
        lat, lon = tweet["coords"]
        p = geocoder.reverse(lat, lon)
        if p:
            geo = administrative(p)
            geo["lat"] = lat
            geo["lon"] = lon
            rec["geo"] = geo
    if tweet["place_name"]:
        results = geocoder.search(tweet["place_name"])
        if results:
            rec["place"] = administrative(results[0])
        elif results is not None and tweet["place_cc"]:
            rec["place"] = {"country_code": tweet["place_cc"]}
    if tweet["location"]:
        p, _ = resolve_text(tweet["location"], geocoder, gazetteer, stopwords)
        if p:
            rec["user_location"] = p
    p, mentions = resolve_text(tweet["text"], geocoder, gazetteer, stopwords)
    if p:
        rec["tweet_locations"] = p
    if mentions:
        rec["mentioned_toponyms"] = mentions
    return rec


def main():
    root = Path(sys.argv[1] if len(sys.argv) > 1 else "fixtures")
    repo = Path(__file__).resolve().parents[2]
    gazetteer = load_gazetteer(root / "gazetteer.csv")
    stopwords = load_stopwords(repo / "crates/core/data/stopwords_en.txt")
    geocoder = Geocoder(load_fixtures(root / "nominatim.jsonl"))
    out = sys.stdout
    with open(root / "corpus.jsonl", encoding="utf-8") as f:
        for line in f:
            if not line.strip():
                continue
            rec = resolve(read_tweet(json.loads(line)), geocoder, gazetteer, stopwords)
            out.write(json.dumps(rec, ensure_ascii=False, separators=(",", ":")) + "\n")


if __name__ == "__main__":
    main()
