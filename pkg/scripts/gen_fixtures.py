#!/usr/bin/env python3
"""Regenerate the bundled fixture data (corpus.jsonl, hdx_slice.jsonl).

Synthetic but shaped like real humanitarian-data catalog metadata. Fully
seeded; rerunning produces identical bytes. Two records mirror real
public dataset metadata used as worked material in the test suite (the
Canadian precipitation summaries and Japan - Social Development).
"""

from __future__ import annotations

import json
import random
from pathlib import Path

OUT_DIR = Path(__file__).resolve().parent.parent / "src" / "datascout" / "fixtures"

CATEGORIES = {
    "education": "edu",
    "economics": "econ",
    "health": "health",
    "facilities and infrastructure": "infra",
    "weather and climate": "weather",
}

COUNTRIES = [
    "Kenya", "Nepal", "Colombia", "Jordan", "Mali", "Bangladesh", "Peru",
    "Uganda", "Laos", "Georgia", "Senegal", "Bolivia", "Moldova", "Chad",
    "Fiji", "Ghana", "Tunisia", "Honduras", "Mongolia", "Zambia",
]

COMMON_VARIABLES = [
    "country", "iso3", "year", "date", "value", "indicator", "indicator name",
    "indicator code", "region", "latitude", "longitude", "month", "source",
    "unit", "status", "population", "admin1", "location code", "reference period",
]

CATEGORY_VARIABLES = {
    "education": ["school name", "enrollment", "teachers", "grade level",
                  "literacy rate", "attendance", "dropout rate", "classrooms"],
    "economics": ["gdp", "inflation rate", "exchange rate", "exports",
                  "imports", "employment", "sector", "currency"],
    "health": ["facility name", "cases", "deaths", "vaccinated",
               "disease", "age group", "sex", "hospital beds"],
    "facilities and infrastructure": ["facility type", "road length", "capacity",
                                      "operator", "surface type", "power supply",
                                      "water source", "condition"],
    "weather and climate": ["station", "precipitation", "temperature",
                            "wind speed", "humidity", "datatype", "elevation",
                            "observation time"],
}

NEUTRAL_TAGS = [
    "hxl", "indicators", "survey data", "time series", "baseline",
    "administrative boundaries", "annual reporting", "geodata",
]

NAME_PATTERNS = [
    "{country} - {topic} Indicators",
    "{topic} Survey Results for {country}",
    "Monthly {topic} Reports for {country}",
    "{topic} Assessment Data in {country}",
    "{country} National {topic} Registry",
    "Subnational {topic} Figures for {country}",
]

TOPICS = {
    "education": ["School Enrollment", "Learning Outcomes", "Teacher Deployment",
                  "Education Facilities", "Literacy"],
    "economics": ["Market Prices", "Household Income", "Trade Balance",
                  "Economic Activity", "Employment"],
    "health": ["Disease Surveillance", "Health Facility", "Immunization",
               "Nutrition", "Maternal Health"],
    "facilities and infrastructure": ["Road Network", "Water Points",
                                      "Power Grid", "Public Buildings", "Bridges"],
    "weather and climate": ["Rainfall", "Temperature Anomaly", "Storm Tracking",
                            "Drought Monitoring", "Flood Risk"],
}

SUMMARY_TEMPLATES = [
    "This dataset contains {what} collected across {country}. Records are compiled "
    "from field reports and updated {cadence}. Coverage includes subnational "
    "administrative levels where available.",
    "{what} for {country}, aggregated by reporting partners. The data supports "
    "operational planning and is refreshed {cadence}.",
    "Compiled {what} covering {country}. Values are standardized to shared code "
    "lists and exchanged in tabular form; the series is updated {cadence}.",
]

CADENCES = ["monthly", "quarterly", "annually", "weekly"]

# Real public metadata analogues used as worked material by the tests.
PINNED = [
    {
        "id": "weather-01",
        "name": "Daily Summaries of Precipitation Indicators for Canada",
        "summary": "This dataset contains the daily summaries on base stations "
                   "across Canada. Indicators include total precipitation, maximum "
                   "snow depth, total snow fall, and extreme maximum daily "
                   "precipitation for the latest five years of available data.",
        "variables": ["indicator", "value", "station", "fl_cmiss", "date",
                      "fl_miss", "datatype", "country"],
        "tags": ["el nino", "rainfall - precipitation", "weather and climate"],
        "_category": "weather and climate",
    },
    {
        "id": "econ-01",
        "name": "Japan - Social Development",
        "summary": "Social development indicators for Japan drawn from national "
                   "statistics: demographic structure, labor participation, and "
                   "income distribution series with standard country codes.",
        "variables": ["value", "indicator name", "country iso3", "year",
                      "indicator code", "country name"],
        "tags": ["economics", "indicators", "socioeconomics"],
        "_category": "economics",
    },
]


def gen_record(rng: random.Random, category: str, slug: str, idx: int,
               allow_cross_tags: bool) -> dict:
    topic = rng.choice(TOPICS[category])
    country = rng.choice(COUNTRIES)
    pattern = rng.choice(NAME_PATTERNS)
    name = pattern.format(country=country, topic=topic)
    what = f"{topic.lower()} figures"
    summary = rng.choice(SUMMARY_TEMPLATES).format(
        what=what, country=country, cadence=rng.choice(CADENCES)
    )
    n_common = rng.randint(2, 5)
    n_specific = rng.randint(2, 4)
    variables = rng.sample(COMMON_VARIABLES, n_common) + rng.sample(
        CATEGORY_VARIABLES[category], n_specific
    )
    rng.shuffle(variables)
    tags = [category] + rng.sample(NEUTRAL_TAGS, rng.randint(1, 2))
    if allow_cross_tags and rng.random() < 0.4:
        other = rng.choice([c for c in CATEGORIES if c != category])
        tags.append(other)
    return {
        "id": f"{slug}-{idx:02d}",
        "name": name,
        "summary": summary,
        "variables": variables,
        "tags": tags,
    }


def gen_corpus() -> list[dict]:
    rng = random.Random(20240601)
    records: list[dict] = []
    pinned_by_cat = {}
    for rec in PINNED:
        pinned_by_cat.setdefault(rec["_category"], []).append(
            {k: v for k, v in rec.items() if not k.startswith("_")}
        )
    seen_names: set[str] = set()
    for category, slug in CATEGORIES.items():
        cat_records: list[dict] = list(pinned_by_cat.get(category, []))
        idx = len(cat_records) + 1
        while len(cat_records) < 10:
            # first five per category stay free of cross-category tags so
            # sample selection always finds eligible records
            rec = gen_record(rng, category, slug, idx, allow_cross_tags=len(cat_records) >= 5)
            if rec["name"] in seen_names:
                continue
            seen_names.add(rec["name"])
            cat_records.append(rec)
            idx += 1
        records.extend(cat_records)
    return records


def gen_hdx_slice() -> list[dict]:
    rng = random.Random(77001)
    records: list[dict] = []
    seen_names: set[str] = set()
    i = 0
    for category, slug in CATEGORIES.items():
        count = 0
        while count < 20:
            rec = gen_record(rng, category, slug, 0, allow_cross_tags=count >= 6)
            if rec["name"] in seen_names:
                continue
            seen_names.add(rec["name"])
            i += 1
            count += 1
            records.append({
                "id": f"hdx-{i:03d}",
                "name": rec["name"].lower().replace(" ", "-"),
                "title": rec["name"],
                "notes": rec["summary"],
                "tags": [{"name": t} for t in rec["tags"]],
                "resources": [
                    {"name": "data.csv", "format": "CSV",
                     "fields": [{"name": v} for v in rec["variables"]]}
                ],
                "url": f"https://example.org/dataset/hdx-{i:03d}",
            })
    return records


def write_jsonl(path: Path, records: list[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fp:
        for rec in records:
            fp.write(json.dumps(rec) + "\n")
    print(f"wrote {len(records)} records to {path}")


if __name__ == "__main__":
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    write_jsonl(OUT_DIR / "corpus.jsonl", gen_corpus())
    write_jsonl(OUT_DIR / "hdx_slice.jsonl", gen_hdx_slice())
