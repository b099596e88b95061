#!/usr/bin/env python3
"""Writes sample_stats.csv: the stats table expected for data/sample_articles.jsonl
after stand-in annotation and filtering, computed without the C++ code."""

import json
import re
from pathlib import Path

LABELS = ["political", "gender", "entity", "racial", "religious", "regional", "sensational"]
MARKERS = ["partisan", "stereotypical", "disgraced", "foreigners", "heretics", "provincial", "shocking"]
DOMAINS = ["hollywood", "fashion", "finance", "religion", "politics", "sports"]

root = Path(__file__).resolve().parents[2]
rows = []
for line in (root / "data" / "sample_articles.jsonl").read_text(encoding="utf-8").splitlines():
    a = json.loads(line)
    words = set(re.findall(r"[a-z0-9]+", (a["title"] + " " + a["body"]).lower()))
    flags = [1 if m in words else 0 for m in MARKERS]
    if any(flags):
        rows.append((a["domain"], flags))

out = ["# biaslens stats seed=42", "kind,name,positive,negative,count", f"total,all,,,{len(rows)}"]
for d in DOMAINS:
    out.append(f"domain,{d},,,{sum(1 for dom, _ in rows if dom == d)}")
for i, name in enumerate(LABELS):
    pos = sum(f[i] for _, f in rows)
    out.append(f"label,{name},{pos},{len(rows) - pos},{len(rows)}")
Path(__file__).with_name("sample_stats.csv").write_text("\n".join(out) + "\n")
