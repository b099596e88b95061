#!/usr/bin/env python3
"""Regenerates data/sample_articles.jsonl, the synthetic 50-article corpus.

Each bias is signalled by one marker word (see include/biaslens/standin.hpp),
so the stand-in endpoint labels the corpus deterministically. Five articles
carry no marker and are removed by the filter stage. Every other article
carries exactly one bias so that stratified folds keep each label's
vocabulary separate from the others.
"""

import json
import random
from pathlib import Path

SEED = 7
N_ARTICLES = 50
N_UNBIASED = 5
MIN_POSITIVES = 6

DOMAINS = ["hollywood", "fashion", "finance", "religion", "politics", "sports"]

NEUTRAL = {
    "hollywood": [
        "The studio confirmed the release date for the sequel this week.",
        "Filming took place over four months in three countries.",
        "The director thanked the crew during the premiere screening.",
        "Box office receipts rose modestly over the holiday weekend.",
        "Casting for the supporting roles is expected to finish soon.",
    ],
    "fashion": [
        "The autumn collection opened the week with tailored coats.",
        "Designers showed muted colours and recycled fabrics on the runway.",
        "Retail buyers placed early orders for the spring line.",
        "The label plans to open two boutiques next year.",
        "Models walked the show in a converted warehouse downtown.",
    ],
    "finance": [
        "The central bank left interest rates unchanged on Thursday.",
        "Quarterly earnings beat analyst estimates by a small margin.",
        "Bond yields edged lower as investors awaited inflation data.",
        "The company reported steady revenue growth across its divisions.",
        "Trading volumes were thin ahead of the long weekend.",
    ],
    "religion": [
        "Pilgrims gathered at the temple for the annual festival.",
        "The diocese announced restoration work on the old cathedral.",
        "Volunteers served meals at the community hall after prayers.",
        "Leaders of several congregations met to plan a charity drive.",
        "The festival calendar was published by the council on Monday.",
    ],
    "politics": [
        "The assembly debated the budget bill late into the evening.",
        "Ministers met regional officials to discuss road funding.",
        "The committee will publish its report next month.",
        "Voters in the district head to the polls in November.",
        "The governor signed three bills into law on Friday.",
    ],
    "sports": [
        "The team secured a narrow win in the final minutes.",
        "The coach praised the defence after the match.",
        "Ticket sales for the playoffs opened on Wednesday.",
        "The league confirmed the schedule for next season.",
        "The striker returned to training after a minor injury.",
    ],
}

# One list per bias, each sentence containing the marker word once.
BIASED = [
    [
        "Critics dismissed the partisan plan as a gift to party donors.",
        "The article framed the vote as a partisan betrayal of ordinary people.",
        "Commentators praised only one side in a partisan tone throughout.",
    ],
    [
        "The report lingered on her outfit in a stereotypical aside.",
        "Coverage cast the women in stereotypical roles as mere supporters.",
        "One columnist offered stereotypical remarks about working mothers.",
    ],
    [
        "The writer called the disgraced executive a fraud without evidence.",
        "A disgraced founder was blamed for every problem in the firm.",
        "The piece mocked the disgraced chairman at every opportunity.",
    ],
    [
        "The author blamed foreigners for the neighbourhood's troubles.",
        "Residents were quoted saying foreigners should not be trusted.",
        "The story suggested foreigners brought the decline with them.",
    ],
    [
        "The column described the minority faith as heretics to be feared.",
        "Followers were labelled heretics in the opening paragraph.",
        "The editorial called the visiting preachers dangerous heretics.",
    ],
    [
        "The report sneered at provincial fans as backward and loud.",
        "Viewers from the north were called provincial and unsophisticated.",
        "The piece treated the provincial town as unworthy of attention.",
    ],
    [
        "A shocking headline promised scandal that the text never showed.",
        "The story opened with a shocking claim of total collapse.",
        "Readers were warned of shocking revelations that never arrived.",
    ],
]

TITLE_WORDS = {
    "hollywood": "Studio",
    "fashion": "Runway",
    "finance": "Markets",
    "religion": "Faith",
    "politics": "Assembly",
    "sports": "League",
}


def draw_labels(rng):
    unbiased = set(rng.sample(range(N_ARTICLES), N_UNBIASED))
    rows = []
    for i in range(N_ARTICLES):
        if i in unbiased:
            rows.append([0] * 7)
            continue
        chosen = rng.randrange(7)
        rows.append([1 if l == chosen else 0 for l in range(7)])
    return rows


def main():
    rng = random.Random(SEED)
    while True:
        rows = draw_labels(rng)
        if all(sum(r[l] for r in rows) >= MIN_POSITIVES for l in range(7)):
            break

    lines = []
    for i, row in enumerate(rows):
        domain = DOMAINS[i % len(DOMAINS)]
        sentences = rng.sample(NEUTRAL[domain], 2)
        for label, flag in enumerate(row):
            if flag:
                sentences += BIASED[label]
        rng.shuffle(sentences)
        article = {
            "id": f"sample-{i + 1:03d}",
            "domain": domain,
            "title": f"{TITLE_WORDS[domain]} update {i + 1}",
            "body": " ".join(sentences),
            "source": "synthetic",
        }
        lines.append(json.dumps(article, ensure_ascii=False))

    out = Path(__file__).with_name("sample_articles.jsonl")
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
