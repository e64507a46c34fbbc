#!/usr/bin/env python3
"""Regenerates fixtures/catalogue.csv and fixtures/schema.json.

The first rows are hand-written entries mirroring the documented API
examples; the remainder is synthetic but deterministic (fixed seed).
"""
import csv
import json
import random
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "fixtures"

SCHEMA = [
    ("Name", "text"),
    ("Year", "integer"),
    ("Unit", "text"),
    ("Dialect", "text"),
    ("Tasks", "text_list"),
    ("Access", "text"),
    ("License", "text"),
    ("Host", "text"),
    ("Domain", "text_list"),
    ("Form", "text"),
    ("Venue", "text"),
    ("Ethical Risks", "text"),
    ("Script", "text"),
    ("Description", "text"),
    ("Abstract", "text"),
    ("Link", "text"),
]

HAND_ROWS = [
    ["Arabic Gigaword", "2006", "tokens", "Modern Standard Arabic", "language modeling",
     "With-Fee", "LDC User Agreement", "LDC", "news articles", "text", "LDC", "Low", "Arab",
     "newswire text collected from several Arabic news agencies",
     "a large archive of newswire text data acquired from arabic news sources",
     "https://catalog.ldc.upenn.edu/LDC2006T02"],
    ["Shami", "2018", "sentences", "Levant", "dialect identification",
     "Free", "Apache-2.0", "GitHub", "social media", "text", "LREC", "Medium", "Arab",
     "levantine dialect corpus of sentences from four countries",
     "the first levantine dialect corpus covering syrian jordanian palestinian and lebanese",
     "https://github.com/GU-CLASP/shami-corpus"],
    ["LABR", "2018", "documents", "mixed", "sentiment analysis, review classification",
     "Free", "GPL-2.0", "GitHub", "reviews", "text", "ACL", "Low", "Arab",
     "large scale arabic book reviews with star ratings",
     "book reviews collected from goodreads for sentiment polarity and rating classification",
     "https://github.com/mohamedadaly/LABR"],
    ["ANERcorp", "2007", "tokens", "Modern Standard Arabic", "named entity recognition",
     "Free", "CC BY-SA 4.0", "other", "news articles", "text", "CICLing", "Low", "Arab",
     "named entity annotated news corpus",
     "a corpus of news articles annotated with person location and organization entities",
     "https://camel.abudhabi.nyu.edu/anercorp/"],
    ["Penn Arabic Treebank", "2004", "tokens", "Modern Standard Arabic",
     "part of speech tagging, morphological analysis",
     "With-Fee", "LDC User Agreement", "LDC", "news articles", "text", "LDC", "Low", "Arab",
     "syntactically annotated newswire treebank",
     "morphological and syntactic annotation of arabic newswire text",
     "https://catalog.ldc.upenn.edu/LDC2004T11"],
    ["Algerian Dialect Tweets", "2019", "sentences", "Algeria", "sentiment analysis",
     "Free", "unknown", "GitHub", "social media", "text", "WANLP", "High", "Arab-Latn",
     "tweets written in algerian dialect",
     "a collection of algerian dialect tweets labelled for sentiment",
     "https://example.org/algerian-tweets"],
    ["Gulf Speech", "2021", "hours", "Bahrain", "speech recognition",
     "Upon-Request", "CC BY-NC 4.0", "other", "transcribed audio", "spoken", "Interspeech", "Medium", "Arab",
     "conversational speech recordings from the gulf region",
     "transcribed conversational speech recorded in bahrain for automatic speech recognition",
     "https://example.org/gulf-speech"],
    ["MADAR", "2018", "sentences", "mixed", "dialect identification, machine translation",
     "Upon-Request", "custom", "other", "travel", "text", "LREC", "Low", "Arab",
     "parallel corpus of city dialects",
     "parallel sentences in twenty five city dialects for translation and identification",
     "https://camel.abudhabi.nyu.edu/madar/"],
]

UNITS = ["tokens", "sentences", "documents", "hours", "images"]
DIALECTS = ["Algeria", "Bahrain", "Egypt", "Iraq", "Jordan", "Kuwait", "Lebanon", "Libya",
            "Morocco", "Oman", "Palestine", "Qatar", "Saudi Arabia", "Sudan", "Syria",
            "Tunisia", "United Arab Emirates", "Yemen", "Modern Standard Arabic",
            "Classical Arabic", "mixed"]
ACCESS = ["Free", "Upon-Request", "With-Fee"]
LICENSES = ["Apache-2.0", "CC BY 4.0", "CC BY-NC 4.0", "CC BY-SA 4.0", "GPL-3.0", "MIT",
            "unknown", "custom"]
HOSTS = ["GitHub", "LDC", "ELRA", "HuggingFace", "Zenodo", "Kaggle", "other"]
FORMS = ["text", "spoken", "images"]
VENUES = ["ACL", "EMNLP", "LREC", "WANLP", "COLING", "Interspeech", "arXiv", "other"]
RISKS = ["Low", "Medium", "High"]
SCRIPTS = ["Arab", "Latn", "Arab-Latn"]
DOMAINS = ["social media", "news articles", "reviews", "books", "wikipedia", "transcribed audio",
           "web pages", "commentary", "other"]

TOPICS = {
    "sentiment": (["sentiment analysis", "emotion detection", "sarcasm detection"],
                  "opinion polarity positive negative review tweet emotion sentiment"),
    "speech": (["speech recognition", "speaker identification", "text to speech"],
               "audio recordings speech acoustic transcribed speaker hours broadcast"),
    "translation": (["machine translation", "transliteration", "dialect identification"],
                    "parallel bilingual translation english aligned sentences source target"),
    "syntax": (["part of speech tagging", "morphological analysis", "dependency parsing"],
               "treebank morphology syntax annotation tagging lemma parser tokens"),
    "ner": (["named entity recognition", "relation extraction", "information retrieval"],
            "entities persons locations organizations extraction annotated spans"),
    "qa": (["question answering", "reading comprehension", "text summarization"],
           "questions answers passages reading comprehension summaries articles"),
    "offensive": (["offensive language detection", "hate speech detection", "fake news detection"],
                  "offensive abusive hate toxic content moderation misinformation"),
    "ocr": (["optical character recognition", "handwriting recognition", "image captioning"],
            "scanned images handwritten manuscripts characters recognition pages"),
}


def maybe(rng, value, p=0.05):
    return "" if rng.random() < p else value


def synthetic_row(rng, i):
    topic = rng.choice(sorted(TOPICS))
    tasks, vocab = TOPICS[topic]
    words = vocab.split()
    n_tasks = rng.randint(1, 3)
    picked = rng.sample(tasks, n_tasks)
    desc = " ".join(rng.choice(words) for _ in range(8))
    abstract = " ".join(rng.choice(words) for _ in range(16))
    domain = rng.sample(DOMAINS, rng.randint(1, 2))
    form = "spoken" if topic == "speech" else ("images" if topic == "ocr" else "text")
    return [
        f"{topic.capitalize()}Set-{i:03d}",
        maybe(rng, str(rng.randint(2001, 2022))),
        maybe(rng, rng.choice(UNITS)),
        maybe(rng, rng.choice(DIALECTS)),
        maybe(rng, ", ".join(picked)),
        maybe(rng, rng.choice(ACCESS)),
        maybe(rng, rng.choice(LICENSES)),
        maybe(rng, rng.choice(HOSTS)),
        maybe(rng, ", ".join(domain)),
        form,
        maybe(rng, rng.choice(VENUES)),
        maybe(rng, rng.choice(RISKS)),
        maybe(rng, rng.choice(SCRIPTS)),
        maybe(rng, desc, 0.1),
        maybe(rng, abstract, 0.1),
        f"https://example.org/datasets/{i:03d}",
    ]


def main():
    OUT.mkdir(exist_ok=True)
    rng = random.Random(20221018)
    rows = list(HAND_ROWS)
    for i in range(len(rows), 500):
        rows.append(synthetic_row(rng, i))
    with open(OUT / "catalogue.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([name for name, _ in SCHEMA])
        w.writerows(rows)
    schema = {"features": [
        {"name": name, "kind": kind, **({"delimiter": ","} if kind == "text_list" else {})}
        for name, kind in SCHEMA
    ]}
    with open(OUT / "schema.json", "w", encoding="utf-8") as fh:
        json.dump(schema, fh, indent=2)
        fh.write("\n")


if __name__ == "__main__":
    main()
