"""Regenerates scorer_oracle.jsonl.

Valence: the reference rule-based scorer (pip package vaderSentiment==3.3.2),
loaded with the bundled valence lexicon. Its booster/negator/idiom tables
are the same lists shipped in data/lexicon/. Compound scores are captured
unrounded.

Polarity: a standalone re-implementation of the mean-polarity rule (regex
tokenizer, negator within two preceding tokens multiplies by -0.5).

Usage: python3 capture_scorer_oracle.py > scorer_oracle.jsonl
"""
import json
import os
import re
import sys
import tempfile

from vaderSentiment import vaderSentiment as V

HERE = os.path.dirname(os.path.abspath(__file__))
LEX = os.path.join(HERE, "..", "..", "data", "lexicon")

# Keep full precision in the reported compound.
V.round = lambda x, n=None: x


def data_lines(path):
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.rstrip("\n")
            if line.strip() and not line.lstrip().startswith("#"):
                yield line


def valence_analyzer():
    tmp = tempfile.NamedTemporaryFile("w", suffix=".txt", delete=False, encoding="utf-8")
    for line in data_lines(os.path.join(LEX, "valence.tsv")):
        tmp.write(line + "\n")
    tmp.close()
    boosters = {}
    for line in data_lines(os.path.join(LEX, "boosters.tsv")):
        term, inc = line.split("\t")[:2]
        boosters[term] = float(inc)
    assert boosters == V.BOOSTER_DICT, "bundled boosters drifted from the reference table"
    negators = set(data_lines(os.path.join(LEX, "negators.txt")))
    assert negators == set(V.NEGATE), "bundled negators drifted from the reference list"
    return V.SentimentIntensityAnalyzer(lexicon_file=tmp.name)


def polarity_reference():
    entries = {}
    for line in data_lines(os.path.join(LEX, "polarity.tsv")):
        term, p = line.split("\t")[:2]
        entries[term.lower()] = float(p)
    negators = {l.strip().lower() for l in data_lines(os.path.join(LEX, "polarity_negators.txt"))}

    def score(text):
        tokens = re.findall(r"(?:[^\W_]|')+", text.lower())
        vals = []
        for i, tok in enumerate(tokens):
            if tok not in entries:
                continue
            p = entries[tok]
            if any(t in negators for t in tokens[max(0, i - 2):i]):
                p *= -0.5
            vals.append(p)
        return sum(vals) / len(vals) if vals else 0.0

    return score


def main():
    analyzer = valence_analyzer()
    polarity = polarity_reference()
    with open(os.path.join(HERE, "scorer_texts.txt"), encoding="utf-8") as f:
        texts = [l.rstrip("\n") for l in f if l.strip() and not l.startswith("#")]
    for text in texts:
        row = {
            "text": text,
            "valence": analyzer.polarity_scores(text)["compound"],
            "polarity": polarity(text),
        }
        sys.stdout.write(json.dumps(row, ensure_ascii=False) + "\n")


if __name__ == "__main__":
    main()
