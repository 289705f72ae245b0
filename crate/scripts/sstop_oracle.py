"""Brute-force SSToP lexicon for a pair of JSON Lines corpora.

Independent of the Rust code: re-implements cleaning with regular
expressions, recounts every word by scanning every story, and writes the
lexicon CSV (`word,count_scary,count_baseline,score`, `%.17g` scores,
descending score then word).

usage: sstop_oracle.py SCARY.jsonl BASELINE.jsonl STOPWORDS.txt MIN_OCC MIN_TOKENS > lexicon.csv
"""

import json
import re
import sys


def load_stopwords(path):
    words = set()
    for line in open(path, encoding="utf-8"):
        line = line.strip()
        if line and not line.startswith("#"):
            words.add(line.lower())
    return words


def camel_pieces(word):
    pieces, start = [], 0
    for i in range(1, len(word)):
        c = word[i]
        if not c.isupper():
            continue
        after_lower = word[i - 1].islower()
        before_lower = i + 1 < len(word) and word[i + 1].islower()
        if after_lower or before_lower:
            pieces.append(word[start:i])
            start = i
    pieces.append(word[start:])
    return [p for p in pieces if p]


def clean(text, stop):
    tokens = []
    for segment in re.split(r"[.!?\n]", text):
        for word in re.sub(r"[^A-Za-z]", " ", segment).split():
            for piece in camel_pieces(word):
                low = piece.lower()
                if low not in stop:
                    tokens.append(low)
    return tokens


def load(path, stop, min_tokens):
    docs = []
    for line in open(path, encoding="utf-8"):
        if not line.strip():
            continue
        rec = json.loads(line)
        if rec["selftext"].strip() in ("", "[removed]", "[deleted]"):
            continue
        toks = clean(rec["title"] + " " + rec["selftext"], stop)
        if len(toks) >= min_tokens:
            docs.append(toks)
    return docs


def count(word, docs):
    return sum(1 for d in docs for t in d if t == word)


def score(cs, ts, cb, tb):
    num, den = cs * tb, cb * ts
    # Exact integer cross products; below one, the reciprocal of the swapped
    # ratio so that exchanging genres inverts scores exactly.
    if num >= den:
        return num / den
    return 1.0 / (den / num)


def main():
    scary_path, base_path, stop_path, min_occ, min_tokens = sys.argv[1:6]
    stop = load_stopwords(stop_path)
    scary = load(scary_path, stop, int(min_tokens))
    base = load(base_path, stop, int(min_tokens))
    ts = sum(len(d) for d in scary)
    tb = sum(len(d) for d in base)
    vocab = sorted({t for d in scary + base for t in d})
    rows = []
    for w in vocab:
        cs, cb = count(w, scary), count(w, base)
        if cs == 0 or cb == 0 or cs + cb < int(min_occ):
            continue
        rows.append((w, cs, cb, score(cs, ts, cb, tb)))
    rows.sort(key=lambda r: (-r[3], r[0]))
    out = sys.stdout
    out.write("word,count_scary,count_baseline,score\n")
    for w, cs, cb, s in rows:
        out.write("%s,%d,%d,%.17g\n" % (w, cs, cb, s))


if __name__ == "__main__":
    main()
