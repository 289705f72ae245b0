"""Generates the end-to-end synthetic corpus: 200 scary stories and 100
baseline stories, each well over 500 tokens after cleaning. Most scary
stories concentrate their scary words in one short burst at a random point;
the rest follow a smooth arc. Deterministic: re-running reproduces the same
files."""

import json
import math
import random
import sys
from pathlib import Path

NEUTRAL = """house door room street car phone window table kitchen chair road town
morning evening friend brother sister mother father neighbor dog cat garden
office school work dinner coffee water light floor wall stairs hallway yard
walked looked opened closed turned waited called drove sat stood heard saw
quiet small old long cold warm little empty bright early late slowly""".split()
SCARY = """blood scream shadow ghost whisper dead corpse knife basement attic
darkness terror screaming crawling rotting figure teeth claws dread trembling
silhouette footsteps scratching howling grave coffin skull demon possessed""".split()
CALM = """sunshine picnic holiday recipe music beach laughter birthday vacation
cookies concert puppy festival smile garden wedding painting breakfast""".split()
DISEASE = ["virus", "lockdown", "infected", "disease", "quarantine", "pandemic"]
FILLER = ["the", "and", "was", "i", "it", "of", "to", "my", "we", "then", "a", "in"]

ARCS = {
    "rising": lambda x: x,
    "falling": lambda x: 1 - x,
    "peak": lambda x: math.sin(math.pi * x),
    "valley": lambda x: 1 - math.sin(math.pi * x),
    "flat": lambda x: 0.5,
    "late_spike": lambda x: x ** 4,
}


def sentence(rng, p_scary, p_calm, p_disease):
    words = []
    for _ in range(rng.randint(6, 14)):
        r = rng.random()
        if r < 0.25:
            words.append(rng.choice(FILLER))
        elif r < 0.25 + p_disease:
            words.append(rng.choice(DISEASE))
        elif rng.random() < p_scary:
            words.append(rng.choice(SCARY))
        elif rng.random() < p_calm:
            words.append(rng.choice(CALM))
        else:
            words.append(rng.choice(NEUTRAL))
    words[0] = words[0].capitalize()
    return " ".join(words) + rng.choice([".", ".", "!", "?"])


def timestamp(rng, year):
    start = (year - 1970) * 365.25 * 86400
    return int(start + rng.randint(0, 364) * 86400 + rng.randint(0, 86399))


def burst(at, width=0.09):
    return lambda x: 1.0 if at <= x < at + width else 0.0


def story(rng, sid, genre):
    year = rng.randint(2010, 2021)
    p_disease = 0.02 if year >= 2020 and rng.random() < 0.5 else 0.0
    if genre != "scary":
        arc = lambda x: 0.0
    elif rng.random() < 0.7:
        arc = burst(rng.randrange(10) / 10)
    else:
        arc = ARCS[rng.choice(sorted(ARCS))]
    n_sentences = rng.randint(75, 95)
    parts = []
    for i in range(n_sentences):
        x = i / (n_sentences - 1)
        if genre == "scary":
            p_scary, p_calm = 0.02 + 0.9 * arc(x), 0.3 * (1 - arc(x))
        else:
            p_scary, p_calm = 0.005, 0.3
        parts.append(sentence(rng, p_scary, p_calm, p_disease))
    return {
        "id": sid,
        "created_utc": timestamp(rng, year),
        "subreddit": "nosleep" if genre == "scary" else rng.choice(["tifu", "CasualConversation", "self"]),
        "title": sentence(rng, 0.3 if genre == "scary" else 0.02, 0.05, 0.0).rstrip(".!?"),
        "selftext": " ".join(parts),
    }


def main(out):
    rng = random.Random(1729)
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    for genre, n in [("scary", 200), ("baseline", 100)]:
        with open(out / f"{genre}.jsonl", "w", encoding="utf-8") as f:
            for i in range(n):
                f.write(json.dumps(story(rng, f"{genre[0]}{i:03d}", genre)) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "crates/cli/tests/fixtures/synthetic")
