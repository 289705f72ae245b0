"""Generates the 50-story toy corpus (25 scary, 25 baseline) used by the
lexicon golden test. Deterministic: re-running reproduces the same files."""

import json
import random
import sys
from pathlib import Path

SHARED = ["night", "house", "door", "light", "room", "street", "friend", "window",
          "morning", "car", "phone", "dog", "sound", "voice", "floor", "table"]
SCARY = ["blood", "scream", "shadow", "ghost", "whisper", "dead", "knife", "basement"]
CALM = ["garden", "coffee", "recipe", "holiday", "sunshine", "picnic", "music", "beach"]
FILLER = ["the", "and", "was", "i", "it", "of", "to", "my", "we", "then"]
EXTRAS = ["#EndThisTyranny", "camelCase", "HTTPServer", "don't", "42", "e-mail", "naïve"]


def sentence(rng, vocab, spice, leak):
    words = []
    for _ in range(rng.randint(4, 12)):
        r = rng.random()
        if r < 0.3:
            words.append(rng.choice(FILLER))
        elif r < 0.45:
            words.append(rng.choice(spice))
        elif r < 0.5:
            words.append(rng.choice(leak))
        else:
            words.append(rng.choice(vocab))
    if rng.random() < 0.2:
        words.append(rng.choice(EXTRAS))
    if rng.random() < 0.3:
        words[0] = words[0].capitalize()
    return " ".join(words) + rng.choice([".", "!", "?", ".\n", ", "])


def story(rng, idx, genre):
    spice, leak = (SCARY, CALM) if genre == "scary" else (CALM, SCARY)
    body = " ".join(sentence(rng, SHARED, spice, leak) for _ in range(rng.randint(3, 9)))
    return {
        "id": f"{genre[0]}{idx:02d}",
        "created_utc": 1_400_000_000 + rng.randint(0, 200_000_000),
        "subreddit": "nosleep" if genre == "scary" else rng.choice(["tifu", "CasualConversation"]),
        "title": sentence(rng, SHARED, spice, leak).rstrip(".!?,\n "),
        "selftext": body,
    }


def main(out):
    rng = random.Random(20240501)
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    for genre in ["scary", "baseline"]:
        with open(out / f"{genre}.jsonl", "w", encoding="utf-8") as f:
            for i in range(25):
                f.write(json.dumps(story(rng, i, genre), ensure_ascii=False) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "crates/cli/tests/fixtures/toy")
