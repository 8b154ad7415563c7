#!/usr/bin/env python3
"""Generate the bundled English->Finnish-like synthetic bitext.

Writes <split>.<lang> (words) and <split>.seg.<lang> (tagged morphemes) for
the train/dev/test splits. Output is fully determined by --seed.
"""

import argparse
import os
import random

NOUNS = [
    ("dog", "koira"), ("house", "talo"), ("cat", "kissa"), ("car", "auto"),
    ("book", "kirja"), ("friend", "ystävä"), ("tree", "puu"), ("bird", "lintu"),
    ("boat", "vene"), ("table", "pöytä"), ("word", "sana"), ("village", "kylä"),
    ("road", "tie"), ("fish", "kala"), ("school", "koulu"), ("garden", "puutarha"),
]

# (english, finnish, english negation allowed)
ADJECTIVES = [
    ("big", "iso", False), ("old", "vanha", False), ("young", "nuori", False),
    ("good", "hyvä", False), ("bad", "huono", False), ("happy", "onnellise", True),
    ("kind", "kiltti", True), ("democratic", "demokraattise", True), ("clean", "puhdas", True),
]

VERBS = [
    ("walk", "kävele"), ("talk", "puhu"), ("look", "katso"), ("help", "auta"),
    ("open", "avaa"), ("call", "soita"), ("jump", "hyppää"), ("play", "pelaa"),
    ("kick", "potkaise"), ("visit", "tapaa"), ("paint", "maalaa"), ("clean", "siivoa"),
]
TRANSITIVE = {"look", "help", "open", "call", "kick", "visit", "paint", "clean"}

# person -> (english pronoun, finnish pronoun or None when dropped, finnish ending)
PERSONS = {
    "1sg": ("I", None, "n"),
    "2sg": ("you", None, "t"),
    "3sg": ("he", "hän", None),
    "1pl": ("we", None, "mme"),
    "3pl": ("they", "he", "vat"),
}

CASES = {"in": "ssa", "to": "lle", "from": "sta"}


def tok(surface, tag, cont):
    return f"{surface}/{tag}{'+' if cont else ''}"


def word(*parts):
    """parts: (surface, tag). Returns (word, segmented tokens)."""
    surf = "".join(p[0] for p in parts)
    toks = [tok(s, t, i + 1 < len(parts)) for i, (s, t) in enumerate(parts)]
    return surf, toks


class Side:
    def __init__(self):
        self.words = []
        self.seg = []

    def add(self, *parts):
        w, t = word(*parts)
        self.words.append(w)
        self.seg.extend(t)


def en_adjective(side, adj, negated):
    if negated:
        side.add(("un", "PRE"), (adj[0], "STM"))
    else:
        side.add((adj[0], "STM"))


def fi_adjective(side, adj, negated, suffixes):
    parts = ([("epä", "PRE")] if negated else []) + [(adj[1], "STM")] + [(s, "SUF") for s in suffixes]
    side.add(*parts)


def noun_phrase(rng, en, fi, plural, fi_suffixes, article=True):
    noun = rng.choice(NOUNS)
    adj = rng.choice(ADJECTIVES) if rng.random() < 0.5 else None
    negated = adj is not None and adj[2] and rng.random() < 0.4
    if article:
        en.add(("the", "STM"))
    if adj:
        en_adjective(en, adj, negated)
    if plural:
        en.add((noun[0], "STM"), ("s", "SUF"))
    else:
        en.add((noun[0], "STM"))
    if adj:
        fi_adjective(fi, adj, negated, fi_suffixes)
    fi.add((noun[1], "STM"), *[(s, "SUF") for s in fi_suffixes])


def subject(rng, en, fi):
    """Returns the person key governing verb agreement."""
    if rng.random() < 0.45:
        person = rng.choice(sorted(PERSONS))
        en_pron, fi_pron, _ = PERSONS[person]
        en.add((en_pron, "STM"))
        if fi_pron:
            fi.add((fi_pron, "STM"))
        return person
    plural = rng.random() < 0.4
    noun_phrase(rng, en, fi, plural, ["t"] if plural else [])
    return "3pl" if plural else "3sg"


def verb(rng, en, fi, person, past, transitive):
    pool = [v for v in VERBS if (v[0] in TRANSITIVE) == transitive]
    v = rng.choice(pool)
    if past:
        en.add((v[0], "STM"), ("ed", "SUF"))
    elif person == "3sg":
        en.add((v[0], "STM"), ("s", "SUF"))
    else:
        en.add((v[0], "STM"))
    ending = PERSONS[person][2]
    fi_parts = [(v[1], "STM")]
    if past:
        fi_parts.append(("i", "SUF"))
    if ending:
        fi_parts.append((ending, "SUF"))
    fi.add(*fi_parts)


def sentence(rng):
    en, fi = Side(), Side()
    kind = rng.random()
    if kind < 0.15:
        # there is a N in the N  ->  N-ssa on N
        place_en, place_fi = Side(), Side()
        plural = rng.random() < 0.3
        noun_phrase(rng, place_en, place_fi, plural, ["i", "ssa"] if plural else ["ssa"])
        thing_en, thing_fi = Side(), Side()
        noun_phrase(rng, thing_en, thing_fi, False, [], article=False)
        en.add(("there", "STM"))
        en.add(("is", "STM"))
        en.add(("a", "STM"))
        en.words += thing_en.words
        en.seg += thing_en.seg
        en.add(("in", "STM"))
        en.words += place_en.words
        en.seg += place_en.seg
        fi.words += place_fi.words
        fi.seg += place_fi.seg
        fi.add(("on", "STM"))
        fi.words += thing_fi.words
        fi.seg += thing_fi.seg
        return en, fi
    person = subject(rng, en, fi)
    past = rng.random() < 0.4
    transitive = rng.random() < 0.6
    verb(rng, en, fi, person, past, transitive)
    if transitive:
        plural = rng.random() < 0.3
        noun_phrase(rng, en, fi, plural, ["i", "a"] if plural else ["a"])
    if rng.random() < 0.6:
        prep = rng.choice(sorted(CASES))
        en.add((prep, "STM"))
        plural = rng.random() < 0.3
        noun_phrase(rng, en, fi, plural, (["i"] if plural else []) + [CASES[prep]])
    return en, fi


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=os.path.join(os.path.dirname(__file__), "..", "data", "synthetic"))
    ap.add_argument("--seed", type=int, default=20100)
    ap.add_argument("--train", type=int, default=400)
    ap.add_argument("--dev", type=int, default=50)
    ap.add_argument("--test", type=int, default=50)
    args = ap.parse_args()

    rng = random.Random(args.seed)
    total = args.train + args.dev + args.test
    seen = set()
    pairs = []
    while len(pairs) < total:
        en, fi = sentence(rng)
        key = " ".join(en.words)
        if key in seen:
            continue
        seen.add(key)
        pairs.append((en, fi))

    os.makedirs(args.out, exist_ok=True)
    splits = [("train", 0, args.train), ("dev", args.train, args.train + args.dev),
              ("test", args.train + args.dev, total)]
    for name, lo, hi in splits:
        for lang, idx in (("en", 0), ("fi", 1)):
            with open(os.path.join(args.out, f"{name}.{lang}"), "w", encoding="utf-8") as f:
                for p in pairs[lo:hi]:
                    f.write(" ".join(p[idx].words) + "\n")
            with open(os.path.join(args.out, f"{name}.seg.{lang}"), "w", encoding="utf-8") as f:
                for p in pairs[lo:hi]:
                    f.write(" ".join(p[idx].seg) + "\n")


if __name__ == "__main__":
    main()
