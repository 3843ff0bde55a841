#!/usr/bin/env python3
"""Writes the small synthetic corpus under data/synthetic/.

Sentences follow NP VP NP (PP NP)? over a 30-word vocabulary. Pairs reuse
the same grammar; the hypothesis is derived from the premise so that the
entailment label and relatedness score are determined by the edit.
"""

import argparse
import os
import random

DT = ["the", "a", "this", "every"]
JJ = ["big", "small", "red", "old", "happy", "quick"]
NN = ["dog", "cat", "man", "woman", "park", "ball", "house", "car", "tree", "bird"]
VB = ["sees", "likes", "chases", "finds", "has", "wants"]
IN = ["in", "near", "with", "under"]


def noun_phrase(rng, adjective_prob=0.5):
    words = [rng.choice(DT)]
    if rng.random() < adjective_prob:
        words.append(rng.choice(JJ))
    words.append(rng.choice(NN))
    return words


def sentence_parts(rng, pp_prob=0.5):
    parts = [("NP", noun_phrase(rng)), ("VP", [rng.choice(VB)]), ("NP", noun_phrase(rng))]
    if rng.random() < pp_prob:
        parts.append(("PP", [rng.choice(IN)]))
        parts.append(("NP", noun_phrase(rng)))
    return parts


def annotate(parts):
    """Returns rows (form, pos, chunk, head, deprel) with 1-based heads."""
    rows = []
    offsets = []
    for _, words in parts:
        offsets.append(len(rows) + 1)
        rows.extend([None] * len(words))
    verb = offsets[1]
    for index, (kind, words) in enumerate(parts):
        start = offsets[index]
        n = len(words)
        for i, w in enumerate(words):
            pos = {"NP": None, "VP": "VB", "PP": "IN"}[kind]
            if kind == "NP":
                pos = "DT" if i == 0 else ("NN" if i == n - 1 else "JJ")
            if n == 1:
                chunk = "S-" + kind
            elif i == 0:
                chunk = "B-" + kind
            elif i == n - 1:
                chunk = "E-" + kind
            else:
                chunk = "I-" + kind
            position = start + i
            if kind == "VP":
                head, rel = 0, "root"
            elif kind == "PP":
                head, rel = verb, "prep"
            elif i < n - 1:
                head, rel = start + n - 1, "nmod"
            elif index > 0 and parts[index - 1][0] == "PP":
                head, rel = offsets[index - 1], "arg"
            else:
                head, rel = verb, "arg"
            rows[position - 1] = (w, pos, chunk, head, rel)
    return rows


def words_of(parts):
    return [w for _, ws in parts for w in ws]


def make_pair(rng, kind):
    parts = sentence_parts(rng, pp_prob=0.3)
    premise = words_of(parts)
    if kind == "ENTAILMENT":
        if rng.random() < 0.5:
            hyp = [(k, [w for w in ws if w not in JJ]) for k, ws in parts]
            score = rng.choice([4.5, 4.7])
        else:
            hyp = parts
            score = 5.0
    elif kind == "CONTRADICTION":
        verb = parts[1][1][0]
        other = rng.choice([v for v in VB if v != verb])
        hyp = [parts[0], ("VP", [other])] + parts[2:]
        score = rng.choice([3.0, 3.2, 3.5])
    else:
        hyp = []
        for k, ws in parts:
            if k == "NP":
                ws = ws[:-1] + [rng.choice([n for n in NN if n != ws[-1]])]
            hyp.append((k, ws))
        score = rng.choice([1.0, 1.5, 2.0, 2.5])
    return premise, words_of(hyp), score


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", default=os.path.join(os.path.dirname(__file__), "..", "data", "synthetic"))
    parser.add_argument("--sentences", type=int, default=50)
    parser.add_argument("--pairs", type=int, default=40)
    parser.add_argument("--seed", type=int, default=20161)
    args = parser.parse_args()
    rng = random.Random(args.seed)
    os.makedirs(args.out, exist_ok=True)

    with open(os.path.join(args.out, "train.tsv"), "w", encoding="utf-8", newline="\n") as f:
        for _ in range(args.sentences):
            for row in annotate(sentence_parts(rng)):
                f.write("\t".join(str(c) for c in row) + "\n")
            f.write("\n")

    kinds = ["ENTAILMENT", "CONTRADICTION", "NEUTRAL"]
    with open(os.path.join(args.out, "pairs.tsv"), "w", encoding="utf-8", newline="\n") as f:
        for i in range(args.pairs):
            kind = kinds[i % 3]
            premise, hyp, score = make_pair(rng, kind)
            f.write("\t".join([f"p{i + 1}", " ".join(premise), " ".join(hyp), f"{score:.1f}", kind]) + "\n")


if __name__ == "__main__":
    main()
