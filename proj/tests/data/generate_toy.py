"""Regenerates the toy corpora in this directory (deterministic)."""

import random
from pathlib import Path

HERE = Path(__file__).resolve().parent
rng = random.Random(7)

POS = ["good", "great", "fine", "lovely", "superb"]
NEG = ["bad", "awful", "poor", "dull", "terrible"]
FILLER = [["the", "movie", "was"], ["the", "plot", "is"], ["a", "story", "so"],
          ["this", "film", "felt"], ["the", "acting", "seemed"]]


def tree(leaves, polarity):
    if len(leaves) == 1:
        label, word = leaves[0]
        return f"({label} {word})", label != 2
    cut = rng.randint(1, len(leaves) - 1)
    left, ls = tree(leaves[:cut], polarity)
    right, rs = tree(leaves[cut:], polarity)
    has = ls or rs
    label = (3 if polarity else 1) if has else 2
    return f"({label} {left} {right})", has


def sentiment():
    lines, dep_blocks, span_blocks = [], [], []
    for i in range(20):
        polarity = i % 2 == 0
        words = list(rng.choice(FILLER))
        words.append(rng.choice(POS if polarity else NEG))
        if rng.random() < 0.5:
            words.append(rng.choice(["indeed", "overall", "today"]))
        leaves = [((3 if polarity else 1) if w in POS + NEG else 2, w) for w in words]
        inner, _ = tree(leaves, polarity)
        root = 4 if polarity else 0
        lines.append(f"({root}" + inner[2:])
        # Chain dependency version: token i heads onto i+1, the last is root.
        n = len(words)
        dep_blocks.append("\n".join(f"{k + 1}\t{w}\t{k + 2 if k + 1 < n else 0}"
                                    for k, w in enumerate(words)))
        spans = []
        for end in range(1, n + 1):
            has = any(w in POS + NEG for w in words[:end])
            label = root if end == n else ((3 if polarity else 1) if has else 2)
            spans.append(f"0\t{end}\t{label}")
        span_blocks.append("\n".join(spans))
    (HERE / "toy_sentiment.txt").write_text("\n".join(lines) + "\n")
    (HERE / "toy_sentiment.dep").write_text("\n\n".join(dep_blocks) + "\n")
    (HERE / "toy_sentiment.spans").write_text("\n\n".join(span_blocks) + "\n")
    return lines


SUBJ = ["man", "woman", "boy", "girl", "dog", "cat"]
VERB = ["playing", "eating", "riding", "cutting", "holding"]
OBJ = ["guitar", "apple", "horse", "bread", "ball", "bike"]


def dep_rows(subj, verb, obj):
    # a subj is verb a obj
    words = ["a", subj, "is", verb, "a", obj]
    heads = [2, 4, 4, 0, 6, 4]
    return words, "\n".join(f"{k + 1}\t{w}\t{h}" for k, (w, h) in enumerate(zip(words, heads)))


def relatedness():
    rows = ["pair_ID\tsentence_A\tsentence_B\trelatedness_score"]
    left, right = [], []
    for i in range(20):
        a = (rng.choice(SUBJ), rng.choice(VERB), rng.choice(OBJ))
        keep = [rng.random() < 0.5 for _ in range(3)]
        b = tuple(x if k else rng.choice([y for y in pool if y != x])
                  for x, k, pool in zip(a, keep, (SUBJ, VERB, OBJ)))
        score = 1.0 + 1.5 * (a[0] == b[0]) + 1.5 * (a[1] == b[1]) + 1.0 * (a[2] == b[2])
        wa, ra = dep_rows(*a)
        wb, rb = dep_rows(*b)
        rows.append(f"{i + 1}\t{' '.join(wa)}\t{' '.join(wb)}\t{score:.1f}")
        left.append(ra)
        right.append(rb)
    (HERE / "toy_pairs.tsv").write_text("\n".join(rows) + "\n")
    (HERE / "toy_pairs.left.dep").write_text("\n\n".join(left) + "\n")
    (HERE / "toy_pairs.right.dep").write_text("\n\n".join(right) + "\n")
    corpus = sorted({r.split("\t")[1] for r in rows[1:]} | {r.split("\t")[2] for r in rows[1:]})
    (HERE / "toy_corpus.txt").write_text("\n".join(corpus) + "\n")
    return corpus


def embeddings(words):
    erng = random.Random(11)
    out = [w + " " + " ".join(f"{erng.uniform(-1, 1):.6f}" for _ in range(16)) for w in words]
    (HERE / "toy_vectors.txt").write_text("\n".join(out) + "\n")


if __name__ == "__main__":
    sentiment()
    relatedness()
    vocab = sorted(set(POS + NEG + SUBJ + VERB + OBJ + ["a", "is", "the", "movie", "was"]))
    embeddings(vocab)
