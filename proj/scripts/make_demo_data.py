# Copyright 2026 The Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Regenerates the synthetic toy data under data/demo.

Three invented languages:
  iso  isolating, rigid SVO, head-initial modifiers
  agg  agglutinative suffix chains, mostly SOV
  fus  fusional endings, free subject/object order
"""

import os
import random

OUT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "data", "demo")

LANGS = {
    "iso": dict(
        nouns="ka mo ti ru sen pal dom lu vek nar bi fo".split(),
        verbs="ta ne gor vim sal pek".split(),
        adjs="hu ze lom ri".split(),
        dets="na".split(),
        suffixes=[[""]],
        so_first=1.0,
        adj_after=True,
    ),
    "agg": dict(
        nouns="ev kitap yol kus dag su ates gun ay el".split(),
        verbs="gel gor yap al ver bil".split(),
        adjs="buyuk kucuk yeni eski".split(),
        dets=[],
        suffixes=[["", "ler"], ["", "im", "in", "imiz"], ["", "de", "den", "e", "i"]],
        so_first=0.85,
        adj_after=False,
    ),
    "fus": dict(
        nouns="dom rek vil sat mar kov lun pes".split(),
        verbs="pis dav nos lom chit".split(),
        adjs="nov star dobr mal".split(),
        dets="ten ta".split(),
        suffixes=[["", "a", "u", "om", "ami", "ov", "e", "y"]],
        so_first=0.5,
        adj_after=False,
    ),
}

VERB_ENDINGS = {"iso": [""], "agg": ["di", "iyor", "ecek", "mis"], "fus": ["u", "esh", "et", "em", "ete", "ut"]}


def inflect(rng, stem, slots):
    return stem + "".join(rng.choice(s) for s in slots)


def noun_phrase(rng, spec, lang):
    """Returns a list of (form, upos, deprel-to-noun or None) with the noun marked."""
    noun = inflect(rng, rng.choice(spec["nouns"]), spec["suffixes"])
    words = [(noun, "NOUN", None)]
    if rng.random() < 0.4:
        adj = (rng.choice(spec["adjs"]), "ADJ", "amod")
        words = words + [adj] if spec["adj_after"] else [adj] + words
    if spec["dets"] and rng.random() < 0.5:
        words = [(rng.choice(spec["dets"]), "DET", "det")] + words
    return words


def sentence(rng, lang):
    spec = LANGS[lang]
    subj = noun_phrase(rng, spec, lang)
    obj = noun_phrase(rng, spec, lang) if rng.random() < 0.8 else None
    verb = (rng.choice(spec["verbs"]) + rng.choice(VERB_ENDINGS[lang]), "VERB", "root")
    s_first = rng.random() < spec["so_first"]
    if lang == "iso":
        order = [("s", subj), ("v", [verb])] + ([("o", obj)] if obj else [])
    elif lang == "agg":
        parts = [("s", subj)] + ([("o", obj)] if obj else [])
        if not s_first:
            parts.reverse()
        order = parts + [("v", [verb])]
    else:
        parts = [("s", subj)] + ([("o", obj)] if obj else [])
        if not s_first:
            parts.reverse()
        order = parts[:1] + [("v", [verb])] + parts[1:]
    tokens = []
    for role, words in order:
        start = len(tokens)
        noun_idx = None
        for i, (form, upos, rel) in enumerate(words):
            if rel is None and upos == "NOUN":
                noun_idx = start + i
            tokens.append([form, upos, rel, role])
        for t in tokens[start:]:
            t.append(noun_idx)
    verb_idx = next(i for i, t in enumerate(tokens) if t[2] == "root")
    rows = []
    for i, (form, upos, rel, role, noun_idx) in enumerate(tokens):
        if rel == "root":
            head, deprel = 0, "root"
        elif rel is None:
            head, deprel = verb_idx + 1, {"s": "nsubj", "o": "obj"}[role]
        else:
            head, deprel = noun_idx + 1, rel
        rows.append((i + 1, form, upos, head, deprel))
    rows.append((len(rows) + 1, ".", "PUNCT", verb_idx + 1, "punct"))
    return rows


def main():
    rng = random.Random(20260101)
    os.makedirs(os.path.join(OUT, "corpus"), exist_ok=True)
    os.makedirs(os.path.join(OUT, "treebank"), exist_ok=True)
    for lang in sorted(LANGS):
        with open(os.path.join(OUT, "corpus", lang + ".txt"), "w", encoding="utf-8") as f:
            for _ in range(600):
                words = [r[1] for r in sentence(rng, lang)]
                f.write(" ".join(words[:-1]) + " .\n")
        with open(os.path.join(OUT, "treebank", lang + ".conllu"), "w", encoding="utf-8") as f:
            for n in range(80):
                rows = sentence(rng, lang)
                f.write(f"# sent_id = {lang}-{n + 1}\n")
                f.write("# text = " + " ".join(r[1] for r in rows) + "\n")
                for idx, form, upos, head, deprel in rows:
                    f.write(f"{idx}\t{form}\t_\t{upos}\t_\t_\t{head}\t{deprel}\t_\t_\n")
                f.write("\n")
            # One malformed sentence (two roots) exercises the drop path.
            f.write(f"# sent_id = {lang}-bad\n1\tx\t_\tNOUN\t_\t_\t0\troot\t_\t_\n"
                    "2\ty\t_\tVERB\t_\t_\t0\troot\t_\t_\n\n")

    features = [f"F{i:02d}" for i in range(1, 9)]
    codes = ["aaa", "bbb", "ccc", "ddd", "eee", "fff", "ggg", "hhh", "iii", "jjj"]
    with open(os.path.join(OUT, "features.csv"), "w", encoding="utf-8") as f:
        f.write("language," + ",".join(features) + "\n")
        for code in codes:
            cells = []
            for _ in features:
                r = rng.random()
                cells.append("" if r < 0.1 else str(rng.randrange(3)))
            f.write(code + "," + ",".join(cells) + "\n")


if __name__ == "__main__":
    main()
