#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
"""Cut a self-consistent noun subset out of a WordNet 3.x database.

The output keeps the standard database layout (index.noun, data.noun and the
other POS index files) so the C++ loader reads it exactly like a full install.
Every synset of a listed word is kept; index entries are written for every
lemma of a kept synset, restricted to kept synsets. Data lines lose their
pointer lists and offsets are renumbered to the new byte positions.
"""

import argparse
import pathlib
import sys


def read_lines(path):
    with open(path, "rb") as f:
        return f.read().decode("latin-1").splitlines(keepends=False)


def load_data_noun(wn):
    whole = wn / "data.noun"
    if whole.exists():
        text = whole.read_bytes().decode("latin-1")
    else:
        parts = sorted(wn.glob("data.noun[0-9]"))
        if not parts:
            sys.exit("no data.noun in %s" % wn)
        text = "".join(p.read_bytes().decode("latin-1") for p in parts)
    header, synsets = [], {}
    for line in text.splitlines():
        if line.startswith("  "):
            header.append(line)
            continue
        fields = line.split(" ")
        offset = fields[0]
        w_cnt = int(fields[3], 16)
        words = [(fields[4 + 2 * i], fields[5 + 2 * i]) for i in range(w_cnt)]
        gloss = line.split(" | ", 1)[1] if " | " in line else ""
        synsets[offset] = (fields[1], fields[2], words, gloss.rstrip())
    return header, synsets


def load_index(path):
    entries = {}
    if not path.exists():
        return entries
    for line in read_lines(path):
        if line.startswith("  "):
            continue
        f = line.split()
        lemma, pos, synset_cnt, p_cnt = f[0], f[1], int(f[2]), int(f[3])
        ptrs = f[4:4 + p_cnt]
        sense_cnt, tag_cnt = int(f[4 + p_cnt]), int(f[5 + p_cnt])
        offsets = f[6 + p_cnt:6 + p_cnt + synset_cnt]
        entries[lemma] = (pos, ptrs, sense_cnt, tag_cnt, offsets, line)
    return entries


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--wordnet", required=True, type=pathlib.Path)
    ap.add_argument("--words", required=True, type=pathlib.Path)
    ap.add_argument("--out", required=True, type=pathlib.Path)
    args = ap.parse_args()

    words = []
    for line in read_lines(args.words):
        words.extend(line.split("#", 1)[0].lower().split())

    header, synsets = load_data_noun(args.wordnet)
    index = load_index(args.wordnet / "index.noun")

    kept = set()
    for w in words:
        if w in index:
            kept.update(index[w][4])
    kept = sorted(kept)

    lemmas = set()
    for off in kept:
        for word, _ in synsets[off][2]:
            lemmas.add(word.lower())

    args.out.mkdir(parents=True, exist_ok=True)
    head_text = "".join(h + "\n" for h in header)

    # Renumber: offset of each data line is its byte position in the new file.
    remap, body, pos = {}, [], len(head_text.encode("latin-1"))
    for off in kept:
        lex, ss_type, wl, gloss = synsets[off]
        tail = " ".join("%s %s" % (w, lid) for w, lid in wl)
        rest = " %s %s %02x %s 000 | %s  \n" % (lex, ss_type, len(wl), tail, gloss)
        line = "%08d%s" % (pos, rest)
        remap[off] = "%08d" % pos
        body.append(line)
        pos += len(line.encode("latin-1"))
    (args.out / "data.noun").write_bytes((head_text + "".join(body)).encode("latin-1"))

    out_index = []
    for lemma in sorted(lemmas):
        if lemma not in index:
            continue
        pos_tag, _ptrs, _sense, tag_cnt, offsets, _ = index[lemma]
        mine = [remap[o] for o in offsets if o in remap]
        tagged = len([o for o in offsets[:tag_cnt] if o in remap])
        out_index.append("%s %s %d 0 %d %d %s  \n" % (
            lemma, pos_tag, len(mine), len(mine), tagged, " ".join(mine)))
    (args.out / "index.noun").write_bytes((head_text + "".join(out_index)).encode("latin-1"))

    # Other POS index files: verbatim lines for indexed lemmas (only the
    # tagged-sense counts are read from these; their offsets are not resolved).
    for other in ("verb", "adj", "adv"):
        src = load_index(args.wordnet / ("index." + other))
        lines = [src[l][5] + "\n" for l in sorted(lemmas | set(words)) if l in src]
        (args.out / ("index." + other)).write_bytes((head_text + "".join(lines)).encode("latin-1"))

    lic = args.wordnet / "LICENSE.txt"
    if not lic.exists():
        lic = args.wordnet / "LICENSE"
    if lic.exists():
        (args.out / "LICENSE").write_bytes(lic.read_bytes())
    print("kept %d synsets, %d noun lemmas" % (len(kept), len(out_index)))


if __name__ == "__main__":
    main()
