"""Write entity spans for every article as JSON lines for `propmap map --entities`.

    python ner_to_jsonl.py ARTICLES_DIR OUT.jsonl [--model en_core_web_sm]

Each line is {"doc_key": "<article id>", "begin": <char>, "end": <char>, "type": "<label>"}
with character offsets into the article text. Any NER tool works as long as
it produces this shape; spaCy is used here.
"""

import argparse
import json
import pathlib
import re


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("articles_dir", type=pathlib.Path)
    ap.add_argument("out", type=pathlib.Path)
    ap.add_argument("--model", default="en_core_web_sm")
    args = ap.parse_args()

    import spacy

    nlp = spacy.load(args.model)
    with args.out.open("w", encoding="utf-8") as out:
        for path in sorted(args.articles_dir.glob("article*.txt")):
            doc_key = re.fullmatch(r"article(.+)\.txt", path.name).group(1)
            text = path.read_text(encoding="utf-8")
            for ent in nlp(text).ents:
                row = {"doc_key": doc_key, "begin": ent.start_char, "end": ent.end_char, "type": ent.label_}
                out.write(json.dumps(row) + "\n")


if __name__ == "__main__":
    main()
