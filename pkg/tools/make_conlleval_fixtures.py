"""Regenerate tests/fixtures/conlleval: tagged files plus frozen expected scores.

Expected values come from the ``conlleval`` package (a line-by-line port of
the CoNLL-2000 ``conlleval.pl`` state machine), not from biscnn. Precision,
recall and F1 are recomputed from its chunk counts with the Perl script's
conventions (a ratio with a zero denominator is 0), then rounded to two
decimals as the script prints them.

    pip install conlleval==0.2
    python tools/make_conlleval_fixtures.py
"""
import json
import random
from pathlib import Path

import conlleval

OUT = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "conlleval"


def write(name, sentences):
    lines = []
    for sent in sentences:
        lines += [f"{w} {g} {p}" for w, g, p in sent]
        lines.append("")
    (OUT / name).write_text("\n".join(lines) + "\n", encoding="utf-8")


def hand_written():
    files = {}
    g = ["B-x", "I-x", "O", "B-y", "O", "B-z", "I-z"]
    files["01_perfect.txt"] = [list(zip([f"w{i}" for i in range(7)], g, g))]
    files["02_all_o.txt"] = [list(zip([f"w{i}" for i in range(7)], g, ["O"] * 7))]
    files["03_lenient_start.txt"] = [
        list(zip("a b c".split(), ["I-x", "I-y", "B-y"], ["I-x", "I-y", "B-y"])),
        list(zip("a b c d".split(), ["O", "I-x", "I-x", "O"], ["O", "B-x", "I-x", "O"])),
        list(zip("a b c d".split(), ["B-x", "I-y", "I-y", "O"], ["B-x", "B-y", "I-y", "O"])),
        list(zip("a b c".split(), ["I-x", "I-x", "I-x"], ["B-x", "I-x", "B-x"])),
    ]
    # gold 3 chunks, predicted 2, one exact match
    files["04_partial.txt"] = [list(zip(
        "a b c d e f".split(),
        ["B-x", "O", "B-y", "I-y", "O", "B-z"],
        ["B-x", "O", "B-y", "O", "O", "O"],
    ))]
    files["05_type_switch.txt"] = [list(zip(
        "a b c d e".split(),
        ["B-loc", "I-loc", "I-per", "B-per", "I-per"],
        ["B-loc", "I-per", "I-per", "I-per", "I-per"],
    ))]
    return files


def random_file(rng, n_sent, types, p_o, p_noise):
    sents = []
    for _ in range(n_sent):
        n = rng.randint(1, 14)
        gold = []
        for _ in range(n):
            r = rng.random()
            if r < p_o:
                gold.append("O")
            else:
                gold.append(rng.choice("BI") + "-" + rng.choice(types))
        pred = []
        for lab in gold:
            if rng.random() < p_noise:
                r = rng.random()
                pred.append("O" if r < 0.3 else rng.choice("BI") + "-" + rng.choice(types))
            else:
                pred.append(lab)
        sents.append([(f"t{i}", g, p) for i, (g, p) in enumerate(zip(gold, pred))])
    return sents


def perl_scores(correct, pred, gold):
    p = 100.0 * correct / pred if pred else 0.0
    r = 100.0 * correct / gold if gold else 0.0
    f = 2 * p * r / (p + r) if p + r else 0.0
    return round(p, 2), round(r, 2), round(f, 2)


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    files = hand_written()
    rng = random.Random(2000)
    shapes = [
        (20, ["a", "b", "c"], 0.5, 0.15),
        (30, ["fromloc.city_name", "toloc.city_name"], 0.6, 0.1),
        (15, ["a"], 0.3, 0.4),
        (40, ["x", "y", "z", "w"], 0.4, 0.25),
        (25, ["a", "b"], 0.8, 0.05),
        (10, ["p", "q", "r"], 0.2, 0.5),
        (50, ["day_name", "period_of_day", "airline_name"], 0.55, 0.2),
    ]
    for k, shape in enumerate(shapes):
        files[f"{k + 6:02d}_random.txt"] = random_file(rng, *shape)
    expected = {}
    for name, sents in files.items():
        write(name, sents)
        with open(OUT / name, encoding="utf-8") as fh:
            res = conlleval.evaluate(line.rstrip("\n") for line in fh)
        stats = res["overall"]["chunks"]["stats"]
        tags = res["overall"]["tags"]["stats"]
        p, r, f = perl_scores(stats["correct"], stats["pred"], stats["gold"])
        per_type = {}
        for slot, data in res["slots"]["chunks"].items():
            s = data["stats"]
            per_type[slot] = dict(zip(("precision", "recall", "f1"), perl_scores(s["correct"], s["pred"], s["gold"])))
        expected[name] = {
            "precision": p, "recall": r, "f1": f,
            "gold": stats["gold"], "found": stats["pred"], "correct": stats["correct"],
            "tokens": tags["gold"], "accuracy": round(100.0 * tags["correct"] / tags["gold"], 2),
            "per_type": per_type,
        }
    (OUT / "expected.json").write_text(json.dumps(expected, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    print(f"wrote {len(files)} fixtures to {OUT}")


if __name__ == "__main__":
    main()
