"""Smoke test for the Python bindings.

Build and install first:
    pip install --no-build-isolation ./crates/py
then run:
    python python/smoke_test.py
"""

import math
import os
import tempfile

import ssclab


def main():
    corpus = ssclab.Corpus.synthetic(n_docs=40, seed=3)
    assert len(corpus) == 40
    assert corpus.labels[0] == "BACKGROUND"
    stats = corpus.stats()
    assert stats["n_docs"] == 40 and stats["n_sentences"] == corpus.n_sentences

    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "c.jsonl")
        corpus.save(path)
        again = ssclab.Corpus.load(path)
        assert again.to_jsonl() == corpus.to_jsonl()

    train, dev, test = corpus.split((0.6, 0.2, 0.2), 42)
    assert len(train) + len(dev) + len(test) == 40

    doc = test.doc_ids[0]
    text, labels = test.sentences(doc)[0]
    query = ssclab.render_query(test, doc, 1)
    assert query.endswith(f"the sentence {text} plays a rhetorical role as ")
    demo = ssclab.render_demonstration(test, doc)
    assert demo.endswith(" <End>")
    prompt = ssclab.build_prompt(test, doc, 1, train, shots=2, budget=1200)
    assert prompt["text"].endswith(query) and prompt["n_shots"] <= 2

    generated = "<" + ", ".join(labels) + "> <End> OTHER"
    assert ssclab.parse_label(generated) == labels
    assert ssclab.parse_label("nothing here") is None

    # Batch of two identical representations sharing one label gives -1.
    out = ssclab.weighcon_loss([[1.0, 0.0], [1.0, 0.0]], [[True], [True]])
    assert abs(out["l_con"] + 1.0) < 1e-12
    assert out["n_positive_pairs"] == 2
    assert math.isclose(ssclab.combined_loss(1.0, 2.0, 0.1), 1.2)

    report = ssclab.f1_scores([[True, False]], [[True, False]], ["A", "B"])
    assert report["micro_f1"] == 1.0
    assert ssclab.tune_thresholds([[0.9], [0.1]], [[True], [False]]) == [0.15]
    assert ssclab.kappa_from_counts(25, 25, 25, 25) == 0.0

    for shots in (0, 1, 5):
        r = ssclab.icl_gold_echo(test, train, shots)
        assert r["micro_f1"] == 1.0 and r["n_parse_failures"] == 0

    result = ssclab.train(train, dev, test, epochs=1, max_steps=2, batch_size=4)
    assert 0.0 <= result["test"]["micro_f1"] <= 1.0

    print(f"ssclab {ssclab.__version__}: python smoke test passed")


if __name__ == "__main__":
    main()
