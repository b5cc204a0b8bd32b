import random

import networkx as nx
import pytest

from helpers import mek_document, mek_sentence, sentence
from snapgrid.features import (
    NAMESPACES,
    NOPATH,
    Candidate,
    build_gazetteer,
    bucket,
    candidates_for,
    extract_participant_features,
    extract_trigger_features,
    is_convertible,
    namespace_of,
    parse_rendered_path,
    shortest_path,
)


def test_trigger_features_mek():
    vec = extract_trigger_features(mek_sentence(), 1)
    for f in ("trig.lemma:0=phosphorylate", "trig.dep:out:nsubj", "trig.dep.lex:out:dobj=erk", "trig.entcount.sent:2"):
        assert f in vec, f
    assert vec["trig.word:0=phosphorylates"] == 1
    assert "trig.word:-1=MEK" in vec and "trig.lemma:+1=erk" in vec


def test_trigger_features_single_token():
    s = sentence(["kinase"], ["kinase"], ["NN"])
    vec = extract_trigger_features(s, 0)
    namespaces = {namespace_of(f) for f in vec}
    assert namespaces <= {"trig.word", "trig.lemma", "trig.bow.sent", "trig.entcount.w4", "trig.entcount.sent"}
    assert {f for f in vec if f.startswith(("trig.word", "trig.lemma"))} == {"trig.word:0=kinase", "trig.lemma:0=kinase"}
    assert vec["trig.entcount.sent:0"] == 1 and vec["trig.entcount.w4:0"] == 1


def test_trigger_features_deterministic(small_corpus):
    sent = small_corpus[0].sentences[0]
    gaz = build_gazetteer(small_corpus)
    for i in range(len(sent.tokens)):
        assert extract_trigger_features(sent, i, gaz) == extract_trigger_features(sent, i, gaz)


def test_gazetteer_flag():
    vec = extract_trigger_features(mek_sentence(), 1, {"phosphorylate"})
    assert vec.get("trig.gaz:0") == 1
    assert "trig.gaz:0" not in extract_trigger_features(mek_sentence(), 1, set())


def test_no_zero_counts(small_corpus):
    gaz = build_gazetteer(small_corpus)
    for doc in small_corpus[:10]:
        for s in doc.sentences:
            for i in range(len(s.tokens)):
                assert all(c > 0 for c in extract_trigger_features(s, i, gaz).values())


def _phos_of_mek():
    return sentence(
        ["phosphorylation", "of", "MEK"], ["phosphorylation", "of", "mek"], ["NN", "IN", "NN"],
        edges=[(0, 2, "prep_of")], proteins=[("T1", 2)],
    )


def test_participant_features_prep_of():
    s = _phos_of_mek()
    cand = Candidate(2, "Protein", ("mention", "T1"))
    vec = extract_participant_features(s, 0, "Phosphorylation", cand)
    assert "part.path:>prep_of" in vec
    assert "part.order:trigger-first" in vec
    assert "part.cons:<Phosphorylation,Protein>" in vec
    assert "part.path.typed:Phosphorylation|>prep_of|Protein" in vec
    assert "part.dist:2" in vec


def test_participant_nopath():
    s = sentence(["phosphorylation", "MEK"], proteins=[("T1", 1)])
    vec = extract_participant_features(s, 0, "Phosphorylation", Candidate(1, "Protein", ("mention", "T1")))
    assert f"part.nopath:{NOPATH}" in vec
    assert not any(f.startswith("part.path") for f in vec)


def test_regulation_consistency_pairs():
    s = sentence(
        ["regulates", "phosphorylation"], edges=[(0, 1, "dobj")],
    )
    cand = Candidate(1, "Phosphorylation", ("trigger", 1))
    vec = extract_participant_features(s, 0, "Regulation", cand, {0: "Regulation", 1: "Phosphorylation"})
    assert "part.cons:<Regulation,Phosphorylation>" in vec
    assert "part.cons.super:<Regulation,Event>" in vec


def test_convertibility_examples():
    assert is_convertible("trig.bow.sent:kinase") is False
    assert is_convertible("part.path:>nsubjpass") is True
    assert is_convertible("trig.dep:out:nsubj") is False
    with pytest.raises(KeyError):
        is_convertible("nope.ns:x")


def test_every_extracted_feature_has_a_namespace(small_corpus):
    gaz = build_gazetteer(small_corpus)
    seen = set()
    for doc in small_corpus:
        for s in doc.sentences:
            trig = {t.token: t.event_class for t in s.triggers}
            for i in range(len(s.tokens)):
                seen |= {namespace_of(f) for f in extract_trigger_features(s, i, gaz)}
            for t, cls in trig.items():
                for c in candidates_for(s, t, trig):
                    seen |= {namespace_of(f) for f in extract_participant_features(s, t, cls, c, trig)}
    assert seen <= set(NAMESPACES)
    for ns in seen:
        is_convertible(ns + ":x")


def test_buckets():
    assert [bucket(k) for k in (0, 1, 2, 3, 5, 6, 40)] == ["0", "1", "2", "3-5", "3-5", "6+", "6+"]


def test_gazetteer():
    assert build_gazetteer([mek_document()]) == {"phosphorylate"}
    assert build_gazetteer([]) == frozenset()
    assert build_gazetteer([mek_document("A"), mek_document("B")]) == {"phosphorylate"}


def test_candidates_exclude_self():
    s = mek_sentence()
    cands = candidates_for(s, 1, {1: "Phosphorylation", 0: "Binding"})
    assert all(c.token != 1 for c in cands)
    assert {c.ref for c in cands} == {("mention", "T1"), ("mention", "T2"), ("trigger", 0)}


def _random_sentence(rng, n):
    words = [f"w{i}" for i in range(n)]
    edges = set()
    for _ in range(rng.randint(0, 2 * n)):
        h, d = rng.sample(range(n), 2)
        edges.add((h, d, rng.choice(["a", "b", "c"])))
    return sentence(words, edges=sorted(edges))


def test_shortest_path_length_matches_bfs_oracle():
    rng = random.Random(7)
    for _ in range(300):
        n = rng.randint(2, 8)
        s = _random_sentence(rng, n)
        g = nx.Graph()
        g.add_nodes_from(range(n))
        g.add_edges_from((e.head, e.dependent) for e in s.edges)
        src, dst = rng.sample(range(n), 2)
        found = shortest_path(s, src, dst)
        if nx.has_path(g, src, dst):
            steps, nodes = found
            assert len(steps) == nx.shortest_path_length(g, src, dst)
            assert nodes[-1] == dst
            # the reported steps are realisable along the reported nodes
            prev = src
            for step, node in zip(steps, nodes):
                d, lab = step[0], step[1:]
                edge = (prev, node, lab) if d == ">" else (node, prev, lab)
                assert edge in {(e.head, e.dependent, e.label) for e in s.edges}
                prev = node
        else:
            assert found is None


def test_shortest_path_tie_is_lexicographic():
    s = sentence(["t", "x", "y", "a"], edges=[(0, 1, "b"), (1, 3, "z"), (0, 2, "a"), (2, 3, "z")])
    steps, nodes = shortest_path(s, 0, 3)
    assert steps == (">a", ">z") and nodes == (2, 3)


def test_rendered_path_parse():
    assert parse_rendered_path(">prep_of =protein >nn") == [(">", "prep_of", "protein"), (">", "nn", None)]
    with pytest.raises(ValueError):
        parse_rendered_path("=x >a")
