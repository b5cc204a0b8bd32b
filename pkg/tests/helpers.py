"""Small hand-built sentences and documents shared by the tests."""

from snapgrid.corpus import (
    DependencyEdge,
    Document,
    EntityMention,
    GoldRelation,
    GoldTrigger,
    Sentence,
    Token,
)


def sentence(words, lemmas=None, tags=None, edges=(), proteins=(), triggers=(), relations=(), index=0):
    """Build a Sentence.

    ``edges`` are ``(head, dep, label)``; ``proteins`` are ``(id, token)``
    single-token Protein mentions; ``triggers`` are ``(id, token, class)``;
    ``relations`` are ``(trigger id, role, argument id)``.
    """
    lemmas = lemmas or [w.lower() for w in words]
    tags = tags or ["NN"] * len(words)
    prot_tokens = {tok for _, tok in proteins}
    toks = tuple(
        Token(i, w, l, t, "Protein" if i in prot_tokens else None)
        for i, (w, l, t) in enumerate(zip(words, lemmas, tags))
    )
    return Sentence(
        index,
        toks,
        tuple(DependencyEdge(h, d, lab) for h, d, lab in edges),
        tuple(EntityMention(mid, index, tok, (tok, tok + 1), "Protein") for mid, tok in proteins),
        tuple(GoldTrigger(tid, index, tok, cls) for tid, tok, cls in triggers),
        tuple(GoldRelation(t, role, a) for t, role, a in relations),
    )


def mek_sentence(**kw):
    """'MEK phosphorylates ERK' with nsubj(1->0), dobj(1->2)."""
    return sentence(
        ["MEK", "phosphorylates", "ERK"],
        ["mek", "phosphorylate", "erk"],
        ["NN", "VBZ", "NN"],
        edges=[(1, 0, "nsubj"), (1, 2, "dobj")],
        proteins=[("T1", 0), ("T2", 2)],
        **kw,
    )


def mek_document(doc_id="D1"):
    sent = mek_sentence(triggers=[("T3", 1, "Phosphorylation")], relations=[("T3", "Theme", "T2")])
    return Document(doc_id, (sent,))


def nested_document(doc_id="N1"):
    """'IL-4 induces phosphorylation of STAT6': Positive_regulation(Cause IL-4, Theme Phosphorylation(STAT6))."""
    sent = sentence(
        ["IL-4", "induces", "phosphorylation", "of", "STAT6"],
        ["il-4", "induce", "phosphorylation", "of", "stat6"],
        ["NN", "VBZ", "NN", "IN", "NN"],
        edges=[(1, 0, "nsubj"), (1, 2, "dobj"), (2, 4, "prep_of")],
        proteins=[("T1", 0), ("T2", 4)],
        triggers=[("T3", 1, "Positive_regulation"), ("T4", 2, "Phosphorylation")],
        relations=[("T4", "Theme", "T2"), ("T3", "Theme", "T4"), ("T3", "Cause", "T1")],
    )
    return Document(doc_id, (sent,))


ACCEPTANCE_LINES = []


def report_criterion(number, title, ok, detail):
    """Record one acceptance line; conftest prints them after the run."""
    line = f"{'PASS' if ok else 'FAIL'} criterion {number} ({title}): {detail}"
    ACCEPTANCE_LINES.append((number, line))
    print(line)
