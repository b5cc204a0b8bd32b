"""Deterministic template generator for a small pre-parsed event corpus.

Sentences are built left to right together with a tree-shaped dependency
parse, entity mentions and gold events.  All nine event classes occur,
regulations nest up to two levels, and trigger lexicons follow a Zipfian
frequency profile so that rare trigger words need more data to be learned.

One lexeme, ``recruit``, is deliberately ambiguous: it is Binding when the
sentence mentions a ``complex`` and Localization when it mentions the
``nucleus``, with the cue placed outside every positional window.  Only
sentence-level bag-of-words features can resolve it.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .corpus import Document, DependencyEdge, EntityMention, GoldRelation, GoldTrigger, Sentence, Token
from .labels import REGULATION_CLASSES, SIMPLE_CLASSES

# (lemma, 3sg verb, past participle, noun)
LEXICON = {
    "Gene_expression": [
        ("express", "expresses", "expressed", "expression"),
        ("produce", "produces", "produced", "production"),
        ("synthesize", "synthesizes", "synthesized", "synthesis"),
        ("overexpress", "overexpresses", "overexpressed", "overexpression"),
        ("coexpress", "coexpresses", "coexpressed", "coexpression"),
        ("biosynthesize", "biosynthesizes", "biosynthesized", "biosynthesis"),
        ("encode", "encodes", "encoded", "encoding"),
    ],
    "Transcription": [
        ("transcribe", "transcribes", "transcribed", "transcription"),
        ("retrotranscribe", "retrotranscribes", "retrotranscribed", "retrotranscription"),
        ("cotranscribe", "cotranscribes", "cotranscribed", "cotranscription"),
    ],
    "Protein_catabolism": [
        ("degrade", "degrades", "degraded", "degradation"),
        ("cleave", "cleaves", "cleaved", "cleavage"),
        ("proteolyze", "proteolyzes", "proteolyzed", "proteolysis"),
        ("destabilize", "destabilizes", "destabilized", "destabilization"),
        ("catabolize", "catabolizes", "catabolized", "catabolism"),
    ],
    "Phosphorylation": [
        ("phosphorylate", "phosphorylates", "phosphorylated", "phosphorylation"),
        ("hyperphosphorylate", "hyperphosphorylates", "hyperphosphorylated", "hyperphosphorylation"),
        ("autophosphorylate", "autophosphorylates", "autophosphorylated", "autophosphorylation"),
        ("transphosphorylate", "transphosphorylates", "transphosphorylated", "transphosphorylation"),
    ],
    "Localization": [
        ("translocate", "translocates", "translocated", "translocation"),
        ("secrete", "secretes", "secreted", "secretion"),
        ("localize", "localizes", "localized", "localization"),
        ("sequester", "sequesters", "sequestered", "sequestration"),
        ("export", "exports", "exported", "export"),
        ("relocalize", "relocalizes", "relocalized", "relocalization"),
    ],
    "Binding": [
        ("bind", "binds", "bound", "binding"),
        ("interact", "interacts", "interacted", "interaction"),
        ("associate", "associates", "associated", "association"),
        ("heterodimerize", "heterodimerizes", "heterodimerized", "heterodimerization"),
        ("dimerize", "dimerizes", "dimerized", "dimerization"),
        ("recognize", "recognizes", "recognized", "recognition"),
        ("ligate", "ligates", "ligated", "ligation"),
    ],
    "Regulation": [
        ("regulate", "regulates", "regulated", "regulation"),
        ("modulate", "modulates", "modulated", "modulation"),
        ("control", "controls", "controlled", "control"),
        ("mediate", "mediates", "mediated", "mediation"),
        ("influence", "influences", "influenced", "influence"),
        ("alter", "alters", "altered", "alteration"),
        ("target", "targets", "targeted", "targeting"),
    ],
    "Positive_regulation": [
        ("induce", "induces", "induced", "induction"),
        ("activate", "activates", "activated", "activation"),
        ("enhance", "enhances", "enhanced", "enhancement"),
        ("upregulate", "upregulates", "upregulated", "upregulation"),
        ("promote", "promotes", "promoted", "promotion"),
        ("potentiate", "potentiates", "potentiated", "potentiation"),
        ("stimulate", "stimulates", "stimulated", "stimulation"),
        ("augment", "augments", "augmented", "augmentation"),
        ("elevate", "elevates", "elevated", "elevation"),
    ],
    "Negative_regulation": [
        ("inhibit", "inhibits", "inhibited", "inhibition"),
        ("suppress", "suppresses", "suppressed", "suppression"),
        ("block", "blocks", "blocked", "blockade"),
        ("downregulate", "downregulates", "downregulated", "downregulation"),
        ("abolish", "abolishes", "abolished", "abolition"),
        ("attenuate", "attenuates", "attenuated", "attenuation"),
        ("repress", "represses", "repressed", "repression"),
        ("prevent", "prevents", "prevented", "prevention"),
        ("impair", "impairs", "impaired", "impairment"),
    ],
}
RECRUIT = ("recruit", "recruits", "recruited", "recruitment")

PROTEINS = [
    "MEK", "ERK", "p53", "TRAF2", "IL-2", "NF-kB", "STAT3", "JAK1", "CD40", "TNF", "A20", "ABIN",
    "BCL-2", "c-Jun", "c-Fos", "IkBa", "RelA", "p65", "IRF3", "Smad2", "Smad4", "AKT", "PTEN", "GATA3",
    "Tbet", "FOXP3", "IL-4", "IL-6", "IL-10", "CREB", "Egr-1", "SP1", "MYC", "MAX", "CDK2", "E2F1",
    "PU.1", "Ets-1", "Runx1", "LMO2", "TAL1", "CBP", "p300", "HDAC1", "SIRT1", "ATF2", "MKK4", "JNK",
]

PREDICATES = [("observe", "observed"), ("detect", "detected"), ("note", "noted"), ("examine", "examined")]
DECOY_HEADS = ["site", "domain", "motif", "assay", "element", "region"]
CONTEXT_NOUNS = ["cells", "lymphocytes", "monocytes", "extracts", "clones"]


def _zipf_choice(rng, items):
    weights = [1.0 / (r + 1) for r in range(len(items))]
    return rng.choices(items, weights)[0]


@dataclass
class _Builder:
    doc_ids: list  # shared id counter, one per document
    tokens: list = field(default_factory=list)
    edges: list = field(default_factory=list)
    mentions: list = field(default_factory=list)
    triggers: list = field(default_factory=list)
    relations: list = field(default_factory=list)
    entity_at: dict = field(default_factory=dict)

    def _new_id(self):
        self.doc_ids[0] += 1
        return f"T{self.doc_ids[0]}"

    def tok(self, word, tag, lemma=None):
        self.tokens.append((word, lemma if lemma is not None else word.lower(), tag))
        return len(self.tokens) - 1

    def protein(self, name):
        i = self.tok(name, "NN", name.lower())
        mid = self._new_id()
        self.mentions.append(EntityMention(mid, 0, i, (i, i + 1), "Protein"))
        self.entity_at[i] = mid
        return i

    def edge(self, head, dep, label):
        self.edges.append((head, dep, label))

    def trigger(self, index, cls):
        tid = self._new_id()
        self.triggers.append(GoldTrigger(tid, 0, index, cls))
        return tid

    def rel(self, tid, role, arg_id):
        self.relations.append(GoldRelation(tid, role, arg_id))

    def build(self, index) -> Sentence:
        toks = tuple(
            Token(i, w, l, t, "Protein" if i in self.entity_at else None) for i, (w, l, t) in enumerate(self.tokens)
        )
        edges = tuple(DependencyEdge(h, d, lab) for h, d, lab in self.edges)
        ment = tuple(EntityMention(m.id, index, m.head, m.span, m.label) for m in self.mentions)
        trig = tuple(GoldTrigger(t.id, index, t.token, t.event_class) for t in self.triggers)
        return Sentence(index, toks, edges, ment, trig, tuple(self.relations))


class SyntheticCorpus:
    def __init__(self, seed=0):
        self.rng = random.Random(seed)

    # -- small pieces ------------------------------------------------------

    def lexeme(self, cls):
        return _zipf_choice(self.rng, LEXICON[cls])

    def proteins(self, k):
        return self.rng.sample(PROTEINS, k)

    def noun_phrase_protein(self, b: _Builder, head, label, name):
        """Attach a protein to ``head`` as ``name``, ``the name protein`` or ``a protein , name``."""
        r = self.rng.random()
        if r < 0.65:
            p = b.protein(name)
            b.edge(head, p, label)
            return p
        if r < 0.85:
            det = b.tok("the", "DT")
            p = b.protein(name)
            noun = b.tok("protein", "NN")
            b.edge(head, noun, label)
            b.edge(noun, det, "det")
            b.edge(noun, p, "nn")
            return p
        det = b.tok("a", "DT")
        adj = b.tok("novel", "JJ")
        noun = b.tok("protein", "NN")
        b.tok(",", ",")
        p = b.protein(name)
        b.edge(head, noun, label)
        b.edge(noun, det, "det")
        b.edge(noun, adj, "amod")
        b.edge(noun, p, "appos")
        return p

    def protein_list(self, b: _Builder, head, label, names):
        heads = [self.noun_phrase_protein(b, head, label, names[0])]
        for name in names[1:]:
            b.tok("and", "CC")
            p = b.protein(name)
            b.edge(heads[0], p, "conj_and")
            heads.append(p)
        return heads

    # -- event phrases; each returns (head token, trigger id) -------------

    def simple_nominal(self, b: _Builder, cls):
        lex = self.lexeme(cls)
        n = b.tok(lex[3], "NN")
        tid = b.trigger(n, cls)
        if cls == "Binding":
            a, c = self.proteins(2)
            if self.rng.random() < 0.5:
                b.tok("of", "IN")
                pa = self.noun_phrase_protein(b, n, "prep_of", a)
                b.tok("to", "TO")
                pc = b.protein(c)
                b.edge(n, pc, "prep_to")
            else:
                b.tok("between", "IN")
                pa = b.protein(a)
                b.edge(n, pa, "prep_between")
                b.tok("and", "CC")
                pc = b.protein(c)
                b.edge(pa, pc, "conj_and")
            b.rel(tid, "Theme", b.entity_at[pa])
            b.rel(tid, "Theme", b.entity_at[pc])
            return n, tid
        b.tok("of", "IN")
        k = 2 if self.rng.random() < 0.2 else 1
        for p in self.protein_list(b, n, "prep_of", self.proteins(k)):
            b.rel(tid, "Theme", b.entity_at[p])
        return n, tid

    def simple_compound(self, b: _Builder, cls):
        (name,) = self.proteins(1)
        p = b.protein(name)
        lex = self.lexeme(cls)
        n = b.tok(lex[3], "NN")
        b.edge(n, p, "nn")
        tid = b.trigger(n, cls)
        b.rel(tid, "Theme", b.entity_at[p])
        return n, tid

    def with_predicate(self, b: _Builder, phrase, cls):
        if self.rng.random() < 0.5:
            b.tok("The", "DT")
            det = len(b.tokens) - 1
        else:
            det = None
        head, tid = phrase(b, cls)
        if det is not None:
            b.edge(head, det, "det")
        aux = b.tok("was", "VBD", "be")
        lemma, word = self.rng.choice(PREDICATES)
        v = b.tok(word, "VBN", lemma)
        b.edge(v, head, "nsubjpass")
        b.edge(v, aux, "auxpass")
        return v

    def active(self, b: _Builder, cls):
        a, c = self.proteins(2)
        lex = self.lexeme(cls)
        pa = b.protein(a)
        v = b.tok(lex[1], "VBZ", lex[0])
        tid = b.trigger(v, cls)
        b.edge(v, pa, "nsubj")
        if cls == "Binding":
            prep = self.rng.choice(["to", "with"])
            b.tok(prep, "TO" if prep == "to" else "IN")
            pc = b.protein(c)
            b.edge(v, pc, f"prep_{prep}")
            b.rel(tid, "Theme", b.entity_at[pa])
            b.rel(tid, "Theme", b.entity_at[pc])
            return v
        pc = self.noun_phrase_protein(b, v, "dobj", c)
        b.rel(tid, "Theme", b.entity_at[pc])
        if cls in REGULATION_CLASSES:
            b.rel(tid, "Cause", b.entity_at[pa])
        return v

    def passive(self, b: _Builder, cls):
        a, c = self.proteins(2)
        lex = self.lexeme(cls)
        pa = b.protein(a)
        aux = b.tok(self.rng.choice(["is", "was"]), "VBZ", "be")
        v = b.tok(lex[2], "VBN", lex[0])
        tid = b.trigger(v, cls)
        b.edge(v, pa, "nsubjpass")
        b.edge(v, aux, "auxpass")
        b.rel(tid, "Theme", b.entity_at[pa])
        if self.rng.random() < 0.6:
            b.tok("by", "IN")
            pc = b.protein(c)
            b.edge(v, pc, "agent")
            if cls in REGULATION_CLASSES:
                b.rel(tid, "Cause", b.entity_at[pc])
            elif cls == "Binding":
                b.rel(tid, "Theme", b.entity_at[pc])
        return v

    def inner_event(self, b: _Builder, depth):
        """Nominal event phrase usable as a regulation Theme."""
        if depth > 0 and self.rng.random() < 0.25:
            cls = self.rng.choice(REGULATION_CLASSES)
            return self.regulation_nominal(b, cls, depth - 1)
        cls = self.rng.choice([c for c in SIMPLE_CLASSES if c != "Binding"])
        if self.rng.random() < 0.3:
            return self.simple_compound(b, cls)
        return self.simple_nominal(b, cls)

    def regulation_nominal(self, b: _Builder, cls, depth=1):
        lex = self.lexeme(cls)
        n = b.tok(lex[3], "NN")
        tid = b.trigger(n, cls)
        b.tok("of", "IN")
        if self.rng.random() < 0.5:
            inner, inner_tid = self.inner_event(b, depth)
            b.edge(n, inner, "prep_of")
            b.rel(tid, "Theme", inner_tid)
        else:
            (name,) = self.proteins(1)
            p = self.noun_phrase_protein(b, n, "prep_of", name)
            b.rel(tid, "Theme", b.entity_at[p])
        if self.rng.random() < 0.35:
            b.tok("by", "IN")
            (name,) = self.proteins(1)
            pc = b.protein(name)
            b.edge(n, pc, "prep_by")
            b.rel(tid, "Cause", b.entity_at[pc])
        return n, tid

    def regulation_verbal(self, b: _Builder, cls):
        (a,) = self.proteins(1)
        pa = b.protein(a)
        lex = self.lexeme(cls)
        v = b.tok(lex[1], "VBZ", lex[0])
        tid = b.trigger(v, cls)
        b.edge(v, pa, "nsubj")
        inner, inner_tid = self.inner_event(b, 1)
        b.edge(v, inner, "dobj")
        b.rel(tid, "Theme", inner_tid)
        b.rel(tid, "Cause", b.entity_at[pa])
        return v

    def regulation_passive(self, b: _Builder, cls):
        inner, inner_tid = self.inner_event(b, 1)
        aux = b.tok("was", "VBD", "be")
        lex = self.lexeme(cls)
        v = b.tok(lex[2], "VBN", lex[0])
        tid = b.trigger(v, cls)
        b.edge(v, inner, "nsubjpass")
        b.edge(v, aux, "auxpass")
        b.rel(tid, "Theme", inner_tid)
        if self.rng.random() < 0.6:
            b.tok("by", "IN")
            (c,) = self.proteins(1)
            pc = b.protein(c)
            b.edge(v, pc, "agent")
            b.rel(tid, "Cause", b.entity_at[pc])
        return v

    def recruit(self, b: _Builder):
        cls = self.rng.choice(["Binding", "Localization"])
        a, c = self.proteins(2)
        pa = b.protein(a)
        v = b.tok(RECRUIT[1], "VBZ", RECRUIT[0])
        tid = b.trigger(v, cls)
        b.edge(v, pa, "nsubj")
        pc = b.protein(c)
        b.edge(v, pc, "dobj")
        b.tok("after", "IN")
        t = b.tok("treatment", "NN")
        b.edge(v, t, "prep_after")
        b.tok("in", "IN")
        det = b.tok("the", "DT")
        cue = b.tok("complex" if cls == "Binding" else "nucleus", "NN")
        b.edge(t, cue, "prep_in")
        b.edge(cue, det, "det")
        b.rel(tid, "Theme", b.entity_at[pc])
        if cls == "Binding":
            b.rel(tid, "Theme", b.entity_at[pa])
        return v

    def decoy(self, b: _Builder):
        """A clause without events that reuses a trigger noun as a modifier."""
        lex = self.lexeme(self.rng.choice(list(LEXICON)))
        (a,) = self.proteins(1)
        frame = self.rng.random()
        if frame < 0.35:
            pa = b.protein(a)
            aux = b.tok("was", "VBD", "be")
            v = b.tok("cloned", "VBN", "clone")
            b.tok("into", "IN")
            det = b.tok("an", "DT")
            mod = b.tok(lex[3], "NN")
            head = b.tok(self.rng.choice(["vector", "construct", "plasmid"]), "NN")
            b.edge(v, pa, "nsubjpass")
            b.edge(v, aux, "auxpass")
            b.edge(v, head, "prep_into")
        elif frame < 0.7:
            det = b.tok("The", "DT")
            mod = b.tok(lex[3], "NN")
            head = b.tok(self.rng.choice(DECOY_HEADS), "NN")
            b.tok("of", "IN")
            pa = b.protein(a)
            aux = b.tok("was", "VBD", "be")
            v = b.tok(self.rng.choice(["mutated", "mapped", "deleted"]), "VBN")
            b.edge(head, pa, "prep_of")
            b.edge(v, head, "nsubjpass")
            b.edge(v, aux, "auxpass")
        else:
            pa = b.protein(a)
            v = b.tok("contains", "VBZ", "contain")
            det = b.tok("a", "DT")
            adj = b.tok("putative", "JJ")
            mod = b.tok(lex[3], "NN")
            head = b.tok(self.rng.choice(DECOY_HEADS), "NN")
            b.edge(v, pa, "nsubj")
            b.edge(v, head, "dobj")
            b.edge(head, adj, "amod")
        b.edge(head, det, "det")
        b.edge(head, mod, "nn")
        return v

    # -- sentences ---------------------------------------------------------

    def clause(self, b: _Builder):
        r = self.rng.random()
        if r < 0.07:
            return self.recruit(b)
        if r < 0.25:
            return self.decoy(b)
        if r < 0.62:
            cls = self.rng.choice(SIMPLE_CLASSES)
            style = self.rng.random()
            if style < 0.4:
                return self.with_predicate(b, self.simple_nominal, cls)
            if style < 0.55 and cls != "Binding":
                return self.with_predicate(b, self.simple_compound, cls)
            if style < 0.8:
                return self.active(b, cls)
            return self.passive(b, cls)
        cls = self.rng.choice(REGULATION_CLASSES)
        style = self.rng.random()
        if style < 0.3:
            return self.with_predicate(b, lambda bb, c: self.regulation_nominal(bb, c, 1), cls)
        if style < 0.55:
            return self.regulation_verbal(b, cls)
        if style < 0.75:
            return self.regulation_passive(b, cls)
        if style < 0.9:
            return self.active(b, cls)
        return self.passive(b, cls)

    def sentence(self, doc_ids, index) -> Sentence:
        b = _Builder(doc_ids)
        found = None
        context = None
        r = self.rng.random()
        if r < 0.2:
            we = b.tok("We", "PRP", "we")
            found = b.tok("found", "VBD", "find")
            b.edge(found, we, "nsubj")
            that = b.tok("that", "IN")
        elif r < 0.35:
            b.tok("In", "IN", "in")
            (name,) = self.proteins(1)
            p = b.protein(name)
            noun = b.tok(self.rng.choice(CONTEXT_NOUNS), "NNS")
            b.edge(noun, p, "nn")
            b.tok(",", ",")
            context = noun
        root = self.clause(b)
        if found is not None:
            b.edge(found, root, "ccomp")
            b.edge(root, that, "complm")
        if context is not None:
            b.edge(root, context, "prep_in")
        if self.rng.random() < 0.2:
            b.tok(",", ",")
            mark = b.tok("whereas", "IN")
            (name,) = self.proteins(1)
            p = b.protein(name)
            v = b.tok("remained", "VBD", "remain")
            adj = b.tok("unchanged", "JJ")
            b.edge(root, v, "advcl")
            b.edge(v, mark, "mark")
            b.edge(v, p, "nsubj")
            b.edge(v, adj, "acomp")
        b.tok(".", ".")
        return b.build(index)

    def document(self, doc_id) -> Document:
        ids = [0]
        n = self.rng.choice([1, 1, 2, 2, 3])
        return Document(doc_id, tuple(self.sentence(ids, i) for i in range(n)))


def generate_corpus(n_docs: int, seed: int = 0, prefix: str = "D") -> list[Document]:
    gen = SyntheticCorpus(seed)
    return [gen.document(f"{prefix}{i:04d}") for i in range(n_docs)]


def synthetic_splits(n_train: int = 1000, n_dev: int = 300, seed: int = 0):
    """``(train, dev)`` generated from independent streams of one seed."""
    return generate_corpus(n_train, seed, "train"), generate_corpus(n_dev, seed + 10_000, "dev")
