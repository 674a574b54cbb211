"""Bundled deterministic fixtures for tests, demos, and acceptance checks.

The retrieval fixture builds a corpus with per-question vocabulary namespaces
in three flavors:

* keyword questions: the gold document shares one rare term plus five
  namespaced terms with the query, while twelve decoys repeat two of those
  terms many times. BM25 puts the gold first; raw bag-of-words cosine prefers
  the repetition-heavy decoys, so dense retrieval misses it.
* paraphrase questions: the query uses a variant word that the hash
  embedder's synonym table maps onto the gold document's vocabulary, and its
  other shared terms are deliberately common across the corpus. Twelve bait
  documents carry four rare query terms each, outscoring the gold under BM25,
  while cosine over canonicalized terms puts the gold first.
* split questions: one gold of each flavor behind a single ", and what"
  question, so each retrieval source finds exactly one gold and only the
  hybrid pool finds both.

Every document's filler tokens are chosen to avoid the hash buckets of its
own question's terms, which keeps the designed score margins exact.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .chunking import Document
from .classify import Question, QuestionType
from .mocks import HashEmbedder

EMBED_DIM = 2048

_S_STEMS = ("spindle", "rotor", "gasket", "flywheel", "camshaft")
_M_POOL = (
    "coverage", "fleet", "policy", "region", "audit",
    "ledger", "tariff", "quota", "permit", "census",
    "charter", "levy", "mandate", "registry", "zoning",
)
_R_STEMS = ("basalt", "gneiss", "schist", "shale")

_REP_COUNT = 12       # repetition decoys per keyword namespace
_BAIT_COUNT = 12      # rare-term bait documents per paraphrase namespace
_REP_TF = 8           # repetitions of each echoed term inside a decoy
_GOLD_S_FILLERS = 19  # keyword golds are long so cosine dilutes them
_GOLD_D_FILLERS = 3   # paraphrase golds are short so cosine favors them
_REP_FILLERS = 8
_BAIT_FILLERS = 16


@dataclass
class RetrievalFixture:
    docs: list[Document]
    questions: list[Question]
    synonyms: dict[str, str] = field(default_factory=dict)
    embedder_dim: int = EMBED_DIM

    def make_embedder(self) -> HashEmbedder:
        return HashEmbedder(dim=self.embedder_dim, synonyms=self.synonyms)


def _safe_tokens(embedder: HashEmbedder, forbidden: set[int], prefix: str, count: int) -> list[str]:
    """Deterministic junk tokens whose hash buckets avoid the forbidden set."""
    out: list[str] = []
    n = 0
    while len(out) < count:
        token = f"{prefix}{n}"
        n += 1
        bucket, _ = embedder._bucket(token)
        if bucket not in forbidden:
            out.append(token)
    return out


def _buckets(embedder: HashEmbedder, tokens: list[str]) -> set[int]:
    return {embedder._bucket(embedder.synonyms.get(t, t))[0] for t in tokens}


def _sentences(tokens: list[str], per_sentence: int = 8) -> str:
    parts = []
    for i in range(0, len(tokens), per_sentence):
        parts.append(" ".join(tokens[i : i + per_sentence]) + ".")
    return " ".join(parts)


def _s_terms(i: int) -> list[str]:
    return [f"{stem}{i}" for stem in _S_STEMS]


def _m_window(i: int) -> list[str]:
    return [_M_POOL[(2 * i + j) % 15] for j in range(5)]


def _m_outside(i: int, j: int) -> list[str]:
    # five pool words outside this namespace's window, rotated per decoy
    return [_M_POOL[(2 * i + 5 + ((j + 2 * k) % 10)) % 15] for k in range(5)]


def _keyword_half(i: int) -> tuple[str, list[str]]:
    rare = f"zeolite{i}"
    return rare, _s_terms(i)


def _paraphrase_half(i: int) -> tuple[str, str, list[str], list[str]]:
    syn = f"motorcar{i}"
    base = f"autocar{i}"
    rares = [f"{stem}{i}" for stem in _R_STEMS]
    return syn, base, _m_window(i), rares


def _keyword_docs(
    i: int, prefix: str, embedder: HashEmbedder, forbidden: set[int]
) -> list[Document]:
    rare, s = _keyword_half(i)
    docs = []
    gold_tokens = [rare] + s + _safe_tokens(embedder, forbidden, f"pad{prefix}{i}g", _GOLD_S_FILLERS)
    docs.append(Document(doc_id=f"{prefix}{i:02d}-gold", text=_sentences(gold_tokens)))
    for j in range(_REP_COUNT):
        tokens = [s[0]] * _REP_TF + [s[1]] * _REP_TF
        tokens += _m_outside(i, j)
        tokens += _safe_tokens(embedder, forbidden, f"pad{prefix}{i}r{j}", _REP_FILLERS)
        docs.append(Document(doc_id=f"{prefix}{i:02d}-rep{j:02d}", text=_sentences(tokens)))
    return docs


def _paraphrase_docs(
    i: int, prefix: str, embedder: HashEmbedder, forbidden: set[int]
) -> list[Document]:
    _, base, window, rares = _paraphrase_half(i)
    docs = []
    gold_tokens = [base] + window + _safe_tokens(embedder, forbidden, f"pad{prefix}{i}g", _GOLD_D_FILLERS)
    docs.append(Document(doc_id=f"{prefix}{i:02d}-gold", text=_sentences(gold_tokens)))
    for j in range(_BAIT_COUNT):
        tokens = list(rares)
        tokens += _safe_tokens(embedder, forbidden, f"pad{prefix}{i}b{j}", _BAIT_FILLERS)
        docs.append(Document(doc_id=f"{prefix}{i:02d}-bait{j:02d}", text=_sentences(tokens)))
    return docs


def _keyword_question(i: int) -> str:
    rare, s = _keyword_half(i)
    return f"What improvements does {rare} bring to {' '.join(s)} workflows?"


def _paraphrase_question(i: int) -> str:
    syn, _, window, rares = _paraphrase_half(i)
    return (
        f"How can {syn} teams improve {' '.join(window)} results "
        f"while meeting {' '.join(rares)} rules?"
    )


def _split_question(i: int) -> str:
    rare, s = _keyword_half(i)
    syn, _, window, rares = _paraphrase_half(i)
    return (
        f"How do {rare} {' '.join(s)} deployments perform, "
        f"and what are the {' '.join(window)} impacts for {syn} {' '.join(rares)} programs?"
    )


def retrieval_fixture() -> RetrievalFixture:
    """30 questions over a 520-document corpus: 10 keyword-favoring,
    10 paraphrase-favoring, 10 split questions with one gold of each kind."""
    synonyms: dict[str, str] = {}
    for i in range(10, 30):
        syn, base, _, _ = _paraphrase_half(i)
        synonyms[syn] = base
    embedder = HashEmbedder(dim=EMBED_DIM, synonyms=synonyms)

    docs: list[Document] = []
    questions: list[Question] = []

    for i in range(10):
        question = _keyword_question(i)
        forbidden = _buckets(embedder, question.lower().replace("?", "").split())
        docs.extend(_keyword_docs(i, "s", embedder, forbidden))
        questions.append(
            Question(
                id=f"q-s{i:02d}",
                text=question,
                gold_answer=f"Keyword reference answer {i}.",
                gold_doc_ids=(f"s{i:02d}-gold",),
            )
        )

    for i in range(10, 20):
        question = _paraphrase_question(i)
        forbidden = _buckets(embedder, question.lower().replace("?", "").split())
        docs.extend(_paraphrase_docs(i, "d", embedder, forbidden))
        questions.append(
            Question(
                id=f"q-d{i:02d}",
                text=question,
                gold_answer=f"Paraphrase reference answer {i}.",
                gold_doc_ids=(f"d{i:02d}-gold",),
            )
        )

    for i in range(20, 30):
        question = _split_question(i)
        forbidden = _buckets(embedder, question.lower().replace("?", "").replace(",", "").split())
        docs.extend(_keyword_docs(i, "xs", embedder, forbidden))
        docs.extend(_paraphrase_docs(i, "xd", embedder, forbidden))
        questions.append(
            Question(
                id=f"q-x{i:02d}",
                text=question,
                gold_answer=f"Split reference answer {i}.",
                gold_doc_ids=(f"xs{i:02d}-gold", f"xd{i:02d}-gold"),
            )
        )

    return RetrievalFixture(docs=docs, questions=questions, synonyms=synonyms)


# --- decomposition fixture -------------------------------------------------

_A_STEMS = ("anode", "briar", "cobalt", "dynamo")
_B_STEMS = ("ozone", "pylon", "quill", "raptor")
_MIX_COUNT = 12


def decomposition_fixture() -> RetrievalFixture:
    """20 two-gold questions whose halves have disjoint vocabularies.

    Mixed decoys share three terms with each half, so they dominate retrieval
    for the whole question while each half alone ranks its own gold first.
    """
    embedder = HashEmbedder(dim=EMBED_DIM)
    docs: list[Document] = []
    questions: list[Question] = []
    for i in range(20):
        a = [f"{stem}{i}" for stem in _A_STEMS]
        b = [f"{stem}{i}" for stem in _B_STEMS]
        question = (
            f"How do {a[0]} {a[1]} systems improve {a[2]} {a[3]} performance, "
            f"and what are the {b[0]} {b[1]} limits of {b[2]} {b[3]} arrays?"
        )
        forbidden = _buckets(embedder, question.lower().replace("?", "").replace(",", "").split())
        gold_a = a + _safe_tokens(embedder, forbidden, f"pada{i}g", 8)
        gold_b = b + _safe_tokens(embedder, forbidden, f"padb{i}g", 8)
        docs.append(Document(doc_id=f"m{i:02d}-gold-a", text=_sentences(gold_a)))
        docs.append(Document(doc_id=f"m{i:02d}-gold-b", text=_sentences(gold_b)))
        for j in range(_MIX_COUNT):
            tokens = a[:3] + b[:3]
            tokens += _safe_tokens(embedder, forbidden, f"padm{i}x{j}", 6)
            docs.append(Document(doc_id=f"m{i:02d}-mix{j:02d}", text=_sentences(tokens)))
        questions.append(
            Question(
                id=f"q-m{i:02d}",
                text=question,
                gold_answer=f"Two-part reference answer {i}.",
                gold_doc_ids=(f"m{i:02d}-gold-a", f"m{i:02d}-gold-b"),
            )
        )
    return RetrievalFixture(docs=docs, questions=questions)


# --- classification fixture --------------------------------------------------

_MULTI_QUESTIONS = [
    # comparison phrasings
    "What is the difference between geothermal heating and district heating for small towns?",
    "How does freight rail compare with inland shipping on fuel use?",
    "Solid-state batteries versus lithium-ion packs: which degrades faster in cold climates?",
    "Is there a meaningful comparison between drip irrigation and pivot irrigation for arid farms?",
    "Compare the privacy guarantees of onion routing and mix networks.",
    "What sets apart supervised pretraining vs. contrastive pretraining for small datasets?",
    "How do timber frames compare against steel frames in seismic zones?",
    "What is the difference between a foehn wind and a katabatic wind?",
    "Graphite moderators versus heavy water moderators: what changes for fuel enrichment?",
    "How does copper cabling compare with fiber for last-mile latency?",
    # multi-aspect phrasings
    "How does tidal power generation scale, and what are the grid integration costs?",
    "Why did container ports adopt automation, and how does labor policy respond?",
    "How is rainwater harvesting regulated, and which subsidies support it?",
    "What drives alpine glacier retreat, and how does it affect downstream reservoirs?",
    "How do mRNA vaccines get stabilized, and what are the cold-chain requirements?",
    "How does the Kiel Canal manage traffic, and what are the toll rules for tankers?",
    "What makes peat soils store carbon, and how does drainage change that?",
    "How are wind turbine blades recycled, and which materials remain landfill-bound?",
    "Why do coral reefs bleach, and how do marine reserves help recovery?",
    # one multi-document need that no surface rule can catch
    "Summarize the economic effects of the 2008 crisis on Greece alongside the recovery path taken by Iceland.",
]

_SINGLE_QUESTIONS = [
    "What year did the Trans-Siberian Railway open along its full length?",
    "Who founded the Bauhaus school of design?",
    "What is a kelvin wave?",
    "What enzyme breaks down lactose in the human gut?",
    "Explain how a heat pump extracts warmth from cold outdoor air.",
    "I'm restoring an old sailboat and want to know what keel design suits shallow coastal waters.",
    "I'm developing new methods for protein analysis and wondering what specific technological improvements are being made to HDX methodology for complex protein systems?",
    "How tall is the Burj Khalifa?",
    "What does the acronym LIDAR stand for?",
    "Why do cast iron pans need seasoning?",
    "What is the boiling point of water at the altitude of La Paz?",
    "As a beginner gardener I keep losing seedlings to damping-off, so what soil treatment prevents it?",
    "How long does a saguaro cactus take to grow its first arm?",
    "What frequency band does marine VHF radio use?",
    "Describe the process by which maple syrup is graded.",
    "What is the warmest month in Reykjavik on average?",
    # these four read as single-document but deliberately trip the rules,
    # mirroring how trigger-happy lexicons over-call multi
    "Is the Eiffel Tower taller than both the Statue of Liberty and the Washington Monument?",
    "What treaty ended the War of the Spanish Succession, and which territories changed hands?",
    "Did the referee call it? Was the goal allowed?",
    "Which is better for beginners: a hardtail or a full-suspension mountain bike, versus renting first?",
]


def classification_fixture() -> list[tuple[Question, QuestionType]]:
    """40 labeled questions, 20 per class, template style after the dataset
    generator's comparison / multi-aspect / factoid / with-premise categories."""
    labeled: list[tuple[Question, QuestionType]] = []
    for n, text in enumerate(_MULTI_QUESTIONS):
        labeled.append((Question(id=f"cm{n:02d}", text=text), QuestionType.MULTI_DOC))
    for n, text in enumerate(_SINGLE_QUESTIONS):
        labeled.append((Question(id=f"cs{n:02d}", text=text), QuestionType.SINGLE_DOC))
    return labeled


def scale_questions(n: int = 500) -> list[Question]:
    """n synthetic questions cycling the retrieval fixture's texts."""
    base = retrieval_fixture().questions
    out = []
    for i in range(n):
        template = base[i % len(base)]
        out.append(
            Question(
                id=f"syn-{i:04d}",
                text=template.text,
                gold_answer=template.gold_answer,
                gold_doc_ids=template.gold_doc_ids,
            )
        )
    return out
