"""
Biased vs. plain TextRank on one article
========================================

A short made-up news story about a fitness tracker study, and a claim about it.
We embed the sentences with TF-IDF, build the similarity graph and compare the
restart distributions and scores of TextRank and Biased TextRank.
"""

import numpy as np

from claimex.corpus import BiasQuery, Document
from claimex.embeddings import embed_document, fit_tfidf
from claimex.ranking import RankParams, bias_restart, biased_textrank, build_graph, textrank, uniform_restart

article = (
    "A new study followed 2,000 adults who wore fitness trackers for a year. "
    "The company that makes the trackers paid for the study. "
    "Participants who wore the tracker walked about 1,200 more steps per day. "
    "Weight loss was small, averaging less than one kilogram. "
    "Blood pressure did not change in a meaningful way. "
    "The researchers said the trackers mostly helped people who were already active. "
    "Dr. Alvarez, who was not involved, called the results modest. "
    "Trackers cost between 50 and 300 dollars."
)
claim = "Wearing a fitness tracker leads to major weight loss."

doc = Document.from_text("tracker-study", article)
bias = BiasQuery.from_text(claim)
for s in doc.sentences:
    print(s.index, s.text)

#%%
# With only one article the idf is flat; in a corpus it is fitted on all articles.
model = fit_tfidf([doc])
emb = embed_document(model, doc, bias)
graph = build_graph(emb)
print("transition rows sum to", graph.transition.sum(axis=1).round(12))

#%%
# The restart distribution is where the bias enters: sentences that share
# vocabulary with the claim get more of the teleport mass.
restart = bias_restart(emb)
np.set_printoptions(precision=3, suppress=True)
print("uniform restart:", uniform_restart(graph.n).probabilities)
print("bias restart:   ", restart.probabilities)

#%%
params = RankParams(top_k=3)
plain = textrank(graph, doc, params)
biased = biased_textrank(graph, restart, doc, params)
print("TextRank scores:       ", plain.scores)
print("Biased TextRank scores:", biased.scores)
print()
print("TextRank picks:       ", plain.selected, "\n ", plain.explanation_text)
print("Biased TextRank picks:", biased.selected, "\n ", biased.explanation_text)
print(f"converged after {biased.iterations_used} iterations")
