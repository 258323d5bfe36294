"""From highlights to extraction labels, and how ROUGE sees a summary.

    python3 demos/02_labels_and_rouge.py
"""

from hybrid_memnet import Document, derive_labels, lead_baseline, rouge_scores, tokenize
from hybrid_memnet.text import greedy_oracle

doc = Document(
    "demo",
    [
        "Officials met on Monday to discuss the budget .",
        "A powerful storm hit the northern coast overnight .",
        "Thousands of homes lost power after the storm .",
        "The city council will vote next week .",
        "Schools in the region stayed closed on Tuesday .",
    ],
    ["Storm hit the northern coast", "Thousands of homes lost power ; schools closed"],
)

# Greedy selection: add whichever sentence raises the ROUGE objective most,
# stop once nothing helps or three sentences are in.
selected, trace = greedy_oracle(doc)
print("greedy picks", selected, "objective after each pick", [round(x, 4) for x in trace])
print("labels      ", derive_labels(doc))

reference = [t for h in doc.highlights for t in tokenize(h)]
for name, summary in (("LEAD", lead_baseline(doc).text), ("oracle", " ".join(doc.raw_sentences[i] for i in sorted(selected)))):
    scores = rouge_scores(tokenize(summary), [reference])
    cells = "  ".join(f"{k} {100 * v.f1:5.1f}" for k, v in zip(("R-1", "R-2", "R-L"), (scores.rouge1, scores.rouge2, scores.rougeL)))
    print(f"{name:<7}{cells}")
