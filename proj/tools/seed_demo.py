#!/usr/bin/env python3
"""Regenerates data/demo: three short cases, four structured references per
case, four model answers, four human answers, and a replay cache that lets
the preprocess and generate commands run offline.

Usage: tools/seed_demo.py --deval build/deval [--out data/demo]
"""

import argparse
import json
import random
import shutil
import subprocess
from pathlib import Path

HEADINGS = [
    "Introduction",
    "Key Factors in Consideration",
    "Historical & Theoretical Perspectives",
    "Proposed Resolution Strategies",
    "Key Takeaways",
]

CASES = [
    {
        "id": "demo-001",
        "title": "Rounded Numbers in a Grant Report",
        "category": "research integrity",
        "source": "georgia_ctsa",
        "description": (
            "A postdoctoral researcher notices that the principal investigator rounded several "
            "measurements in a grant progress report so that a borderline effect crosses the "
            "significance threshold. The renewal deadline is two days away and the lab's funding "
            "depends on it. The postdoc is listed as a co-author and has been asked to sign off."
        ),
        "pool": [
            [
                "The postdoc faces a conflict between loyalty to the lab and honest reporting.",
                "A co-author who signs a report shares responsibility for its numbers.",
                "The rounding changes the conclusion, not just the presentation.",
            ],
            [
                "Altering values to cross a threshold misrepresents the evidence.",
                "Funding pressure and the short deadline raise the cost of speaking up.",
                "The postdoc depends on the investigator for references and employment.",
                "Reviewers and future patients rely on accurate progress reports.",
            ],
            [
                "Norms of research integrity treat selective rounding as falsification.",
                "A duty-based view holds that truthful reporting is owed regardless of outcome.",
                "A consequence-based view weighs harm to trust in science against harm to the lab.",
            ],
            [
                "Raise the concern privately with the investigator and propose the unrounded values.",
                "Offer to help reframe the result as a promising trend instead of a confirmed effect.",
                "If the investigator refuses, consult the research integrity office confidentially.",
                "Decline to sign a report that contains numbers the postdoc believes are wrong.",
            ],
            [
                "Honest reporting protects both the science and the people who rely on it.",
                "Early, respectful conversation often resolves such problems without escalation.",
                "Institutions should make it safe for junior researchers to raise concerns.",
            ],
        ],
    },
    {
        "id": "demo-002",
        "title": "The Delayed Bridge Inspection",
        "category": "engineering safety",
        "source": "online_ethics_center",
        "description": (
            "A county engineer finds corrosion on a pedestrian bridge during a routine inspection. "
            "Her manager asks her to list the finding as minor so repairs can wait until next "
            "fiscal year, citing budget limits. Closing the bridge would force schoolchildren to "
            "walk along a busy road."
        ),
        "pool": [
            [
                "The engineer must weigh public safety against budget limits and her manager's request.",
                "Both closing and keeping the bridge open carry risks for schoolchildren.",
                "The inspection record is a professional statement she is accountable for.",
            ],
            [
                "Engineering codes place public safety above employer interests.",
                "Downgrading a finding would misstate the condition of the structure.",
                "A detour along a busy road creates a separate hazard for pedestrians.",
                "Budget constraints are real but do not change what the inspection found.",
            ],
            [
                "Professional ethics codes hold that engineers must report hazards accurately.",
                "Past bridge failures show the cost of deferred maintenance.",
                "A utilitarian analysis compares expected harm under each option.",
            ],
            [
                "Record the corrosion accurately and explain its severity in plain terms.",
                "Propose interim measures such as load limits or temporary supports.",
                "Work with the county to arrange a safe walking route if closure is needed.",
                "Escalate to the county's chief engineer if the manager insists on changing the record.",
            ],
            [
                "Accurate records are the foundation of public trust in engineering work.",
                "Interim measures can reduce risk while funding is arranged.",
                "Safety decisions should be made openly with the affected community.",
            ],
        ],
    },
    {
        "id": "demo-003",
        "title": "Shipping with a Known Defect",
        "category": "software responsibility",
        "source": "georgia_ctsa",
        "description": (
            "A software developer at a medical device startup discovers that a dosage calculator "
            "occasionally rounds down in a way that could underdose small patients. Leadership wants "
            "to ship on schedule for a trade show and fix the issue in a later patch. The defect "
            "appears in roughly one of every thousand calculations."
        ),
        "pool": [
            [
                "The developer must decide whether to accept a schedule that ships a known defect.",
                "The defect is rare but its effect on small patients could be serious.",
                "Leadership frames the trade show as essential to the company's survival.",
            ],
            [
                "Patient safety is the primary concern for any medical device.",
                "Regulators expect known defects to be disclosed and assessed.",
                "A later patch may not reach every deployed device quickly.",
                "The developer's expertise gives weight to their warning.",
            ],
            [
                "Software engineering codes ask developers to put public welfare first.",
                "Earlier medical software failures caused harm when warnings were ignored.",
                "A rights-based view holds that patients should not bear hidden risks.",
            ],
            [
                "Document the defect, its frequency and its clinical impact in writing.",
                "Propose a minimal fix or a safe fallback that can ship on schedule.",
                "Ask that the demo build be labeled as not for clinical use if the fix slips.",
                "Report to the regulatory or quality lead if leadership insists on shipping.",
            ],
            [
                "Known safety defects should never be shipped silently.",
                "Clear documentation turns a disagreement into a decision others can review.",
                "Schedules can move; harm to patients cannot be undone.",
            ],
        ],
    },
]

PREPROCESSORS = ["prep-a", "prep-b", "prep-c", "prep-d"]
MODELS = ["model-alpha", "model-beta", "model-gamma", "model-delta"]
PARTICIPANTS = ["p01", "p02", "p03", "p04"]

FILLER = [
    "This situation involves several stakeholders with competing interests.",
    "It is important to consider the broader context.",
    "Different people may reasonably disagree about the best course of action.",
    "Communication and transparency are generally valuable.",
    "The long-term consequences deserve careful thought.",
]


def render(sections):
    out = []
    for heading, body in zip(HEADINGS, sections):
        out.append(f"%{heading}:\n{body}\n")
    return "".join(out)


def pick(rng, sentences, k):
    k = max(1, min(k, len(sentences)))
    return " ".join(rng.sample(sentences, k))


def expert_opinion(case):
    parts = [" ".join(block) for block in case["pool"]]
    return "\n\n".join(parts) + "\n"


def reference_text(case, rng):
    return render([pick(rng, block, len(block) - rng.randint(0, 1)) for block in case["pool"]])


def model_text(case, rng, quality):
    sections = []
    for block in case["pool"]:
        k = max(1, round(len(block) * quality))
        body = pick(rng, block, k)
        extra = round((1.0 - quality) * 3)
        if extra:
            body = body + " " + " ".join(rng.sample(FILLER, extra))
        sections.append(body)
    return render(sections)


OPENERS = {
    "p01": "I think",
    "p02": "In my view,",
    "p03": "The main issue is that",
    "p04": "Honestly,",
}


def human_answer(case, rng, participant):
    picked = rng.sample(case["pool"][1], 2)
    lower = [x[0].lower() + x[1:] for x in picked]
    raw = f"{OPENERS[participant]} {lower[0]} Also, {lower[1]}\n"
    return raw, f"%{HEADINGS[1]}:\n{' '.join(picked)}\n"


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--deval", required=True)
    ap.add_argument("--out", default="data/demo")
    args = ap.parse_args()
    root = Path(args.out)
    if root.exists():
        shutil.rmtree(root)
    root.mkdir(parents=True)
    rng = random.Random(20240611)

    answers = {(c["id"], p): human_answer(c, rng, p) for c in CASES for p in PARTICIPANTS}
    raw = []
    for case in CASES:
        raw.append(
            {
                "id": case["id"],
                "title": case["title"],
                "description": case["description"],
                "category": case["category"],
                "source": case["source"],
                "expert_opinion": expert_opinion(case),
                "human_answers": {p: answers[(case["id"], p)][0] for p in PARTICIPANTS},
            }
        )
    (root / "raw.json").write_text(json.dumps(raw, indent=2, ensure_ascii=False) + "\n")
    subprocess.run([args.deval, "ingest", "--input", str(root / "raw.json"), "--corpus", str(root)], check=True)

    qualities = {"model-alpha": 0.9, "model-beta": 0.7, "model-gamma": 0.5, "model-delta": 0.34}
    for case in CASES:
        for prep in PREPROCESSORS:
            p = root / "references" / case["id"] / f"{prep}.txt"
            p.parent.mkdir(parents=True, exist_ok=True)
            p.write_text(reference_text(case, rng))
        for model in MODELS:
            p = root / "responses" / model / f"{case['id']}.txt"
            p.parent.mkdir(parents=True, exist_ok=True)
            p.write_text(model_text(case, rng, qualities[model]))
        for part in PARTICIPANTS:
            p = root / "humans" / part / f"{case['id']}.txt"
            p.parent.mkdir(parents=True, exist_ok=True)
            p.write_text(answers[(case["id"], part)][1])

    replay = root / "replay"
    for prep in PREPROCESSORS:
        subprocess.run([args.deval, "cache-import", "--corpus", str(root), "--flow", "expert", "--client", prep,
                        "--replay-dir", str(replay)], check=True)
    subprocess.run([args.deval, "cache-import", "--corpus", str(root), "--flow", "human", "--client", "prep-a",
                    "--replay-dir", str(replay)], check=True)
    for model in MODELS:
        subprocess.run([args.deval, "cache-import", "--corpus", str(root), "--flow", "generate", "--client", model,
                        "--replay-dir", str(replay)], check=True)


if __name__ == "__main__":
    main()
