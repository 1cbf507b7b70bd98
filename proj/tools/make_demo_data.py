#!/usr/bin/env python3
"""Writes the offline demo corpus: datasets, configs, human EL and mock fixtures.

Run from the repository root:  python3 tools/make_demo_data.py
Output is deterministic; rerunning it must leave `git status` clean.
"""

import json
import random
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
DATA = ROOT / "data"

REASONING = "deepseek-reasoner"
BASE = "deepseek-chat"
JUDGE = "qwen2.5-7b-instruct"


def siqa(id_, scenario, question, options, likert):
    return {
        "id": id_,
        "task_kind": "MCQA",
        "context": scenario,
        "question": question,
        "options": [{"letter": l, "text": t} for l, t in zip("ABC", options)],
        "gold": {"likert": likert},
    }


def nli(id_, premise, hypothesis, sources):
    return {
        "id": id_,
        "task_kind": "NLI",
        "context": premise,
        "question": hypothesis,
        "options": [{"letter": l, "text": t} for l, t in zip("ABC", ["Entailment", "Neutral", "Contradiction"])],
        "gold": {"distribution_sources": [{"name": n, "probs": p} for n, p in sources]},
    }


ASH_COT = (ROOT / "tests" / "fixtures" / "siqa_ash_cot.txt").read_text().strip()

# Each case: instance, CoT, final letter, parser listing, structured document,
# GenEX explanations per option.
CASES = {
    "siqa_demo": [
        {
            "instance": siqa(
                "siqa-ash",
                "Ash redeemed themselves after retaking the test they failed.",
                "How will Ash feel as a result?",
                ["relieved", "accomplished", "proud"],
                [[4, 4, 5], [5, 4, 5], [3, 4, 4]],
            ),
            "cot": ASH_COT,
            "answer": "B",
            "parser": (
                "**Option A (relieved)**\n"
                "- Support: \"Relieved\"(A) would mean that Ash is feeling a release from the stress or worry about having failed before.\n"
                "- Support: Passing the test might take away that anxiety.\n"
                "- Oppose: Relieved is possible, but maybe the primary feeling is accomplishment.\n"
                "**Option B (accomplished)**\n"
                "- Support: Since Ash had to retake the test, putting in the work to pass it now would make them feel like they've accomplished something.\n"
                "- Support: If Ash worked hard to retake and pass, then feeling accomplished makes sense.\n"
                "**Option C (proud)**\n"
                "- Support: Proud could also be there\n"
                "- Oppose: It's a bit similar to accomplished but more focused on the personal pride aspect."
            ),
            "structured": (
                "```json\n{\n"
                "  \"Option A\": {\n"
                "    \"support\": [\"\\\"Relieved\\\"(A) would mean that Ash is feeling a release from the stress or worry about having failed before.\", \"Passing the test might take away that anxiety.\"],\n"
                "    \"oppose\": [\"Relieved is possible, but maybe the primary feeling is accomplishment.\"]\n"
                "  },\n"
                "  \"Option B\": {\n"
                "    \"support\": [\"Since Ash had to retake the test, putting in the work to pass it now would make them feel like they've accomplished something.\", \"If Ash worked hard to retake and pass, then feeling accomplished makes sense.\"],\n"
                "    \"oppose\": []\n"
                "  },\n"
                "  \"Option C\": {\n"
                "    \"support\": [\"Proud could also be there\"],\n"
                "    \"oppose\": [\"It's a bit similar to accomplished but more focused on the personal pride aspect.\"],\n"
                "  }\n"
                "}\n```"
            ),
            "genex": {
                "relieved": "1. Ash no longer has to worry about the failed test.\n2. The pressure of a retake is finally gone.",
                "accomplished": "1. Ash worked hard and succeeded on the second attempt.\n2. Redeeming a failure is an achievement.",
                "proud": "- Ash overcame a setback through effort.\n- Others saw Ash turn the result around.",
            },
        },
        {
            "instance": siqa(
                "siqa-jordan",
                "Jordan lent Casey their notes the night before the exam.",
                "What will Casey want to do next?",
                ["thank Jordan", "study the notes", "ignore the exam"],
                [[5, 4, 4], [5, 5, 4], [1, 2, 1]],
            ),
            "cot": (
                "The scenario says Jordan lent Casey notes right before an exam. Casey probably needs the notes to prepare, "
                "so studying them is the obvious next step. Thanking Jordan is polite and likely, however it is not what "
                "Casey would do first with the exam so close. Ignoring the exam makes no sense because Casey asked for the "
                "notes. So the best answer is B."
            ),
            "answer": "B",
            "parser": (
                "**Option A (thank Jordan)**\n"
                "- Support: Thanking Jordan is polite and likely\n"
                "- Oppose: it is not what Casey would do first with the exam so close.\n"
                "**Option B (study the notes)**\n"
                "- Support: Casey probably needs the notes to prepare, so studying them is the obvious next step.\n"
                "**Option C (ignore the exam)**\n"
                "- Oppose: Ignoring the exam makes no sense because Casey asked for the notes."
            ),
            "structured": json.dumps(
                {
                    "Option A": {
                        "support": ["Thanking Jordan is polite and likely"],
                        "oppose": ["it is not what Casey would do first with the exam so close."],
                    },
                    "Option B": {
                        "support": ["Casey probably needs the notes to prepare, so studying them is the obvious next step."],
                        "oppose": [],
                    },
                    "Option C": {
                        "support": [],
                        "oppose": ["Ignoring the exam makes no sense because Casey asked for the notes."],
                    },
                },
                indent=2,
            ),
            "genex": {
                "thank Jordan": "1. Jordan did Casey a favour.\n2. Gratitude is the polite response.",
                "study the notes": "1. The exam is tomorrow.\n2. The notes are only useful if Casey reads them.",
                "ignore the exam": "1. Casey might have given up on the course.",
            },
        },
        {
            "instance": siqa(
                "siqa-riley",
                "Riley forgot their umbrella and walked home in the rain.",
                "How would Riley feel afterwards?",
                ["wet and annoyed", "refreshed", "proud"],
                [[5, 5, 4], [2, 3, 2], [1, 1, 2]],
            ),
            "cot": (
                "Riley walked home in the rain without an umbrella. Anyone caught like that ends up soaked, and forgetting "
                "the umbrella is frustrating. Some people enjoy rain, so refreshed is not impossible. Pride does not fit "
                "since forgetting something is not an achievement. The answer is A."
            ),
            "answer": "A",
            "parser": (
                "**Option A (wet and annoyed)**\n"
                "- Support: Anyone caught like that ends up soaked\n"
                "- Support: forgetting the umbrella is frustrating.\n"
                "**Option B (refreshed)**\n"
                "- Support: Some people enjoy rain, so refreshed is not impossible.\n"
                "**Option C (proud)**\n"
                "- Oppose: Pride does not fit since forgetting something is not an achievement."
            ),
            "structured": json.dumps(
                {
                    "A": {
                        "support": ["Anyone caught like that ends up soaked", "forgetting the umbrella is frustrating."],
                        "oppose": [],
                    },
                    "B": {"support": ["Some people enjoy rain, so refreshed is not impossible."], "oppose": []},
                    "C": {"support": [], "oppose": ["Pride does not fit since forgetting something is not an achievement."]},
                },
                indent=2,
            ),
            "genex": {
                "wet and annoyed": "1. Rain soaks anyone without cover.\n2. Forgetting things is irritating.",
                "refreshed": "1. A cool walk in the rain can feel good.",
                "proud": "",
            },
        },
    ],
    "nli_demo": [
        {
            "instance": nli(
                "nli-guitar",
                "A man is playing a guitar on stage.",
                "A musician is performing.",
                [("mnli", [0.8, 0.2, 0.0]), ("varierr", [0.5, 0.5, 0.0])],
            ),
            "cot": (
                "A man playing guitar on a stage is performing music, so he is a musician in that moment. Then again, "
                "he could be tuning or rehearsing, which is not quite a performance. Nothing contradicts the statement. "
                "So the answer is A."
            ),
            "answer": "A",
            "parser": (
                "Entailment:\n- Support: A man playing guitar on a stage is performing music, so he is a musician in that moment.\n"
                "Neutral:\n- Support: he could be tuning or rehearsing, which is not quite a performance.\n"
                "Contradiction:\n- Oppose: Nothing contradicts the statement."
            ),
            "structured": json.dumps(
                {
                    "Entailment": {
                        "support": ["A man playing guitar on a stage is performing music, so he is a musician in that moment."],
                        "oppose": [],
                    },
                    "Neutral": {"support": ["he could be tuning or rehearsing, which is not quite a performance."], "oppose": []},
                    "Contradiction": {"support": [], "oppose": ["Nothing contradicts the statement."]},
                },
                indent=2,
            ),
            "genex": {
                "Entailment": "1. Playing guitar on stage is a performance.",
                "Neutral": "1. The man may only be rehearsing.",
                "Contradiction": "1. A man on stage might not be a musician by trade.",
            },
        },
        {
            "instance": nli(
                "nli-dog",
                "A dog runs through the snow.",
                "The dog is cold.",
                [("mnli", [0.2, 0.7, 0.1]), ("varierr", [0.1, 0.8, 0.1])],
            ),
            "cot": (
                "Snow is cold, so the dog could feel cold. However, many dogs have thick fur and enjoy snow. The premise "
                "says nothing about how the dog feels. The answer is B."
            ),
            "answer": "B",
            "parser": (
                "Entailment:\n- Support: Snow is cold, so the dog could feel cold.\n"
                "Neutral:\n- Support: The premise says nothing about how the dog feels.\n"
                "Contradiction:\n- Support: many dogs have thick fur and enjoy snow."
            ),
            "structured": json.dumps(
                {
                    "Entailment": {"support": ["Snow is cold, so the dog could feel cold."], "oppose": []},
                    "Neutral": {"support": ["The premise says nothing about how the dog feels."], "oppose": []},
                    "Contradiction": {"support": ["many dogs have thick fur and enjoy snow."], "oppose": []},
                },
                indent=2,
            ),
            "genex": {
                "Entailment": "1. Snow is cold.",
                "Neutral": "1. The dog's temperature is not described.\n2. Running keeps a dog warm.",
                "Contradiction": "1. Dogs bred for snow do not feel cold.",
            },
        },
        {
            "instance": nli(
                "nli-kitchen",
                "Two women are cooking in a kitchen.",
                "Nobody is cooking.",
                [("mnli", [0.0, 0.1, 0.9]), ("varierr", [0.05, 0.05, 0.9])],
            ),
            "cot": (
                "The premise states that two women are cooking. The statement claims nobody is cooking, which directly "
                "conflicts with it. Unless the scene changed, there is no way both hold. The answer is C."
            ),
            "answer": "C",
            "parser": (
                "Entailment:\n- Oppose: The statement claims nobody is cooking, which directly conflicts with it.\n"
                "Neutral:\n- Support: Unless the scene changed\n"
                "Contradiction:\n- Support: The premise states that two women are cooking."
            ),
            "structured": json.dumps(
                {
                    "Entailment": {"support": [], "oppose": ["The statement claims nobody is cooking, which directly conflicts with it."]},
                    "Neutral": {"support": ["Unless the scene changed"], "oppose": []},
                    "Contradiction": {"support": ["The premise states that two women are cooking."], "oppose": []},
                },
                indent=2,
            ),
            "genex": {
                "Entailment": "",
                "Neutral": "1. The women may have stopped cooking.",
                "Contradiction": "1. Two women cooking means someone is cooking.\n2. The statement denies the premise.",
            },
        },
    ],
}

HUMAN = {
    "siqa_demo": {
        "siqa-ash": {
            "instance_id": "siqa-ash",
            "provenance": "Human",
            "options": {
                "A": {
                    "support": ["Passing the test might take away that anxiety."],
                    "oppose": ["redemption often involves not just relief but also a sense of achievement."],
                },
                "B": {
                    "support": [
                        "Since Ash had to retake the test, putting in the work to pass it now would make them feel like they've accomplished something."
                    ],
                    "oppose": [],
                },
                "C": {
                    "support": ["Proud could also be there"],
                    "oppose": ["It's a bit similar to accomplished but more focused on the personal pride aspect."],
                },
            },
        }
    }
}

SCHEMA = {"siqa_demo": "siqa", "nli_demo": "nli"}


def gold_preference(inst):
    """Per-option gold strength: mean Likert or mean probability."""
    g = inst["gold"]
    if "likert" in g:
        return [sum(r) / len(r) for r in g["likert"]]
    srcs = [s["probs"] for s in g["distribution_sources"]]
    return [sum(p[i] for p in srcs) / len(srcs) for i in range(len(srcs[0]))]


# Judge prompt families, most specific first. Each tuple: (label, contains, noise).
GROUPS = [
    ("el-both", ["Explanations: Option", "oppose: ["], 0.15),
    ("el-support", ["Explanations: Option"], 0.35),
    ("free-text", ["Explanations:"], 0.6),
    ("baseline", [], 0.9),
]


def judge_rules(inst, rng):
    letters = [o["letter"] for o in inst["options"]]
    texts = [o["text"] for o in inst["options"]]
    pref = gold_preference(inst)
    span = max(pref) - min(pref) or 1.0
    rules = []
    for label, needles, noise in GROUPS:
        base = [inst["context"]] + needles
        extra_not = [] if label != "baseline" else ["Explanations:"]
        for run in range(3):
            noisy = [p / span + rng.gauss(0.0, noise) for p in pref]
            order = sorted(range(len(letters)), key=lambda k: -noisy[k])
            reply = " ".join(letters[k] for k in order)
            if run == 2 and label == "free-text":
                reply = letters[order[0]]  # a partial ranking
            if run == 1 and label == "baseline" and inst["id"].endswith("riley"):
                reply = "I cannot decide."  # an invalid run
            m = {"model": JUDGE, "contains": base, "run_index": run, "logits": False}
            if extra_not:
                m["not_contains"] = extra_not
            for k, text in enumerate(texts):
                score = min(5, max(1, round(1 + 4 * (pref[k] - min(pref)) / span + rng.gauss(0.0, 1.5 * noise))))
                sm = dict(m, contains=base + ["Answer: " + text + "\n", "Rating:"])
                rules.append({"match": sm, "response": {"text": str(score)}})
            rules.append({"match": dict(m, contains=base + ["separated by spaces"]), "response": {"text": reply}})
            logits = {letters[k]: round(2.0 * noisy[k], 4) for k in range(len(letters))}
            rules.append({"match": dict(m, logits=True), "response": {"text": letters[order[0]], "first_token_logits": logits}})
    return rules


def extraction_rules(case):
    inst = case["instance"]
    first_cot_words = case["cot"][:40]
    rules = [
        {
            "match": {"model": REASONING, "contains": [inst["context"], inst["question"]], "not_contains": ["extract and list"]},
            "response": {"text": case["answer"], "reasoning": case["cot"]},
        },
        {
            "match": {"model": REASONING, "contains": ["extract and list", first_cot_words]},
            "response": {"text": case["parser"]},
        },
        {
            "match": {"model": BASE, "system_contains": "JSON", "contains": case["parser"][:60]},
            "response": {"text": case["structured"]},
        },
    ]
    for opt in inst["options"]:
        label = opt["text"].lower() if inst["task_kind"] == "NLI" else opt["text"]
        rules.append(
            {
                "match": {"model": BASE, "no_system": True, "contains": [inst["context"], " is " + label + " given"]},
                "response": {"text": case["genex"][opt["text"]]},
            }
        )
    return rules


def config(name):
    variants = ["baseline", "Raw", "Filtered", "Filtered-sup", "Filtered-opp", "EL-sup", "EL-opp", "GenEX", "CoT_parser"]
    doc = {
        "dataset": {"path": name + ".jsonl", "schema": SCHEMA[name], "name": name},
        "models": {
            "reasoning": {"name": "reasoner", "model": REASONING, "base_url": "https://api.deepseek.com/v1", "api_key_env": "DEEPSEEK_API_KEY"},
            "base": {"name": "base", "model": BASE, "base_url": "https://api.deepseek.com/v1", "api_key_env": "DEEPSEEK_API_KEY"},
            "judges": [{"name": "qwen", "model": JUDGE, "base_url": "http://localhost:8000/v1", "api_key_env": "JUDGE_API_KEY"}],
            "genex": "base",
        },
        "variants": variants,
        "methods": ["rank", "logits", "score"],
        "workers": 2,
        "seed": 0,
        "min_ratio": 0.0,
        "tau": "b",
        "max_failure_fraction": 0.5,
        "judge": {"temperature": 0.7, "max_tokens": 64},
        "retry": {"attempts": 3, "initial_backoff_ms": 1000},
    }
    if name in HUMAN:
        doc["variants"].append("HumanEX")
        doc["human_el_dir"] = "human/" + name
    return doc


def write(path, text):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def main():
    for name, cases in CASES.items():
        rng = random.Random(name)
        write(DATA / (name + ".jsonl"), "".join(json.dumps(c["instance"]) + "\n" for c in cases))
        write(DATA / (name + ".json"), json.dumps(config(name), indent=2) + "\n")
        rules = []
        for c in cases:
            rules += extraction_rules(c)
        for c in cases:
            rules += judge_rules(c["instance"], rng)
        write(DATA / "mock" / name / "fixtures.json", json.dumps(rules, indent=1) + "\n")
        for id_, doc in HUMAN.get(name, {}).items():
            write(DATA / "human" / name / (id_ + ".json"), json.dumps(doc, indent=2) + "\n")


if __name__ == "__main__":
    main()
