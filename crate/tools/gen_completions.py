"""Writes the perturbed waypoint-form completion corpus used by the parser tests.

python3 tools/gen_completions.py > crates/core/tests/fixtures/completions.json
"""

import json
import random

FORM = (
    "I need to select a waypoint from a numbered list of graph points, frontier points and object points. "
    "The point I have selected is point number: {n}. I am selecting this point because I believe it makes "
    "strategic sense to get me closer to solving my navigation task. My environment can be described as "
    "{env}. My reasoning is that this point {why}."
)

ENVS = [
    "a hallway with several closed doors",
    "an open office with desks and chairs",
    "a classroom with a whiteboard",
    "a corridor next to a staircase",
]
WHYS = [
    "leads toward rooms I have not visited",
    "is close to a detected chair",
    "is new and far from my previous positions",
    "opens onto unexplored space",
]


def number_styles(n):
    return [
        f"point number: {n}.",
        f"point number: [{n}].",
        f"point number [{n}]",
        f"Point Number: {n}",
        f"POINT NUMBER: {n}!",
        f"point number:{n}.",
        f"point number - {n}.",
        f"point number is {n}.",
        f"point number: **{n}**.",
        f"point number: #{n}.",
        f"point number: ({n}).",
        f"point number:\n{n}.",
        f"point number: `{n}`.",
        f"point number = {n};",
        f"point  number: {n}",
    ]


def wrap_styles(body):
    return [
        body,
        "Sure, here is the completed form.\n\n" + body,
        body + "\n\nLet me know if you need anything else.",
        "```\n" + body + "\n```",
        body.replace(". ", ".\n"),
        "  " + body + "  ",
        body.replace("I need to select", "i need to select"),
        "Form:\n" + body,
    ]


def main():
    rng = random.Random(2024)
    entries = []
    while len(entries) < 99:
        n = rng.randint(1, 60)
        num = rng.choice(number_styles(n))
        body = FORM.format(n=n, env=rng.choice(ENVS), why=rng.choice(WHYS))
        body = body.replace(f"point number: {n}.", num)
        if rng.random() < 0.2:
            # drop the description or reasoning sentence
            cut = body.find(" My environment") if rng.random() < 0.5 else body.find(" My reasoning")
            body = body[:cut]
        text = rng.choice(wrap_styles(body))
        entries.append({"text": text, "expected": n})
    # the model forgot to fill in the number
    entries.insert(
        rng.randint(0, 99),
        {"text": FORM.format(n="[insert the graph, frontier or object point numeral number here]", env=ENVS[0], why=WHYS[0]), "expected": None},
    )
    print(json.dumps(entries, indent=1))


if __name__ == "__main__":
    main()
