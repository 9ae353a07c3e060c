"""Show what each ordering strategy does to one small dataset.

Nine items are enough to tell the five strategies apart: two subjects, three
concepts, and three difficulty steps per concept.  Each section prints the
resulting sequence as subject:concept@index tokens in output order, so the
shapes are easy to compare by eye.

    python3 demos/02_ordering_strategies.py
"""

from corgi.catalog import slugify
from corgi.model import EducationalStage, InstructionInstance, make_dataset
from corgi.scheduler import OrderingConfig, order
from corgi.taxonomy import template_for

SUBJECTS_AND_CONCEPTS = (
    ("Astronomy", "orbits"),
    ("Astronomy", "stars"),
    ("Biology", "cells"),
)

INDICES = (1, 5, 18)


def make_item(subject, concept, index, stage="higher"):
    row = template_for(index)
    course_id = f"{slugify(subject)}/demo-course"
    concept_id = f"{course_id}/{slugify(concept)}"
    return InstructionInstance(
        id=f"{concept_id}/{index}",
        stage=EducationalStage(stage),
        subject=subject,
        course_id=course_id,
        concept_id=concept_id,
        cognitive_index=index,
        cognitive_process=row.process,
        cognitive_subprocess=row.subprocess,
        cognitive_load=row.load,
        system_message="",
        question=f"How does {concept} relate to step {index}?",
        answer=f"{concept} illustrates step {index}.",
    )


def tokens(items):
    return "  ".join(
        f"{it.subject[:4]}:{it.concept_id.rsplit('/', 1)[1]}@{it.cognitive_index}"
        for it in items
    )


def run():
    items = [
        make_item(subject, concept, index)
        for subject, concept in SUBJECTS_AND_CONCEPTS
        for index in INDICES
    ]
    dataset = make_dataset(items, run_id="ordering-demo")

    print(f"input ({len(items)} items):")
    print(f"  {tokens(items)}\n")

    notes = {
        "block": "one contiguous run per subject, difficulty ascending inside",
        "cluster": "one contiguous run per concept, all 3 steps back to back",
        "interleave": "subjects rotate at each difficulty step",
        "spiral": "concepts revisited round-robin, each visit one step harder",
        "random": "seeded shuffle, no curriculum at all",
    }
    for strategy in ("block", "cluster", "interleave", "spiral", "random"):
        cfg = OrderingConfig(strategy=strategy, seed=11)
        ordered = order(dataset, cfg)
        print(f"{strategy:<11} {notes[strategy]}")
        print(f"  {tokens(ordered.items)}\n")

    mixed = [
        make_item("Astronomy", "orbits", 1),
        make_item("Physics", "forces", 1, stage="secondary"),
        make_item("Astronomy", "orbits", 5),
        make_item("Physics", "forces", 5, stage="secondary"),
    ]
    cfg = OrderingConfig(strategy="block", stage_outermost=True)
    ordered = order(make_dataset(mixed, run_id="stage-demo"), cfg)
    print("stage_outermost=True puts all secondary items before higher ones:")
    print(f"  {tokens(ordered.items)}")


if __name__ == "__main__":
    run()
