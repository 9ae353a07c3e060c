"""Run the whole pipeline on a tiny synthetic catalog with the offline teacher.

The run writes every stage artifact into a scratch directory and prints the
stage log as it goes, then peeks at the finished training file.  No network
access and no API keys are involved; the simulated backend derives every
reply from the run seed, so re-running this script reproduces the same
training file byte for byte.

    python3 demos/01_full_pipeline.py
"""

import json
import os
import tempfile

from corgi.cli import FILTER_STATS_FILE, TRAINING_FILE, main

CATALOG = """\
subject,course_title,course_description,source
Higher Education - Astronomy,A Survey of the Universe,"A general survey of the astronomical universe: the solar system, planets and their satellites, stars and their evolution, galaxies, and big bang cosmology.",demo-catalog
Higher Education - Astronomy,Planetary Science,"Formation and dynamics of planetary systems: orbits, tides, atmospheres, rings, and the small bodies that record the history of the solar system.",demo-catalog
Secondary Education - Physics,Introductory Mechanics,"Motion along a line and in a plane, forces and Newton's laws, work and energy, momentum, and simple oscillations, with worked laboratory examples.",demo-catalog
Secondary Education - Biology,Cell Biology Basics,"Cell structure and organelles, membranes and transport, the cell cycle, and how microscopy reveals the architecture of living tissue.",demo-catalog
"""

ASTRONOMY_NOTE = """\
Kepler's laws describe the orbits of planets and comets about the Sun. Each
object travels along an ellipse with the Sun at one focus, sweeping out equal
areas in equal times. Objects closer to the Sun move faster because they sit
deeper in its gravity, which is why a comet spends most of its period far
from perihelion and races through the inner solar system.
"""

BIOLOGY_NOTE = """\
A cell keeps its chemistry separated from the environment by a membrane of
lipids and embedded proteins. Organelles divide the interior into working
compartments: the nucleus stores the genome, mitochondria supply energy, and
ribosomes translate messenger sequences into protein. Division proceeds
through the cell cycle, and mitosis distributes one copied genome to each
daughter cell.
"""

MECHANICS_NOTE = """\
Newton's laws connect force, mass, and acceleration. A body keeps its state
of motion until a net force acts on it, the acceleration it picks up is the
net force divided by its mass, and every force is paired with an equal and
opposite reaction. Work done by a force transfers energy, and for a closed
system momentum is conserved through every collision.
"""


def write_inputs(scratch):
    catalog_path = os.path.join(scratch, "catalog.csv")
    with open(catalog_path, "w", encoding="utf-8") as handle:
        handle.write(CATALOG)
    corpus_dir = os.path.join(scratch, "corpus")
    os.makedirs(corpus_dir)
    for name, text in (
        ("astronomy.txt", ASTRONOMY_NOTE),
        ("biology.txt", BIOLOGY_NOTE),
        ("mechanics.txt", MECHANICS_NOTE),
    ):
        with open(os.path.join(corpus_dir, name), "w", encoding="utf-8") as handle:
            handle.write(text)
    return catalog_path, corpus_dir


def run():
    scratch = tempfile.mkdtemp(prefix="corgi-demo-")
    catalog_path, corpus_dir = write_inputs(scratch)
    workdir = os.path.join(scratch, "work")
    config = {
        "workdir": workdir,
        "catalog": catalog_path,
        "corpus": corpus_dir,
        "run_id": "demo",
        "seed": 7,
        "strategy": "interleave",
        "batch_size": 64,
        "teacher": {
            "backend": "simulated",
            "refusal_rate": 0.08,
            "relevance_yes_rate": 0.35,
        },
    }
    config_path = os.path.join(scratch, "config.json")
    with open(config_path, "w", encoding="utf-8") as handle:
        json.dump(config, handle, indent=2)

    print(f"scratch directory: {scratch}")
    print("running all stages...\n")
    rc = main(["run", "--config", config_path])
    if rc != 0:
        raise SystemExit(rc)

    with open(os.path.join(workdir, FILTER_STATS_FILE), encoding="utf-8") as handle:
        stats = json.load(handle)
    print("\nfilter accounting:")
    for key in ("input_count", "rule_dropped", "retrieval_dropped", "kept"):
        print(f"  {key}: {stats[key]}")

    training_path = os.path.join(workdir, TRAINING_FILE)
    with open(training_path, encoding="utf-8") as handle:
        records = [json.loads(line) for line in handle]
    print(f"\n{len(records)} training records in {training_path}")
    print("first record:")
    for turn in records[0]["messages"]:
        text = turn["content"]
        if len(text) > 96:
            text = text[:93] + "..."
        print(f"  [{turn['role']}] {text}")


if __name__ == "__main__":
    run()
