#!/usr/bin/env python3
# Copyright 2026 The ideaforecast Authors.
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Regenerates the bundled synthetic corpus in data/fixture.

Three regular leaderboards (one rank/score swap each, one idea shared across
two boards), a leaderboard without a research goal, a leaderboard whose
unified scores are all equal, and one truncated record.
"""

import json
import pathlib
import random
import sys

WORDS = [
    "attention", "contrastive", "sparse", "curriculum", "distillation",
    "augmentation", "retrieval", "adapter", "pruning", "mixture", "recurrent",
    "graph", "diffusion", "calibrated", "ensemble", "quantized", "multi-scale",
    "token", "memory", "hierarchical",
]

BOARDS = [
    ("bm-image-classification", "Image classification", "ImageNet-S",
     "Improve top-1 accuracy of image classifiers on a small natural-image "
     "benchmark.", 30, ["accuracy", "error"]),
    ("bm-question-answering", "Question answering", "SQuAD-S",
     "Improve exact-match and F1 of extractive question answering models.",
     26, ["em", "f1"]),
    ("bm-summarization", "Summarization", "News-S",
     "Improve ROUGE of abstractive news summarization systems.", 24,
     ["rouge1", "rougeL"]),
]


def main(out_dir):
    rng = random.Random(7)
    ideas, boards = [], []
    n = 0

    def new_idea(description, year):
        nonlocal n
        n += 1
        ideas.append({"idea_id": f"idea-{n:03d}", "description": description,
                      "source_paper_id": f"paper-{n:03d}", "year": year})
        return f"idea-{n:03d}"

    for bm, task, dataset, goal, size, metrics in BOARDS:
        entries = []
        for rank in range(1, size + 1):
            year = 2016 + rng.randrange(6)
            words = " ".join(rng.choice(WORDS) for _ in range(rng.randint(8, 40)))
            idea = new_idea(f"We propose a {rng.choice(WORDS)} {rng.choice(WORDS)} "
                            f"approach for {task.lower()} that {words}.", year)
            base = 95 - 60.0 * (rank - 1) / size + rng.uniform(-0.4, 0.4)
            values = {}
            for name in metrics:
                if name == "error":
                    values[name] = round(100 - base, 2)
                elif name == "f1":
                    values[name] = round(base + 4 + rng.uniform(-0.3, 0.3), 2)
                elif name == "rougeL":
                    values[name] = round(base - 5 + rng.uniform(-0.3, 0.3), 2)
                else:
                    values[name] = round(base, 2)
            entries.append({"entry_id": f"{bm}-e{rank:02d}", "rank": rank,
                            "metrics": values, "idea_id": idea,
                            "paper_year": year, "rr_paper_id": f"rr-{n:03d}"})
        entries[4]["metrics"], entries[5]["metrics"] = (
            entries[5]["metrics"], entries[4]["metrics"])
        boards.append({"benchmark_id": bm, "task_name": task,
                       "dataset_name": dataset, "research_goal": goal,
                       "entries": entries})
    boards[1]["entries"][-1]["idea_id"] = "idea-002"

    entries = []
    for rank in range(1, 7):
        year = 2018 + rank % 3
        idea = new_idea(f"A speech recognition idea using {WORDS[rank]} features.", year)
        entries.append({"entry_id": f"bm-speech-e{rank:02d}", "rank": rank,
                        "metrics": {"wer": 5.0 + rank}, "idea_id": idea,
                        "paper_year": year, "rr_paper_id": f"rr-{n:03d}"})
    boards.append({"benchmark_id": "bm-speech-recognition",
                   "task_name": "Speech recognition", "dataset_name": "Speech-S",
                   "research_goal": None, "entries": entries})

    # Uncorrelated metrics: every entry averages to 0.5.
    entries = []
    for rank, (m1, m2) in enumerate([(10, 0), (0, 10), (0, 10), (10, 0)], start=1):
        idea = new_idea(f"A tabular regression idea number {rank}.", 2020)
        entries.append({"entry_id": f"bm-tabular-e{rank:02d}", "rank": rank,
                        "metrics": {"m1": m1, "m2": m2}, "idea_id": idea,
                        "paper_year": 2020, "rr_paper_id": f"rr-{n:03d}"})
    boards.append({"benchmark_id": "bm-tabular-regression",
                   "task_name": "Tabular regression", "dataset_name": "Tab-S",
                   "research_goal": "Reduce regression error on tabular data.",
                   "entries": entries})

    out = pathlib.Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "ideas.jsonl", "w") as f:
        for idea in ideas:
            f.write(json.dumps(idea) + "\n")
    with open(out / "leaderboards.jsonl", "w") as f:
        for board in boards:
            f.write(json.dumps(board) + "\n")
        f.write('{"benchmark_id": "bm-truncated", "entries": [\n')


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data/fixture")
