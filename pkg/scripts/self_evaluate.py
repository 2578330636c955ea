"""Sanity experiment: score the test-split references against themselves.

Exports the test annotations as a strict-mode candidates file, runs the
evaluation harness with the rule-based scorer, and prints the report.
Every NLI/feature mean must come out 1.0 (the self-evaluation fixed
point); cosine needs the scoring service, so it reads n/a here.

    python scripts/build_paper_scale.py --out runs/paper_scale
    python scripts/self_evaluate.py --dataset runs/paper_scale
"""

import argparse
import json
import sys
from pathlib import Path

from tsdistill import RuleBasedScorer, emit_report, evaluate, load_candidates, load_samples


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--dataset", default="runs/paper_scale")
    args = parser.parse_args()

    dataset = Path(args.dataset)
    test_samples = [s for s in load_samples(dataset) if s.split == "test"]
    candidates_path = dataset / "self_candidates.jsonl"
    with candidates_path.open("w") as handle:
        for sample in test_samples:
            handle.write(json.dumps({"id": sample.id, "text": sample.annotation.pattern_json()}) + "\n")

    candidates = load_candidates(candidates_path, mode="strict")
    report = evaluate(test_samples, candidates, RuleBasedScorer())
    emit_report(report, dataset)
    print(report.to_text())
    return 0 if report.feature_trend == 1.0 else 1


if __name__ == "__main__":
    sys.exit(main())
