"""Build the paper-scale dataset (200 samples, 180/20 split) in mock mode.

Mock mode annotates with the feature oracle, so the whole run is offline
and deterministic. Point --out somewhere writable and inspect
manifest.json / samples.jsonl / sft_*.jsonl afterwards.

    python scripts/build_paper_scale.py --out runs/paper_scale
"""

import argparse
import sys
import time

from tsdistill import PipelineConfig
from tsdistill.dataset import DatasetBuilder


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="runs/paper_scale")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    config = PipelineConfig(dataset_seed=args.seed)
    started = time.monotonic()
    manifest = DatasetBuilder(config, args.out, mock=True).build()
    elapsed = time.monotonic() - started
    print(f"built {config.n_samples} samples ({config.train_count}/{config.test_count} split) "
          f"in {elapsed:.1f}s under {args.out}")
    print(f"oracle window: {manifest.oracle_window}, annotator: {manifest.annotator_mode}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
