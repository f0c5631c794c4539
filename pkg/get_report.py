#!/usr/bin/env python3
"""
Rebuild the benchmark reports from a saved bench_results.json.
"""

import argparse
import os
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

from src.logger import get_logger
from src.report import BenchRunner

logger = get_logger()


def main():
    parser = argparse.ArgumentParser(description="Regenerate benchmark reports")
    parser.add_argument(
        "--result-dir", type=str, required=True, help="Directory holding bench_results.json"
    )
    parser.add_argument(
        "--output-dir", type=str, default=None, help="Where to write reports (default: result dir)"
    )
    args = parser.parse_args()

    results_path = os.path.join(args.result_dir, "bench_results.json")
    if not os.path.exists(results_path):
        logger.error(f"❌ No bench_results.json in {args.result_dir}")
        return 1

    runner = BenchRunner.from_json(results_path, output_dir=args.output_dir or args.result_dir)
    runner.print_summary()
    runner.save_csv_report()
    runner.save_text_report()
    html_path = runner.generate_html_report()
    print(f"HTML report generated: {html_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
