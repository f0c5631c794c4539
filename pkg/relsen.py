#!/usr/bin/env python3
"""
RelSen - Main Entry Script

Streaming sensor reliability scoring and data cleaning, fault injection and
the cleaning benchmark.
"""

import sys
from pathlib import Path

# Add the project root to Python path
sys.path.insert(0, str(Path(__file__).parent))

from src.cli import main

if __name__ == "__main__":
    sys.exit(main())
