#!/usr/bin/env python3
"""
Tree-PGD - Main Entry Point

Estimation of piecewise-constant parameters on graphs by tree-projected
gradient descent.

Usage:
    python main.py project --tree t.txt --input u.txt -S 4 --grid=-1,1,0.1 --out theta.txt
    python main.py estimate --graph g.txt --X X.csv --y y.txt -S 8 --grid=-1,1,0.05 --out theta.txt
    python main.py simulate --replicates 2 --out-csv data/output/sim.csv
    python main.py info
"""

import sys
from pathlib import Path

# Add src to path
sys.path.insert(0, str(Path(__file__).parent))

from src.main import main

if __name__ == "__main__":
    sys.exit(main())
