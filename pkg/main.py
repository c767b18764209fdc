"""
IPTK - Main Entry Point

Runs the batch command line.

Usage:
  - python main.py decide -f "p -> p"
  - python main.py bench sep --max-n 3
"""

from iptk.cli import main

if __name__ == "__main__":
    main()
