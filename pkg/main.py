"""
Root entry point: ``python main.py <command> ...`` without installing the package
"""
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from ybe.main import main  # noqa: E402

if __name__ == "__main__":
    sys.exit(main())
