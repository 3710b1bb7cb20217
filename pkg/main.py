# main.py
import sys

from cli_app import run_app

if __name__ == "__main__":
    sys.exit(run_app())
