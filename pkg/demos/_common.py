"""Shared output-directory handling for the demo scripts."""

import argparse
from pathlib import Path


def out_dir(description: str) -> Path:
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--out", default=str(Path(__file__).with_name("out")), help="directory for the written files")
    d = Path(p.parse_args().out)
    d.mkdir(parents=True, exist_ok=True)
    return d
