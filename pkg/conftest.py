import sys
from pathlib import Path

ROOT = Path(__file__).parent
for entry in (ROOT / "src", ROOT / "tests"):
    if str(entry) not in sys.path:
        sys.path.insert(0, str(entry))
