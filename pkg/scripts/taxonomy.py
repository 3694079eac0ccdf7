"""Run the failure-taxonomy theories and show how each proof was classified."""

from __future__ import annotations

import logging
import sys
from pathlib import Path

from isarify.pipeline import counts, translate_source

ROOT = Path(__file__).resolve().parent.parent


def main() -> int:
    logging.basicConfig(level=logging.ERROR)
    proofs = []
    for path in sorted((ROOT / "taxonomy").glob("*.mthy")):
        res = translate_source(path.read_text(encoding="utf-8"), timeout=30.0)
        for p in res.proofs:
            kind = p.status if p.status != "fail" else f"fail/{p.category}"
            print(f"{path.name:24} {p.name or '-':16} {kind:14} {p.reason or ''}")
            proofs.append(p)
    c = counts(proofs)
    f = c["fail"]
    print(f"\ntotal {c['total']}: success {c['success']}, partial {c['partial']}, "
          f"print {f['print']}, timeout {f['timeout']}, misc {f['misc']}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
