"""Re-record the API fixtures under tests/fixtures/ from a live service.

Usage:
    llg serve --snap <snapshot> --feedback <fresh-log> --port 8711 &
    python3 scripts/record_fixtures.py http://127.0.0.1:8711

The feedback log must be fresh so the recorded acknowledgment is id 1.
The fixtures are committed; re-record only when the API contract moves.
"""

import json
import sys
from pathlib import Path

import httpx

OUT = Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def save(name: str, data: object) -> None:
    path = OUT / f"{name}.json"
    path.write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {path}")


def main() -> None:
    base = sys.argv[1] if len(sys.argv) > 1 else "http://127.0.0.1:8711"
    client = httpx.Client(base_url=base)

    save("health", client.get("/api/health").json())

    r = client.get("/api/search", params={"q": "clock skew"})
    assert r.status_code == 200, r.text
    search = r.json()
    save("search_clock_skew", search)

    r = client.get("/api/search", params={"q": "brownout resett"})
    assert r.status_code == 200, r.text
    save("search_unknown_term", r.json())

    r = client.get("/api/search", params={"q": "clokc skwe"})
    assert r.status_code == 422, (r.status_code, r.text)
    save("error_empty_query", r.json())

    save("suggest_clokc", client.get("/api/suggest", params={"q": "clokc"}).json())
    save("suggest_clock", client.get("/api/suggest", params={"q": "clock"}).json())

    # the body is assembled exactly the way the UI assembles it from a card
    result = next(x for x in search["results"] if x["kind"] == "transitive")
    body = {
        "query_raw": "clock skew",
        "doc_id": result["doc_id"],
        "relevant": False,
        "value_added": 3,
        "result_kind": result["kind"],
        "path_edges": [[e["src"], e["dst"]] for e in result["path_edges"]],
    }
    r = client.post("/api/feedback", json=body)
    assert r.status_code == 200, r.text
    save("feedback_ok", {"request": body, "response": r.json()})

    r = client.post("/api/feedback", json=dict(body, value_added=9))
    assert r.status_code == 422, (r.status_code, r.text)
    save("error_feedback_422", r.json())


if __name__ == "__main__":
    main()
