"""Verification reports: serialization, digests, and re-checking.

A report envelope carries the tool version, a digest of the canonical
input, and one report per request.  Pass reports embed their supporting
data — presentations, Groebner bases, staircases, multiplication
matrices — so that ``recheck`` can confirm them later without running
the original pipeline again: stored bases are validated by S-pair
reduction rather than recomputed from scratch.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field as dc_field

from . import __version__
from .budget import Budget
from .fields import field_from_name, field_name
from .poly import Polynomial, PolynomialRing, laurent_valuation
from .polyparse import ParseError, format_polynomial, parse_polynomial
from .schemes import AffineScheme
from .spans import (
    CertifyOutcome,
    Correspondence,
    PieceCertificate,
    SpanError,
    make_piece,
    recheck_certificate,
)

SCHEMA_VERSION = 1
VERDICTS = ("pass", "fail", "inconclusive", "error")
EXIT_CODES = {"pass": 0, "fail": 1, "error": 2, "inconclusive": 3}


def input_digest(text: str) -> str:
    return "sha256:" + hashlib.sha256(text.encode("utf-8")).hexdigest()


class ReportError(Exception):
    pass


# ---------------------------------------------------------------------------
# object <-> JSON


def ring_to_json(ring: PolynomialRing) -> dict:
    return {
        "field": field_name(ring.field),
        "names": list(ring.names),
        "inverted": sorted(ring.inverted),
    }


def ring_from_json(data: dict) -> PolynomialRing:
    return PolynomialRing(
        field_from_name(data["field"]),
        tuple(data["names"]),
        frozenset(data["inverted"]),
    )


def _poly(text: str, ring: PolynomialRing) -> Polynomial:
    try:
        return parse_polynomial(text, ring)
    except ParseError as err:
        raise ReportError(f"stored polynomial {text!r} does not parse: {err}") from err


def scheme_to_json(scheme: AffineScheme) -> dict:
    return {
        "ring": ring_to_json(scheme.ring),
        "relations": [format_polynomial(r) for r in scheme.relations],
    }


def scheme_from_json(data: dict) -> AffineScheme:
    ring = ring_from_json(data["ring"])
    return AffineScheme(ring, tuple(_poly(t, ring) for t in data["relations"]))


def correspondence_to_json(corr: Correspondence) -> dict:
    pieces = []
    for piece in corr.pieces:
        pieces.append(
            {
                "ring": ring_to_json(piece.ring),
                "relations": [format_polynomial(r) for r in piece.relations],
                "source": {k: format_polynomial(v) for k, v in piece.src_map},
                "target": {k: format_polynomial(v) for k, v in piece.tgt_map},
            }
        )
    return {
        "source": scheme_to_json(corr.source),
        "target": scheme_to_json(corr.target),
        "pieces": pieces,
    }


def correspondence_from_json(data: dict) -> Correspondence:
    source = scheme_from_json(data["source"])
    target = scheme_from_json(data["target"])
    pieces = []
    for raw in data["pieces"]:
        ring = ring_from_json(raw["ring"])
        relations = [_poly(t, ring) for t in raw["relations"]]
        src = {k: _poly(v, ring) for k, v in raw["source"].items()}
        tgt = {k: _poly(v, ring) for k, v in raw["target"].items()}
        try:
            pieces.append(make_piece(ring, relations, src, tgt, source, target))
        except (SpanError, KeyError) as err:
            raise ReportError(f"stored piece is malformed: {err}") from err
    return Correspondence(source, target, tuple(pieces))


def _base_ring(ring: PolynomialRing, split: int) -> PolynomialRing:
    names = ring.names[split:]
    return PolynomialRing(
        ring.field, names, frozenset(v for v in ring.inverted if v in names)
    )


def certificate_to_json(cert: PieceCertificate) -> dict:
    return {
        "ring": ring_to_json(cert.ring),
        "split": cert.split,
        "basis": [format_polynomial(g) for g in cert.groebner],
        "staircase": [list(e) for e in cert.staircase],
        "labels": list(cert.labels),
        "matrices": {
            var: [[format_polynomial(e) for e in row] for row in rows]
            for var, rows in cert.matrices
        },
        "base_basis": [format_polynomial(g) for g in cert.base_groebner],
        "fitting_below": [format_polynomial(g) for g in cert.fitting_below],
        "fitting_at": [format_polynomial(g) for g in cert.fitting_at],
        "rank": cert.rank,
    }


def certificate_from_json(data: dict) -> PieceCertificate:
    ring = ring_from_json(data["ring"])
    split = data["split"]
    base = _base_ring(ring, split)
    matrices = tuple(
        sorted(
            (var, tuple(tuple(_poly(e, base) for e in row) for row in rows))
            for var, rows in data["matrices"].items()
        )
    )
    return PieceCertificate(
        ring,
        split,
        tuple(_poly(t, ring) for t in data["basis"]),
        tuple(tuple(e) for e in data["staircase"]),
        tuple(data["labels"]),
        matrices,
        tuple(_poly(t, base) for t in data["base_basis"]),
        tuple(_poly(t, base) for t in data["fitting_below"]),
        tuple(_poly(t, base) for t in data["fitting_at"]),
    )


def outcome_to_json(outcome: CertifyOutcome) -> dict:
    return {
        "status": outcome.status,
        "rank": outcome.rank,
        "detail": outcome.detail,
        "witness": [format_polynomial(w) for w in outcome.witness],
        "pieces": [certificate_to_json(c) for c in outcome.pieces],
    }


def outcome_from_json(data: dict) -> CertifyOutcome:
    pieces = tuple(certificate_from_json(c) for c in data["pieces"])
    witness = []
    for text in data.get("witness", ()):
        if pieces:
            base = _base_ring(pieces[0].ring, pieces[0].split)
            witness.append(_poly(text, base))
    return CertifyOutcome(
        data["status"], data.get("rank"), pieces, data.get("detail", ""), tuple(witness)
    )


def finite_flat_block(corr: Correspondence, outcome: CertifyOutcome) -> dict:
    """Self-contained certificate: the presentation plus everything needed
    to confirm it without a fresh Groebner run."""
    return {
        "kind": "finite-flat",
        "span": correspondence_to_json(corr),
        "outcome": outcome_to_json(outcome),
    }


def bound_block(report) -> dict:
    """Serialize a valuation-bound report (duck-typed: ``torus_var``,
    ``n_bound``, ``entries``); entries carry their own ring."""
    ring = report.entries[0].value.ring if report.entries else None
    return {
        "kind": "valuation-bound",
        "ring": ring_to_json(ring) if ring is not None else None,
        "torus_var": report.torus_var,
        "bound": report.n_bound,
        "entries": [
            {
                "label": e.label,
                "row": e.row,
                "col": e.col,
                "valuation": e.valuation,
                "value": format_polynomial(e.value),
            }
            for e in report.entries
        ],
    }


# ---------------------------------------------------------------------------
# reports


@dataclass
class Report:
    name: str
    command: str
    operands: tuple[str, ...]
    args: dict[str, str]
    verdict: str
    detail: str = ""
    timing_ms: int = 0
    data: dict = dc_field(default_factory=dict)
    certificates: list[dict] = dc_field(default_factory=list)

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.verdict]

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "command": self.command,
            "request": {"operands": list(self.operands), "args": dict(self.args)},
            "verdict": self.verdict,
            "exit_code": self.exit_code,
            "detail": self.detail,
            "timing_ms": self.timing_ms,
            "data": self.data,
            "certificates": self.certificates,
        }


def envelope_json(reports: list[Report], digest: str) -> dict:
    code = max((r.exit_code for r in reports), default=0)
    return {
        "tool": "flatspan",
        "version": __version__,
        "schema_version": SCHEMA_VERSION,
        "input_digest": digest,
        "exit_code": code,
        "reports": [r.to_json() for r in reports],
    }


def render_text(report: Report) -> str:
    head = f"[{report.verdict}] {report.name} {report.command}"
    if report.operands:
        head += " " + " ".join(report.operands)
    if report.detail:
        head += f" -- {report.detail}"
    head += f" ({report.timing_ms} ms)"
    lines = [head]
    for key, value in report.data.items():
        if isinstance(value, dict) and any(
            isinstance(v, (list, dict)) for v in value.values()
        ):
            continue  # machine payload; the structured format carries it
        if isinstance(value, (list, tuple)):
            shown = ", ".join(str(v) for v in value)
        elif isinstance(value, dict):
            shown = "; ".join(f"{k}={v}" for k, v in value.items())
        else:
            shown = str(value)
        lines.append(f"    {key}: {shown}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# re-checking stored envelopes


def _structural(payload: dict, messages: list[str]) -> bool:
    ok = True
    for key in ("tool", "version", "schema_version", "input_digest", "exit_code", "reports"):
        if key not in payload:
            messages.append(f"envelope is missing {key!r}")
            ok = False
    if payload.get("tool") not in (None, "flatspan"):
        messages.append(f"envelope was written by {payload.get('tool')!r}")
        ok = False
    if payload.get("schema_version") not in (None, SCHEMA_VERSION):
        messages.append(
            f"schema version {payload.get('schema_version')!r} is not {SCHEMA_VERSION}"
        )
        ok = False
    return ok


def _recheck_block(block: dict, limit: int | None, messages: list[str], where: str) -> bool:
    budget = Budget(limit, "certificate recheck") if limit else None
    kind = block.get("kind")
    if kind == "finite-flat":
        corr = correspondence_from_json(block["span"])
        outcome = outcome_from_json(block["outcome"])
        if not recheck_certificate(corr, outcome, budget=budget):
            messages.append(f"{where}: stored finite-flat certificate fails re-validation")
            return False
        return True
    if kind == "valuation-bound":
        tvar = block["torus_var"]
        if not block["entries"]:
            if block["bound"] != 0:
                messages.append(f"{where}: empty valuation table cannot force a bound")
                return False
            return True
        ring = ring_from_json(block["ring"])
        worst = 0
        for entry in block["entries"]:
            value = _poly(entry["value"], ring)
            val = laurent_valuation(value, tvar)
            if val != entry["valuation"]:
                messages.append(
                    f"{where}: entry {entry['label']}[{entry['row']},{entry['col']}] "
                    f"claims valuation {entry['valuation']}, recomputed {val}"
                )
                return False
            worst = min(worst, val)
        if block["bound"] != max(0, -worst):
            messages.append(
                f"{where}: stored bound {block['bound']} disagrees with entries"
            )
            return False
        return True
    messages.append(f"{where}: unknown certificate kind {kind!r}")
    return False


def recheck_envelope(
    payload: dict,
    workspace_text: str | None = None,
    budget_limit: int | None = None,
) -> tuple[bool, list[str]]:
    """Re-validate a stored envelope.

    Checks the digest against the workspace (when one is supplied), the
    exit-code/verdict correspondence, and every embedded certificate.
    Returns overall agreement plus human-readable findings.
    """
    messages: list[str] = []
    ok = _structural(payload, messages)
    if workspace_text is not None and "input_digest" in payload:
        expected = input_digest(workspace_text)
        if payload["input_digest"] != expected:
            messages.append(
                "input digest does not match the workspace "
                f"({payload['input_digest']} vs {expected})"
            )
            ok = False
    codes = []
    for index, report in enumerate(payload.get("reports", [])):
        where = report.get("name") or f"report {index}"
        verdict = report.get("verdict")
        if verdict not in VERDICTS:
            messages.append(f"{where}: unknown verdict {verdict!r}")
            ok = False
            continue
        codes.append(EXIT_CODES[verdict])
        if report.get("exit_code") != EXIT_CODES[verdict]:
            messages.append(
                f"{where}: exit code {report.get('exit_code')} does not follow "
                f"from verdict {verdict!r}"
            )
            ok = False
        result = report.get("data", {}).get("result")
        if isinstance(result, dict):
            try:
                correspondence_from_json(result)
            except (ReportError, KeyError, ValueError, SpanError) as err:
                messages.append(f"{where}: stored result is not a valid presentation: {err}")
                ok = False
        for block in report.get("certificates", []):
            try:
                if not _recheck_block(block, budget_limit, messages, where):
                    ok = False
            except (ReportError, KeyError, ValueError, SpanError) as err:
                messages.append(f"{where}: certificate could not be rebuilt: {err}")
                ok = False
    if "exit_code" in payload and codes and payload["exit_code"] != max(codes):
        messages.append("envelope exit code does not match its reports")
        ok = False
    if ok:
        count = len(payload.get("reports", []))
        messages.append(f"recheck: {count} report(s) agree")
    return ok, messages


def load_envelope(text: str) -> dict:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as err:
        raise ReportError(f"report is not valid JSON: {err}") from err
    if not isinstance(payload, dict):
        raise ReportError("report envelope must be a JSON object")
    return payload
